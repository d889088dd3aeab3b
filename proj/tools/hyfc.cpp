#include <hyfc/cli.hpp>

int main(int argc, char** argv) { return hyfc::cli::run(argc, argv); }
