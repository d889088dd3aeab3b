#pragma once

// Umbrella header.

#include "hyfc/artifact_io.hpp"
#include "hyfc/cli.hpp"
#include "hyfc/core.hpp"
#include "hyfc/evaluation.hpp"
#include "hyfc/experiment.hpp"
#include "hyfc/hybrid.hpp"
#include "hyfc/knowledge.hpp"
#include "hyfc/ks.hpp"
#include "hyfc/linalg.hpp"
#include "hyfc/lorenz.hpp"
#include "hyfc/reservoir.hpp"
#include "hyfc/svg.hpp"
#include "hyfc/systems.hpp"
#include "hyfc/trajectory_io.hpp"
