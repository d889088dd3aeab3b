#pragma once

// Minimal SVG emission for the figures the sweep produces: median valid-time
// curves with quartile bars, normalized-error traces, and space-time error
// heatmaps. Plots are derived views; the CSVs remain the record.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyfc::svg {

inline std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct QuartilePoint {
    double x = 0.0;       // nominal coordinate (used for the tick label)
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

struct QuartileSeries {
    std::string label;
    std::string color;
    std::vector<QuartilePoint> points;
};

namespace detail {

struct Canvas {
    double width = 640, height = 440;
    double left = 70, right = 30, top = 40, bottom = 55;
    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
};

inline void open_svg(std::ofstream& os, const Canvas& c, const std::string& title)
{
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width << "\" height=\""
       << c.height << "\" viewBox=\"0 0 " << c.width << " " << c.height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << c.width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"14\">"
       << title << "</text>\n";
}

inline void axis_labels(std::ofstream& os, const Canvas& c, const std::string& xlabel,
                        const std::string& ylabel)
{
    os << "<text x=\"" << c.left + c.plot_w() / 2 << "\" y=\"" << c.height - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
       << "</text>\n"
       << "<text x=\"16\" y=\"" << c.top + c.plot_h() / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
          "transform=\"rotate(-90 16 "
       << c.top + c.plot_h() / 2 << ")\">" << ylabel << "</text>\n";
}

inline void frame(std::ofstream& os, const Canvas& c)
{
    os << "<rect x=\"" << c.left << "\" y=\"" << c.top << "\" width=\"" << c.plot_w()
       << "\" height=\"" << c.plot_h() << "\" fill=\"none\" stroke=\"black\"/>\n";
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
    if (!(hi > lo)) hi = lo + 1.0;
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return ticks;
}

}  // namespace detail

/// Median-with-quartile-bars plot. Points are placed at equally spaced
/// categorical positions labeled by their nominal x values, which keeps both
/// reservoir-size and error sweeps readable without log-axis machinery.
inline void write_quartile_plot(const std::string& path, const std::string& title,
                                const std::string& xlabel, const std::string& ylabel,
                                const std::vector<QuartileSeries>& series)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    detail::Canvas c;

    std::vector<double> xs;
    double ymax = 0.0;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            if (std::find(xs.begin(), xs.end(), p.x) == xs.end()) xs.push_back(p.x);
            ymax = std::max(ymax, p.q3);
        }
    std::sort(xs.begin(), xs.end());
    if (xs.empty()) throw std::invalid_argument("write_quartile_plot: no points");
    ymax = ymax > 0 ? 1.1 * ymax : 1.0;

    auto xpos = [&](double x) {
        const auto idx = std::find(xs.begin(), xs.end(), x) - xs.begin();
        return c.left + c.plot_w() * (double(idx) + 0.5) / double(xs.size());
    };
    auto ypos = [&](double y) { return c.top + c.plot_h() * (1.0 - y / ymax); };

    detail::open_svg(os, c, title);
    detail::frame(os, c);
    for (double t : detail::nice_ticks(0.0, ymax)) {
        os << "<line x1=\"" << c.left - 4 << "\" y1=\"" << ypos(t) << "\" x2=\"" << c.left
           << "\" y2=\"" << ypos(t) << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << c.left - 8 << "\" y=\"" << ypos(t) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
           << "</text>\n";
    }
    for (double x : xs) {
        os << "<line x1=\"" << xpos(x) << "\" y1=\"" << c.top + c.plot_h() << "\" x2=\"" << xpos(x)
           << "\" y2=\"" << c.top + c.plot_h() + 4 << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << xpos(x) << "\" y=\"" << c.top + c.plot_h() + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(x)
           << "</text>\n";
    }
    detail::axis_labels(os, c, xlabel, ylabel);

    double legend_y = c.top + 14;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : s.points) os << xpos(p.x) << "," << ypos(p.median) << " ";
        os << "\"/>\n";
        for (const auto& p : s.points) {
            const double x = xpos(p.x);
            os << "<line x1=\"" << x << "\" y1=\"" << ypos(p.q1) << "\" x2=\"" << x << "\" y2=\""
               << ypos(p.q3) << "\" stroke=\"" << s.color << "\"/>\n"
               << "<line x1=\"" << x - 4 << "\" y1=\"" << ypos(p.q1) << "\" x2=\"" << x + 4
               << "\" y2=\"" << ypos(p.q1) << "\" stroke=\"" << s.color << "\"/>\n"
               << "<line x1=\"" << x - 4 << "\" y1=\"" << ypos(p.q3) << "\" x2=\"" << x + 4
               << "\" y2=\"" << ypos(p.q3) << "\" stroke=\"" << s.color << "\"/>\n"
               << "<circle cx=\"" << x << "\" cy=\"" << ypos(p.median) << "\" r=\"3\" fill=\""
               << s.color << "\"/>\n";
        }
        os << "<line x1=\"" << c.left + c.plot_w() - 150 << "\" y1=\"" << legend_y << "\" x2=\""
           << c.left + c.plot_w() - 126 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
           << "\" stroke-width=\"1.5\"/>\n"
           << "<text x=\"" << c.left + c.plot_w() - 120 << "\" y=\"" << legend_y + 4
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
        legend_y += 16;
    }
    os << "</svg>\n";
}

/// Normalized error E(t) against time with the validity threshold marked.
inline void write_error_curve(const std::string& path, const std::string& title,
                              const std::string& xlabel, const std::vector<double>& times,
                              const std::vector<double>& errors, double threshold)
{
    if (times.size() != errors.size() || times.empty())
        throw std::invalid_argument("write_error_curve: bad series");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    detail::Canvas c;

    const double xmax = times.back();
    double ymax = threshold;
    for (double e : errors) ymax = std::max(ymax, std::min(e, 2.0));
    ymax *= 1.1;

    auto xpos = [&](double x) { return c.left + c.plot_w() * x / xmax; };
    auto ypos = [&](double y) { return c.top + c.plot_h() * (1.0 - std::min(y, ymax) / ymax); };

    detail::open_svg(os, c, title);
    detail::frame(os, c);
    for (double t : detail::nice_ticks(0.0, xmax)) {
        os << "<line x1=\"" << xpos(t) << "\" y1=\"" << c.top + c.plot_h() << "\" x2=\"" << xpos(t)
           << "\" y2=\"" << c.top + c.plot_h() + 4 << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << xpos(t) << "\" y=\"" << c.top + c.plot_h() + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
           << "</text>\n";
    }
    for (double t : detail::nice_ticks(0.0, ymax)) {
        os << "<line x1=\"" << c.left - 4 << "\" y1=\"" << ypos(t) << "\" x2=\"" << c.left
           << "\" y2=\"" << ypos(t) << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << c.left - 8 << "\" y=\"" << ypos(t) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
           << "</text>\n";
    }
    detail::axis_labels(os, c, xlabel, "E(t)");

    os << "<line x1=\"" << c.left << "\" y1=\"" << ypos(threshold) << "\" x2=\""
       << c.left + c.plot_w() << "\" y2=\"" << ypos(threshold)
       << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < times.size(); ++i) os << xpos(times[i]) << "," << ypos(errors[i]) << " ";
    os << "\"/>\n</svg>\n";
}

/// Space-time field with a diverging colormap: strongly negative values map
/// to blue, zero to green, strongly positive to red.
inline void write_heatmap(const std::string& path, const std::string& title,
                          const std::string& xlabel, const std::string& ylabel,
                          const Eigen::MatrixXd& field, double x0, double dx, double y0, double dy,
                          int max_columns = 400)
{
    if (field.size() == 0) throw std::invalid_argument("write_heatmap: empty field");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    detail::Canvas c;

    const double vmax = std::max(field.cwiseAbs().maxCoeff(), 1e-12);
    auto color = [&](double v) {
        const double t = std::clamp(v / vmax, -1.0, 1.0);
        int r, g, b;
        if (t < 0) {  // green -> blue
            r = 0;
            g = static_cast<int>(160 * (1.0 + t));
            b = static_cast<int>(-255 * t);
        } else {  // green -> red
            r = static_cast<int>(255 * t);
            g = static_cast<int>(160 * (1.0 - t));
            b = 0;
        }
        char buf[8];
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
        return std::string(buf);
    };

    const auto cols = field.cols();
    const int stride = std::max<int>(1, static_cast<int>((cols + max_columns - 1) / max_columns));
    const auto shown = (cols + stride - 1) / stride;
    const double cell_w = c.plot_w() / double(shown);
    const double cell_h = c.plot_h() / double(field.rows());

    detail::open_svg(os, c, title);
    for (Eigen::Index ci = 0, slot = 0; ci < cols; ci += stride, ++slot)
        for (Eigen::Index ri = 0; ri < field.rows(); ++ri)
            os << "<rect x=\"" << c.left + slot * cell_w << "\" y=\""
               << c.top + c.plot_h() - (ri + 1) * cell_h << "\" width=\"" << cell_w + 0.5
               << "\" height=\"" << cell_h + 0.5 << "\" fill=\"" << color(field(ri, ci)) << "\"/>\n";
    detail::frame(os, c);

    const double xmax = x0 + dx * double(cols - 1);
    for (double t : detail::nice_ticks(x0, xmax)) {
        const double px = c.left + c.plot_w() * (t - x0) / (xmax - x0);
        os << "<line x1=\"" << px << "\" y1=\"" << c.top + c.plot_h() << "\" x2=\"" << px
           << "\" y2=\"" << c.top + c.plot_h() + 4 << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << px << "\" y=\"" << c.top + c.plot_h() + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
           << "</text>\n";
    }
    const double ymax_v = y0 + dy * double(field.rows() - 1);
    for (double t : detail::nice_ticks(y0, ymax_v)) {
        const double py = c.top + c.plot_h() * (1.0 - (t - y0) / (ymax_v - y0));
        os << "<line x1=\"" << c.left - 4 << "\" y1=\"" << py << "\" x2=\"" << c.left << "\" y2=\""
           << py << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << c.left - 8 << "\" y=\"" << py + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
           << "</text>\n";
    }
    detail::axis_labels(os, c, xlabel, ylabel);
    os << "</svg>\n";
}

}  // namespace hyfc::svg
