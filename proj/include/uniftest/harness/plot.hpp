// plot.hpp
//
// Sample complexity versus l1 distance as an SVG line chart: one series per
// algorithm over the cells whose source is an alternative, with +/- 1
// standard deviation error bars. Output depends only on the aggregates, with
// fixed-precision number formatting, so re-rendering is byte-identical.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uniftest/harness/report.hpp"

namespace uniftest::harness {

struct PlotPoint {
    double gamma = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    std::uint64_t trials = 0;
};

/// Alternative cells grouped by algorithm, sorted by gamma.
inline std::map<std::string, std::vector<PlotPoint>> plot_series(const std::vector<CellAggregate>& cells) {
    std::map<std::string, std::vector<PlotPoint>> series;
    for (const auto& c : cells) {
        if (c.truth != Decision::H1) continue;
        series[c.algorithm].push_back({c.gamma, c.samples.mean, c.samples.stddev, c.trials});
    }
    for (auto& [name, pts] : series)
        std::sort(pts.begin(), pts.end(), [](const PlotPoint& a, const PlotPoint& b) { return a.gamma < b.gamma; });
    return series;
}

namespace detail {

inline std::string fixed(double v, int precision = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

/// 1, 2 or 5 times a power of ten, giving at most ~6 ticks over span.
inline double nice_step(double span) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 5.0, 10.0})
        if (f * mag >= raw) return f * mag;
    return 10.0 * mag;
}

}  // namespace detail

inline std::string render_plot_svg(const std::vector<CellAggregate>& cells,
                                   const std::string& title = "Sample complexity versus l1 distance") {
    const auto series = plot_series(cells);
    if (series.empty()) throw std::invalid_argument("no alternative cells to plot");

    double gmin = 1e300, gmax = -1e300, ymax = 0.0;
    for (const auto& [name, pts] : series)
        for (const auto& p : pts) {
            gmin = std::min(gmin, p.gamma);
            gmax = std::max(gmax, p.gamma);
            ymax = std::max(ymax, p.mean + p.stddev);
        }
    double xpad = (gmax - gmin) * 0.05;
    if (xpad == 0.0) xpad = 0.05;
    const double x0 = gmin - xpad, x1 = gmax + xpad;
    const double ystep = detail::nice_step(ymax > 0.0 ? ymax : 1.0);
    const double y1 = std::max(ystep, std::ceil(ymax / ystep) * ystep);

    constexpr int W = 720, H = 480, left = 90, right = 150, top = 40, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    auto sx = [&](double g) { return left + (g - x0) / (x1 - x0) * pw; };
    auto sy = [&](double v) { return top + ph - std::clamp(v, 0.0, y1) / y1 * ph; };
    using detail::fixed;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
        << W << ' ' << H << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
        << title << "</text>\n";

    // grid and axes
    for (double v = 0.0; v <= y1 + 1e-9 * y1; v += ystep) {
        out << "<line x1=\"" << left << "\" y1=\"" << fixed(sy(v)) << "\" x2=\"" << left + pw << "\" y2=\""
            << fixed(sy(v)) << "\" stroke=\"#dddddd\"/>\n"
            << "<text x=\"" << left - 8 << "\" y=\"" << fixed(sy(v) + 4) << "\" text-anchor=\"end\" "
            << "font-family=\"sans-serif\" font-size=\"11\">" << fixed(v, 0) << "</text>\n";
    }
    const double xstep = detail::nice_step(x1 - x0);
    for (double g = std::ceil(x0 / xstep) * xstep; g <= x1 + 1e-12; g += xstep) {
        out << "<line x1=\"" << fixed(sx(g)) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(sx(g)) << "\" y2=\""
            << top + ph + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << fixed(sx(g)) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"11\">" << fixed(g, 2) << "</text>\n";
    }
    out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">l1 distance to uniform</text>\n"
        << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\" transform=\"rotate(-90 20 " << top + ph / 2 << ")\">mean samples used</text>\n";

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::size_t idx = 0;
    for (const auto& [name, pts] : series) {
        const char* colour = palette[idx % std::size(palette)];
        out << "<g class=\"series\" data-algorithm=\"" << name << "\">\n";
        if (pts.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i)
                out << (i ? " " : "") << fixed(sx(pts[i].gamma)) << ',' << fixed(sy(pts[i].mean));
            out << "\"/>\n";
        }
        for (const auto& p : pts) {
            const double cx = sx(p.gamma);
            out << "<line x1=\"" << fixed(cx) << "\" y1=\"" << fixed(sy(p.mean - p.stddev)) << "\" x2=\"" << fixed(cx)
                << "\" y2=\"" << fixed(sy(p.mean + p.stddev)) << "\" stroke=\"" << colour << "\"/>\n"
                << "<circle cx=\"" << fixed(cx) << "\" cy=\"" << fixed(sy(p.mean)) << "\" r=\"3.5\" fill=\"" << colour
                << "\"/>\n";
        }
        out << "</g>\n";
        const int ly = top + 10 + static_cast<int>(idx) * 20;
        out << "<rect x=\"" << W - right + 15 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" fill=\""
            << colour << "\"/>\n"
            << "<text x=\"" << W - right + 33 << "\" y=\"" << ly + 1
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << name << "</text>\n";
        ++idx;
    }
    out << "</svg>\n";
    return out.str();
}

inline std::string render_plot_csv(const std::vector<CellAggregate>& cells) {
    const auto series = plot_series(cells);
    if (series.empty()) throw std::invalid_argument("no alternative cells to plot");
    std::ostringstream out;
    out << "algorithm,gamma,mean_samples,stddev_samples,trials\n";
    for (const auto& [name, pts] : series)
        for (const auto& p : pts)
            out << name << ',' << format_double(p.gamma) << ',' << format_double(p.mean) << ','
                << format_double(p.stddev) << ',' << p.trials << '\n';
    return out.str();
}

/// Writes the SVG chart and, next to it, the plotted table as CSV.
inline void emit_plot(const std::vector<CellAggregate>& cells, const std::string& svg_path,
                      const std::string& csv_path) {
    const std::string svg = render_plot_svg(cells);
    const std::string csv = render_plot_csv(cells);
    std::ofstream(svg_path, std::ios::binary) << svg;
    std::ofstream(csv_path, std::ios::binary) << csv;
}

}  // namespace uniftest::harness
