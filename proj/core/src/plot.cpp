#include "flowsampler/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace flowsampler {

namespace {

constexpr double kPanelW = 360.0;
constexpr double kPanelH = 250.0;
constexpr double kMarginL = 70.0;
constexpr double kMarginR = 16.0;
constexpr double kMarginT = 34.0;
constexpr double kMarginB = 46.0;
constexpr double kLegendH = 28.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

struct Metric {
    const char* name;
    double TrajectoryRow::*field;
};

constexpr Metric kMetrics[] = {
    {"mean_err", &TrajectoryRow::mean_err},
    {"cov_rel_err", &TrajectoryRow::cov_rel_err},
    {"cos_err", &TrajectoryRow::cos_err},
};

std::string num(double v, const char* spec = "%.2f") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
    void pad() {
        if (!valid()) {
            lo = 0.0;
            hi = 1.0;
        } else if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    double frac(double v) const { return (v - lo) / (hi - lo); }
};

} // namespace

std::string render_plot(const std::vector<Trajectory>& trajectories, const PlotStyle& style) {
    if (trajectories.empty()) {
        throw FormatError("plot: no trajectories");
    }

    std::vector<double> lambdas;
    std::vector<std::string> flows;
    for (const Trajectory& t : trajectories) {
        if (std::find(lambdas.begin(), lambdas.end(), t.lambda) == lambdas.end()) {
            lambdas.push_back(t.lambda);
        }
        if (std::find(flows.begin(), flows.end(), t.flow) == flows.end()) {
            flows.push_back(t.flow);
        }
    }
    std::sort(lambdas.begin(), lambdas.end());
    std::sort(flows.begin(), flows.end());

    const int rows = static_cast<int>(std::size(kMetrics));
    const int cols = static_cast<int>(lambdas.size());
    const double width = cols * kPanelW;
    const double height = kLegendH + rows * kPanelH;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width, "%.0f")
        << "\" height=\"" << num(height, "%.0f") << "\" viewBox=\"0 0 " << num(width, "%.0f")
        << " " << num(height, "%.0f") << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Legend: one swatch per flow.
    double lx = 12.0;
    for (std::size_t f = 0; f < flows.size(); ++f) {
        const char* color = kPalette[f % std::size(kPalette)];
        svg << "<rect x=\"" << num(lx) << "\" y=\"9\" width=\"18\" height=\"4\" fill=\"" << color
            << "\"/>\n";
        svg << "<text x=\"" << num(lx + 24.0)
            << "\" y=\"16\" font-family=\"monospace\" font-size=\"12\">" << flows[f]
            << "</text>\n";
        lx += 36.0 + 8.0 * flows[f].size();
    }

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double x0 = c * kPanelW + kMarginL;
            const double y0 = kLegendH + r * kPanelH + kMarginT;
            const double plot_w = kPanelW - kMarginL - kMarginR;
            const double plot_h = kPanelH - kMarginT - kMarginB;

            // Collect the panel's series.
            std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
            Range xr;
            Range yr;
            for (const Trajectory& t : trajectories) {
                if (t.lambda != lambdas[c]) continue;
                std::vector<std::pair<double, double>> pts;
                for (const TrajectoryRow& row : t.rows) {
                    double y = row.*(kMetrics[r].field);
                    if (!std::isfinite(y)) continue;
                    if (style.log_y) {
                        if (y <= 0.0) continue;
                        y = std::log10(y);
                    }
                    pts.emplace_back(row.t, y);
                    xr.add(row.t);
                    yr.add(y);
                }
                series.emplace_back(t.flow, std::move(pts));
            }
            xr.pad();
            yr.pad();

            svg << "<text x=\"" << num(x0) << "\" y=\"" << num(y0 - 12.0)
                << "\" font-family=\"monospace\" font-size=\"12\">" << kMetrics[r].name
                << " lambda=" << num(lambdas[c], "%g") << "</text>\n";

            // Frame and ticks.
            svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(plot_w)
                << "\" height=\"" << num(plot_h)
                << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
            for (int k = 0; k <= 4; ++k) {
                const double fx = k / 4.0;
                const double tx = x0 + fx * plot_w;
                const double tv = xr.lo + fx * (xr.hi - xr.lo);
                svg << "<line x1=\"" << num(tx) << "\" y1=\"" << num(y0 + plot_h) << "\" x2=\""
                    << num(tx) << "\" y2=\"" << num(y0 + plot_h + 4.0)
                    << "\" stroke=\"black\"/>\n";
                svg << "<text x=\"" << num(tx) << "\" y=\"" << num(y0 + plot_h + 16.0)
                    << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"middle\">"
                    << num(tv, "%.3g") << "</text>\n";

                const double fy = k / 4.0;
                const double ty = y0 + plot_h - fy * plot_h;
                const double yv = yr.lo + fy * (yr.hi - yr.lo);
                svg << "<line x1=\"" << num(x0 - 4.0) << "\" y1=\"" << num(ty) << "\" x2=\""
                    << num(x0) << "\" y2=\"" << num(ty) << "\" stroke=\"black\"/>\n";
                svg << "<text x=\"" << num(x0 - 6.0) << "\" y=\"" << num(ty + 3.0)
                    << "\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">"
                    << (style.log_y ? "1e" + num(yv, "%.2g") : num(yv, "%.3g")) << "</text>\n";
            }
            svg << "<text x=\"" << num(x0 + 0.5 * plot_w) << "\" y=\""
                << num(y0 + plot_h + 32.0)
                << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">t"
                << "</text>\n";

            for (const auto& [flow, pts] : series) {
                if (pts.empty()) continue;
                const auto it = std::find(flows.begin(), flows.end(), flow);
                const char* color = kPalette[(it - flows.begin()) % std::size(kPalette)];
                svg << "<polyline fill=\"none\" stroke=\"" << color
                    << "\" stroke-width=\"1.5\" points=\"";
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    if (i) svg << ' ';
                    svg << num(x0 + xr.frac(pts[i].first) * plot_w) << ','
                        << num(y0 + plot_h - yr.frac(pts[i].second) * plot_h);
                }
                svg << "\"/>\n";
            }
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_plot(const std::vector<std::filesystem::path>& inputs,
               const std::filesystem::path& output, const PlotStyle& style) {
    if (inputs.empty()) {
        throw FormatError("plot: no input CSV files");
    }
    std::vector<Trajectory> trajectories;
    trajectories.reserve(inputs.size());
    for (const std::filesystem::path& p : inputs) {
        std::ifstream in(p);
        if (!in) {
            throw FormatError("plot: cannot open '" + p.string() + "'");
        }
        trajectories.push_back(read_trajectory_csv(in, p.string()));
    }
    const std::string svg = render_plot(trajectories, style);
    std::ofstream out(output, std::ios::binary);
    if (!out) {
        throw ArgumentError("plot: cannot write '" + output.string() + "'");
    }
    out << svg;
}

} // namespace flowsampler
