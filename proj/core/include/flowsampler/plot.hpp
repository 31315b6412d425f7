#pragma once

#include <filesystem>
#include <vector>

#include "flowsampler/experiment.hpp"

namespace flowsampler {

struct PlotStyle {
    bool log_y = false;
};

/// Render trajectory CSVs as an SVG panel grid: one row per metric, one
/// column per lambda, one polyline per flow. Output bytes are a pure
/// function of the inputs. Nothing is written when the inputs are invalid.
void emit_plot(const std::vector<std::filesystem::path>& inputs,
               const std::filesystem::path& output, const PlotStyle& style);

/// The SVG document itself, for callers that want the bytes.
std::string render_plot(const std::vector<Trajectory>& trajectories, const PlotStyle& style);

} // namespace flowsampler
