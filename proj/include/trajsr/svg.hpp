#pragma once

#include <string>
#include <utility>
#include <vector>

#include "trajsr/metrics.hpp"
#include "trajsr/trajectory.hpp"

namespace trajsr::svg {

// Grouped bar chart of the reports' error histograms. All reports must
// share the same bin edges.
std::string histogram_svg(const std::vector<metrics::EvalReport>& reports);

// Labeled polyline overlay of trajectories on a shared equal-aspect
// lat/lon canvas.
std::string overlay_svg(const std::vector<std::pair<std::string, Trajectory>>& layers);

}  // namespace trajsr::svg
