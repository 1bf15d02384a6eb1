#pragma once

// Minimal SVG charts for sweep and angle outputs.

#include <string>

#include "polopt/analysis.hpp"
#include "polopt/sweep.hpp"

namespace polopt {

/// Accuracy vs K for one condition: one line per regime (mean) with a
/// shaded ±std band.
std::string accuracy_plot_svg(const SweepResult& result, Condition condition);

/// Scatter of generator vs analyzer angles (degrees), one point per capture
/// per trial, colored by rank. LP plots (θ_Lg, θ_La); QWP plots (θ_Qg, θ_Qa).
std::string angle_scatter_svg(const AngleAnalysis& analysis);

}  // namespace polopt
