#pragma once

// JSON form of a measurement plan; angles are written in degrees.
//
//   {"condition": "LP"|"QWP"|"LP+QWP",
//    "captures": [{"theta_lg_deg": .., "theta_qg_deg": .., "theta_qa_deg": .., "theta_la_deg": ..}, ...],
//    "source_intensity": ..}

#include <filesystem>
#include <string>
#include <string_view>

#include "polopt/format_error.hpp"
#include "polopt/polarimeter.hpp"

namespace polopt {

std::string plan_to_json(const MeasurementPlan& plan, int indent = 2);

/// Throws FormatError with a diagnostic on malformed input.
MeasurementPlan plan_from_json(std::string_view text);

void save_plan(const std::filesystem::path& path, const MeasurementPlan& plan);
MeasurementPlan load_plan(const std::filesystem::path& path);

}  // namespace polopt
