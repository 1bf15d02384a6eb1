#pragma once

// nlohmann/json conversions shared by the file-format implementations.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "polopt/format_error.hpp"
#include "polopt/polarimeter.hpp"

namespace polopt::detail {

nlohmann::json plan_to_json_value(const MeasurementPlan& plan);
MeasurementPlan plan_from_json_value(const nlohmann::json& j);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Fetches a required member, raising FormatError when it is absent.
const nlohmann::json& require(const nlohmann::json& obj, const char* key, const char* context);

}  // namespace polopt::detail
