#include "polopt/plan_io.hpp"

#include <fstream>
#include <sstream>

#include "json_support.hpp"

namespace polopt {

namespace detail {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const char* context) {
  if (!obj.is_object()) throw FormatError(std::string(context) + ": expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw FormatError(std::string(context) + ": missing field '" + key + "'");
  return *it;
}

nlohmann::json plan_to_json_value(const MeasurementPlan& plan) {
  nlohmann::json captures = nlohmann::json::array();
  for (const auto& c : plan.captures()) {
    captures.push_back({{"theta_lg_deg", c.theta_lg.degrees()},
                        {"theta_qg_deg", c.theta_qg.degrees()},
                        {"theta_qa_deg", c.theta_qa.degrees()},
                        {"theta_la_deg", c.theta_la.degrees()}});
  }
  return {{"condition", std::string(to_string(plan.condition()))},
          {"captures", std::move(captures)},
          {"source_intensity", plan.source_intensity()}};
}

MeasurementPlan plan_from_json_value(const nlohmann::json& j) {
  try {
    const Condition condition = condition_from_string(require(j, "condition", "plan").get<std::string>());
    const auto& captures = require(j, "captures", "plan");
    if (!captures.is_array()) throw FormatError("plan: 'captures' must be an array");
    std::vector<CaptureConfig> out;
    out.reserve(captures.size());
    for (const auto& c : captures) {
      auto angle = [&](const char* key) {
        // Fields a condition keeps fixed may be omitted.
        if (!c.is_object()) throw FormatError("plan: each capture must be an object");
        auto it = c.find(key);
        return it == c.end() ? Angle(0.0) : Angle::from_degrees(it->get<double>());
      };
      out.push_back({angle("theta_lg_deg"), angle("theta_qg_deg"), angle("theta_qa_deg"),
                     angle("theta_la_deg")});
    }
    double source = 1.0;
    if (auto it = j.find("source_intensity"); it != j.end()) source = it->get<double>();
    return MeasurementPlan(condition, std::move(out), source);
  } catch (const FormatError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("plan: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("plan: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace detail

std::string plan_to_json(const MeasurementPlan& plan, int indent) {
  return detail::plan_to_json_value(plan).dump(indent);
}

MeasurementPlan plan_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("plan: ") + e.what());
  }
  return detail::plan_from_json_value(j);
}

void save_plan(const std::filesystem::path& path, const MeasurementPlan& plan) {
  detail::write_text_file(path, plan_to_json(plan) + "\n");
}

MeasurementPlan load_plan(const std::filesystem::path& path) {
  return plan_from_json(detail::read_text_file(path));
}

}  // namespace polopt
