#include "polopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "csv_format.hpp"

namespace polopt {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

void check_plans(std::span<const MeasurementPlan> plans, Condition expected) {
  for (const auto& p : plans) {
    if (p.condition() != expected)
      throw std::invalid_argument(std::string("expected ") + std::string(to_string(expected)) + " plans");
    if (p.size() != plans.front().size()) throw std::invalid_argument("plans differ in capture count");
  }
}

void aggregate(AngleAnalysis& analysis) {
  analysis.ranks.clear();
  if (analysis.trials.empty()) return;
  const std::size_t k = analysis.trials.front().size();
  for (std::size_t r = 0; r < k; ++r) {
    std::vector<double> lg, qg, qa, la, rel;
    for (const auto& trial : analysis.trials) {
      lg.push_back(trial[r].theta_lg);
      qg.push_back(trial[r].theta_qg);
      qa.push_back(trial[r].theta_qa);
      la.push_back(trial[r].theta_la);
      rel.push_back(trial[r].relative);
    }
    analysis.ranks.push_back({static_cast<int>(r), static_cast<int>(lg.size()), mean_std(lg), mean_std(qg),
                              mean_std(qa), mean_std(la), mean_std(rel)});
  }
}

}  // namespace

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

AngleAnalysis align_lp_angles(std::span<const MeasurementPlan> plans) {
  check_plans(plans, Condition::LP);
  AngleAnalysis out;
  out.condition = Condition::LP;
  for (const auto& plan : plans) {
    const auto& caps = plan.captures();
    std::vector<AlignedCapture> aligned;
    for (int i = 0; i < plan.size(); ++i) {
      const double rel = wrap_symmetric(caps[i].theta_lg.radians() - caps[i].theta_la.radians());
      aligned.push_back({i, caps[i].theta_lg.radians(), 0.0, 0.0, caps[i].theta_la.radians(), rel});
    }
    // Strict < keeps the lowest index on ties.
    int i_min = 0;
    for (int i = 1; i < plan.size(); ++i)
      if (aligned[i].relative < aligned[i_min].relative) i_min = i;
    const double reference = aligned[i_min].theta_lg;
    // Relative angles are recomputed from the shifted values so that a
    // second alignment reproduces them bit for bit.
    for (auto& a : aligned) {
      a.theta_lg = wrap_half_turn(a.theta_lg - reference);
      a.theta_la = wrap_half_turn(a.theta_la - reference);
      a.relative = wrap_symmetric(a.theta_lg - a.theta_la);
    }
    std::stable_sort(aligned.begin(), aligned.end(),
                     [](const AlignedCapture& x, const AlignedCapture& y) { return x.relative < y.relative; });
    out.trials.push_back(std::move(aligned));
  }
  aggregate(out);
  return out;
}

std::vector<MeasurementPlan> aligned_plans(const AngleAnalysis& analysis) {
  std::vector<MeasurementPlan> out;
  for (const auto& trial : analysis.trials) {
    std::vector<CaptureConfig> caps;
    for (const auto& a : trial)
      caps.push_back({Angle(a.theta_lg), Angle(a.theta_qg), Angle(a.theta_qa), Angle(a.theta_la)});
    out.emplace_back(analysis.condition, std::move(caps));
  }
  return out;
}

AngleAnalysis qwp_angle_scatter(std::span<const MeasurementPlan> plans) {
  check_plans(plans, Condition::QWP);
  AngleAnalysis out;
  out.condition = Condition::QWP;
  for (const auto& plan : plans) {
    std::vector<AlignedCapture> caps;
    for (int i = 0; i < plan.size(); ++i) {
      const auto& c = plan.captures()[i];
      caps.push_back({i, c.theta_lg.radians(), c.theta_qg.radians(), c.theta_qa.radians(), c.theta_la.radians(),
                      wrap_symmetric(c.theta_qg.radians() - c.theta_qa.radians())});
    }
    std::stable_sort(caps.begin(), caps.end(),
                     [](const AlignedCapture& x, const AlignedCapture& y) { return x.theta_qa < y.theta_qa; });
    out.trials.push_back(std::move(caps));
  }
  aggregate(out);
  return out;
}

std::string angles_csv(const AngleAnalysis& analysis) {
  std::string out = "condition,trial,rank,theta_lg_deg,theta_la_deg,theta_qg_deg,theta_qa_deg,relative_deg\n";
  const std::string cond(to_string(analysis.condition));
  for (std::size_t t = 0; t < analysis.trials.size(); ++t) {
    const auto& trial = analysis.trials[t];
    for (std::size_t r = 0; r < trial.size(); ++r) {
      const auto& a = trial[r];
      out += cond + "," + std::to_string(t) + "," + std::to_string(r) + "," + csv::num(a.theta_lg * kDeg) + "," +
             csv::num(a.theta_la * kDeg) + "," + csv::num(a.theta_qg * kDeg) + "," + csv::num(a.theta_qa * kDeg) +
             "," + csv::num(a.relative * kDeg) + "\n";
    }
  }
  return out;
}

std::string angle_summary_csv(const AngleAnalysis& analysis) {
  std::string out =
      "condition,rank,count,theta_lg_mean_deg,theta_lg_std_deg,theta_la_mean_deg,theta_la_std_deg,"
      "theta_qg_mean_deg,theta_qg_std_deg,theta_qa_mean_deg,theta_qa_std_deg,relative_mean_deg,relative_std_deg\n";
  const std::string cond(to_string(analysis.condition));
  for (const auto& r : analysis.ranks) {
    out += cond + "," + std::to_string(r.rank) + "," + std::to_string(r.count);
    for (const MeanStd* m : {&r.theta_lg, &r.theta_la, &r.theta_qg, &r.theta_qa, &r.relative})
      out += "," + csv::num(m->mean * kDeg) + "," + csv::num(m->std * kDeg);
    out += "\n";
  }
  return out;
}

}  // namespace polopt
