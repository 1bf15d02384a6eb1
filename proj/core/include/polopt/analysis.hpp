#pragma once

// Post-hoc analysis of optimized plans across trials.
//
// LP plans carry two nuisance symmetries from rotation augmentation: a common
// rotation of both polarizers and the order of captures. align_lp_angles
// removes both: each plan is rotated so that the generator polarizer of its
// smallest-relative-angle capture sits at 0, and captures are ordered by
// relative angle. Trials are then aggregated rank by rank.

#include <span>
#include <string>
#include <vector>

#include "polopt/polarimeter.hpp"

namespace polopt {

struct AlignedCapture {
  int capture_index = 0;  ///< position in the original plan
  double theta_lg = 0.0;  ///< radians, [0, π)
  double theta_qg = 0.0;
  double theta_qa = 0.0;
  double theta_la = 0.0;
  double relative = 0.0;  ///< radians
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< unbiased (n-1); 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct RankStats {
  int rank = 0;
  int count = 0;
  MeanStd theta_lg;
  MeanStd theta_qg;
  MeanStd theta_qa;
  MeanStd theta_la;
  MeanStd relative;
};

struct AngleAnalysis {
  Condition condition = Condition::LP;
  std::vector<std::vector<AlignedCapture>> trials;  ///< sorted by rank within each trial
  std::vector<RankStats> ranks;
};

/// For each plan: θ_d = wrap(θ_Lg − θ_La) into (−π/2, π/2]; reference
/// i_min = argmin θ_d (ties → lowest index); subtract θ_Lg of i_min from every
/// θ_Lg and θ_La and canonicalize; sort by θ_d (stable). Throws
/// std::invalid_argument if a plan is not LP or the plans differ in size.
AngleAnalysis align_lp_angles(std::span<const MeasurementPlan> plans);

/// Rebuilds the aligned plans of one analysis (sorted capture order).
std::vector<MeasurementPlan> aligned_plans(const AngleAnalysis& analysis);

/// QWP angles as they are, sorted within each plan by θ_Qa (stable). The
/// relative angle is wrap(θ_Qg − θ_Qa). Throws std::invalid_argument for
/// non-QWP plans or mixed sizes. An empty list gives an empty analysis.
AngleAnalysis qwp_angle_scatter(std::span<const MeasurementPlan> plans);

/// Header: condition,trial,rank,theta_lg_deg,theta_la_deg,theta_qg_deg,theta_qa_deg,relative_deg
std::string angles_csv(const AngleAnalysis& analysis);

/// Header: condition,rank,count,theta_lg_mean_deg,theta_lg_std_deg,... per angle and relative.
std::string angle_summary_csv(const AngleAnalysis& analysis);

}  // namespace polopt
