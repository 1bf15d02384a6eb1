#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "polopt/analysis.hpp"

using namespace polopt;
constexpr double kPi = std::numbers::pi;

namespace {

double deg(double rad) { return rad * 180.0 / kPi; }

MeasurementPlan lp_plan(std::initializer_list<std::pair<double, double>> degrees) {
  std::vector<CaptureConfig> c;
  for (auto [lg, la] : degrees) c.push_back({Angle::from_degrees(lg), Angle(0.0), Angle(0.0), Angle::from_degrees(la)});
  return MeasurementPlan(Condition::LP, c);
}

MeasurementPlan qwp_plan(std::initializer_list<std::pair<double, double>> degrees) {
  std::vector<CaptureConfig> c;
  for (auto [qg, qa] : degrees) c.push_back({Angle(0.0), Angle::from_degrees(qg), Angle::from_degrees(qa), Angle(0.0)});
  return MeasurementPlan(Condition::QWP, c);
}

}  // namespace

TEST(MeanStd, Values) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean_std(v).mean, 2.5);
  EXPECT_NEAR(mean_std(v).std, std::sqrt(5.0 / 3.0), 1e-15);
  const std::vector<double> one{7};
  EXPECT_EQ(mean_std(one).std, 0.0);
}

TEST(AlignLp, WorkedExample) {
  const std::vector<MeasurementPlan> plans{lp_plan({{30.8, 4.7}, {10.0, 4.0}})};
  const AngleAnalysis a = align_lp_angles(plans);
  ASSERT_EQ(a.trials.size(), 1u);
  const auto& t = a.trials[0];
  EXPECT_EQ(t[0].capture_index, 1);
  EXPECT_NEAR(deg(t[0].relative), 6.0, 1e-9);
  EXPECT_NEAR(deg(t[1].relative), 26.1, 1e-9);
  EXPECT_NEAR(deg(t[0].theta_lg), 0.0, 1e-9);
  EXPECT_NEAR(deg(t[1].theta_lg), 20.8, 1e-9);
  EXPECT_NEAR(deg(t[0].theta_la), 174.0, 1e-9);
  EXPECT_NEAR(deg(t[1].theta_la), 174.7, 1e-9);
}

TEST(AlignLp, AlreadyReferencedPlanIsUnchanged) {
  const MeasurementPlan p = lp_plan({{0.0, 170.0}, {40.0, 10.0}, {100.0, 50.0}});
  const std::vector<MeasurementPlan> plans{p};
  const auto aligned = aligned_plans(align_lp_angles(plans));
  ASSERT_EQ(aligned.size(), 1u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(aligned[0].captures()[k].theta_lg.degrees(), p.captures()[k].theta_lg.degrees(), 1e-9);
    EXPECT_NEAR(aligned[0].captures()[k].theta_la.degrees(), p.captures()[k].theta_la.degrees(), 1e-9);
  }
}

TEST(AlignLp, TiesKeepCaptureOrder) {
  // Radian values chosen so both differences are exactly 0.25.
  const auto c = [](double lg, double la) { return CaptureConfig{Angle(lg), Angle(0.0), Angle(0.0), Angle(la)}; };
  const std::vector<MeasurementPlan> plans{MeasurementPlan(Condition::LP, {c(0.75, 0.5), c(0.5, 0.25), c(1.5, 0.0)})};
  const AngleAnalysis a = align_lp_angles(plans);
  EXPECT_EQ(a.trials[0][0].capture_index, 0);
  EXPECT_EQ(a.trials[0][1].capture_index, 1);
  EXPECT_NEAR(a.trials[0][1].theta_lg, kPi - 0.25, 1e-12);
}

TEST(AlignLp, Idempotent) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 180.0);
  std::vector<MeasurementPlan> plans;
  for (int t = 0; t < 20; ++t) plans.push_back(lp_plan({{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}}));
  const auto once = aligned_plans(align_lp_angles(plans));
  const auto twice = aligned_plans(align_lp_angles(once));
  EXPECT_EQ(once, twice);
}

TEST(AlignLp, RecoversConstructedClusters) {
  // Rank r sits at θ_Lg = base[r] with relative angle rel[r], after a random
  // common rotation and a random capture order.
  const std::vector<double> base{0.0, 37.0, 95.0, 140.0};
  const std::vector<double> rel{-50.0, -5.0, 20.0, 61.0};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> spin(0.0, 180.0);
  std::vector<MeasurementPlan> plans;
  for (int t = 0; t < 10; ++t) {
    const double phi = spin(rng);
    std::vector<CaptureConfig> c;
    for (int r = 0; r < 4; ++r)
      c.push_back({Angle::from_degrees(base[r] + phi), Angle(0.0), Angle(0.0), Angle::from_degrees(base[r] + phi - rel[r])});
    std::shuffle(c.begin(), c.end(), rng);
    plans.emplace_back(Condition::LP, c);
  }
  const AngleAnalysis a = align_lp_angles(plans);
  ASSERT_EQ(a.ranks.size(), 4u);
  for (int r = 0; r < 4; ++r) {
    EXPECT_EQ(a.ranks[r].count, 10);
    EXPECT_NEAR(deg(a.ranks[r].theta_lg.mean), base[r], 1e-9);
    EXPECT_NEAR(deg(a.ranks[r].relative.mean), rel[r], 1e-9);
    EXPECT_LT(a.ranks[r].theta_lg.std, 1e-9);
  }
}

TEST(AlignLp, RejectsBadInput) {
  const std::vector<MeasurementPlan> mixed{lp_plan({{0, 0}}), lp_plan({{0, 0}, {1, 1}})};
  EXPECT_THROW(align_lp_angles(mixed), std::invalid_argument);
  const std::vector<MeasurementPlan> qwp{qwp_plan({{0, 0}})};
  EXPECT_THROW(align_lp_angles(qwp), std::invalid_argument);
}

TEST(QwpScatter, ClusterMeans) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> jitter(0.0, 0.5);
  std::vector<MeasurementPlan> plans;
  for (int t = 0; t < 10; ++t) plans.push_back(qwp_plan({{135.0 + jitter(rng), 135.0 + jitter(rng)}, {45.0 + jitter(rng), 45.0 + jitter(rng)}}));
  const AngleAnalysis a = qwp_angle_scatter(plans);
  ASSERT_EQ(a.ranks.size(), 2u);
  EXPECT_NEAR(deg(a.ranks[0].theta_qa.mean), 45.0, 1.0);
  EXPECT_NEAR(deg(a.ranks[0].theta_qg.mean), 45.0, 1.0);
  EXPECT_NEAR(deg(a.ranks[1].theta_qa.mean), 135.0, 1.0);
  EXPECT_NEAR(deg(a.ranks[1].theta_qg.mean), 135.0, 1.0);
}

TEST(QwpScatter, SinglePlanAndEmptyList) {
  const std::vector<MeasurementPlan> one{qwp_plan({{10.0, 80.0}, {60.0, 20.0}})};
  const AngleAnalysis a = qwp_angle_scatter(one);
  ASSERT_EQ(a.trials.size(), 1u);
  EXPECT_NEAR(deg(a.trials[0][0].theta_qg), 60.0, 1e-12);
  EXPECT_NEAR(deg(a.trials[0][0].theta_qa), 20.0, 1e-12);
  EXPECT_NEAR(deg(a.trials[0][1].theta_qg), 10.0, 1e-12);
  EXPECT_NEAR(deg(a.trials[0][0].relative), 40.0, 1e-12);
  EXPECT_NEAR(deg(a.trials[0][1].relative), -70.0, 1e-12);
  EXPECT_TRUE(qwp_angle_scatter(std::vector<MeasurementPlan>{}).trials.empty());
  const std::vector<MeasurementPlan> lp{lp_plan({{0, 0}})};
  EXPECT_THROW(qwp_angle_scatter(lp), std::invalid_argument);
}

TEST(AnalysisCsv, Headers) {
  const std::vector<MeasurementPlan> plans{lp_plan({{30.8, 4.7}, {10.0, 4.0}})};
  const AngleAnalysis a = align_lp_angles(plans);
  const std::string rows = angles_csv(a);
  EXPECT_EQ(rows.substr(0, rows.find('\n')),
            "condition,trial,rank,theta_lg_deg,theta_la_deg,theta_qg_deg,theta_qa_deg,relative_deg");
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 3);
  const std::string summary = angle_summary_csv(a);
  EXPECT_EQ(summary.rfind("condition,rank,count,theta_lg_mean_deg,theta_lg_std_deg", 0), 0u);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 3);
}
