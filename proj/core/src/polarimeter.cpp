#include "polopt/polarimeter.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace polopt {

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::LP: return "LP";
    case Condition::QWP: return "QWP";
    case Condition::LP_QWP: return "LP+QWP";
  }
  return "?";
}

Condition condition_from_string(std::string_view name) {
  if (name == "LP") return Condition::LP;
  if (name == "QWP") return Condition::QWP;
  if (name == "LP+QWP" || name == "LP_QWP") return Condition::LP_QWP;
  throw std::invalid_argument("unknown condition '" + std::string(name) + "'");
}

int free_angles_per_capture(Condition c) { return c == Condition::LP_QWP ? 4 : 2; }

CaptureConfig CaptureConfig::canonicalized() const {
  return {theta_lg.canonical(), theta_qg.canonical(), theta_qa.canonical(), theta_la.canonical()};
}

CaptureConfig CaptureConfig::normalized_for(Condition c) const {
  CaptureConfig out = *this;
  switch (c) {
    case Condition::LP:
      out.theta_qg = Angle(0.0);
      out.theta_qa = Angle(0.0);
      break;
    case Condition::QWP:
      out.theta_lg = Angle(0.0);
      out.theta_la = Angle(0.0);
      break;
    case Condition::LP_QWP:
      break;
  }
  return out.canonicalized();
}

MeasurementPlan::MeasurementPlan(Condition condition, std::vector<CaptureConfig> captures,
                                 double source_intensity)
    : condition_(condition), captures_(std::move(captures)), source_intensity_(source_intensity) {
  if (captures_.empty()) throw std::invalid_argument("measurement plan needs at least one capture");
  if (!(source_intensity_ > 0.0)) throw std::invalid_argument("source intensity must be positive");
  for (auto& c : captures_) c = c.normalized_for(condition_);
}

MuellerMatrix generator_matrix(const CaptureConfig& c, Condition tag) {
  switch (tag) {
    case Condition::LP:
      return linear_polarizer(c.theta_lg);
    case Condition::QWP:
      return quarter_wave_plate(c.theta_qg) * linear_polarizer(Angle(0.0));
    case Condition::LP_QWP:
      return quarter_wave_plate(c.theta_qg) * linear_polarizer(c.theta_lg);
  }
  throw std::logic_error("unreachable condition");
}

MuellerMatrix analyzer_matrix(const CaptureConfig& c, Condition tag) {
  switch (tag) {
    case Condition::LP:
      return linear_polarizer(c.theta_la);
    case Condition::QWP:
      return linear_polarizer(Angle(0.0)) * quarter_wave_plate(c.theta_qa);
    case Condition::LP_QWP:
      return linear_polarizer(c.theta_la) * quarter_wave_plate(c.theta_qa);
  }
  throw std::logic_error("unreachable condition");
}

double intensity(const MuellerMatrix& m, const CaptureConfig& c, Condition tag,
                 double source_intensity) {
  const StokesVector s = StokesVector::unpolarized(source_intensity);
  return apply(analyzer_matrix(c, tag), apply(m, apply(generator_matrix(c, tag), s)))[0];
}

std::vector<double> measure(const MuellerMatrix& m, const MeasurementPlan& plan) {
  std::vector<double> f;
  f.reserve(plan.captures().size());
  for (const auto& c : plan.captures())
    f.push_back(intensity(m, c, plan.condition(), plan.source_intensity()));
  return f;
}

DesignMatrix build_design_matrix(const MeasurementPlan& plan) {
  DesignMatrix out;
  out.w.resize(plan.size(), 16);
  for (int k = 0; k < plan.size(); ++k) {
    const CaptureConfig& c = plan.captures()[k];
    const Vec4<double> p = generator_output_t<double>(plan.condition(), c.theta_lg.radians(),
                                                      c.theta_qg.radians(), plan.source_intensity());
    const Vec4<double> a =
        analyzer_row_t<double>(plan.condition(), c.theta_qa.radians(), c.theta_la.radians());
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out.w(k, 4 * i + j) = a[i] * p[j];
  }
  return out;
}

namespace {

int retained_count(const Eigen::VectorXd& sv) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  const double cutoff = kRankTolerance * sv(0);
  int r = 0;
  while (r < sv.size() && sv(r) > cutoff) ++r;
  return r;
}

}  // namespace

MuellerEstimate estimate_mueller(const MeasurementPlan& plan, std::span<const double> f) {
  if (static_cast<int>(f.size()) != plan.size())
    throw std::invalid_argument("expected " + std::to_string(plan.size()) + " intensities, got " +
                                std::to_string(f.size()));
  const DesignMatrix design = build_design_matrix(plan);
  const Eigen::MatrixXd w = design.w;
  const Eigen::Map<const Eigen::VectorXd> rhs(f.data(), static_cast<Eigen::Index>(f.size()));

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const int rank = retained_count(sv);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(16);
  for (int i = 0; i < rank; ++i) {
    const double coeff = svd.matrixU().col(i).dot(rhs) / sv(i);
    x += coeff * svd.matrixV().col(i);
  }

  MuellerEstimate out;
  std::array<double, 16> values{};
  for (int i = 0; i < 16; ++i) values[i] = x(i);
  out.mueller = MuellerMatrix::from_row_major(values);
  out.residual = (w * x - rhs).norm();
  out.rank = rank;
  return out;
}

PlanDiagnostics design_diagnostics(const DesignMatrix& design) {
  const Eigen::MatrixXd w = design.w;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
  const Eigen::VectorXd& sv = svd.singularValues();
  PlanDiagnostics out;
  out.rank = retained_count(sv);
  for (Eigen::Index i = 0; i < sv.size() && i < 16; ++i) out.singular_values[i] = sv(i);
  out.condition_number =
      out.rank > 0 ? sv(0) / sv(out.rank - 1) : std::numeric_limits<double>::infinity();
  return out;
}

std::array<bool, 16> observable_entries(const DesignMatrix& design) {
  std::array<bool, 16> out{};
  if (design.rows() == 0) return out;
  const Eigen::MatrixXd w = design.w;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullV);
  const int rank = retained_count(svd.singularValues());
  const Eigen::MatrixXd v = svd.matrixV().leftCols(rank);
  for (int i = 0; i < 16; ++i) out[i] = v.row(i).squaredNorm() > 1.0 - 1e-9;
  return out;
}

PlanDiagnostics plan_diagnostics(const MeasurementPlan& plan) {
  return design_diagnostics(build_design_matrix(plan));
}

}  // namespace polopt
