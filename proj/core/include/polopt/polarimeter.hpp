#pragma once

// Ellipsometer forward model and linear Mueller estimation.
//
// A capture illuminates the sample with unpolarized light of intensity L
// through the generator P and records the first Stokes component after the
// analyzer A:  f = [A · M · P · s]₀,  s = [L, 0, 0, 0]ᵀ.
// Since f is linear in M, K captures stack into a K×16 design matrix W with
// f = W · vec(M) (row-major vec).

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "polopt/mueller.hpp"

namespace polopt {

/// Which polarization elements rotate.
///  LP      generator L(θ_Lg), analyzer L(θ_La)
///  QWP     generator Q(θ_Qg)L(0), analyzer L(0)Q(θ_Qa); polarizers fixed
///  LP_QWP  generator Q(θ_Qg)L(θ_Lg), analyzer L(θ_La)Q(θ_Qa)
enum class Condition { LP, QWP, LP_QWP };

std::string_view to_string(Condition c);
/// Accepts "LP", "QWP", "LP+QWP" (and "LP_QWP"). Throws std::invalid_argument.
Condition condition_from_string(std::string_view name);

/// Number of free angles per capture: 2 for LP and QWP, 4 for LP_QWP.
int free_angles_per_capture(Condition c);

/// Angles of the four elements for one capture. Entries that do not rotate
/// under a condition sit at the reference orientation 0.
struct CaptureConfig {
  Angle theta_lg;
  Angle theta_qg;
  Angle theta_qa;
  Angle theta_la;

  CaptureConfig canonicalized() const;
  /// Zeroes the entries that `c` keeps fixed, then canonicalizes.
  CaptureConfig normalized_for(Condition c) const;

  friend bool operator==(const CaptureConfig&, const CaptureConfig&) = default;
};

class MeasurementPlan {
 public:
  /// Throws std::invalid_argument when `captures` is empty or the source
  /// intensity is not positive. Captures are normalized for `condition`.
  MeasurementPlan(Condition condition, std::vector<CaptureConfig> captures,
                  double source_intensity = 1.0);

  Condition condition() const { return condition_; }
  const std::vector<CaptureConfig>& captures() const { return captures_; }
  double source_intensity() const { return source_intensity_; }
  int size() const { return static_cast<int>(captures_.size()); }

  friend bool operator==(const MeasurementPlan&, const MeasurementPlan&) = default;

 private:
  Condition condition_;
  std::vector<CaptureConfig> captures_;
  double source_intensity_;
};

// ---------------------------------------------------------------------------
// Generic (scalar-type templated) pieces of the forward model. Only the
// generator output P·s and the first row of A are ever needed.

template <class T>
Vec4<T> generator_output_t(Condition c, const T& theta_lg, const T& theta_qg, double source) {
  const T zero(0.0);
  const Vec4<T> s{T(source), zero, zero, zero};
  Vec4<T> p = mat_vec(linear_polarizer_t(theta_lg), s);
  if (c != Condition::LP) p = mat_vec(quarter_wave_plate_t(theta_qg), p);
  return p;
}

template <class T>
Vec4<T> analyzer_row_t(Condition c, const T& theta_qa, const T& theta_la) {
  const T zero(0.0);
  const Vec4<T> e0{T(1.0), zero, zero, zero};
  Vec4<T> a = vec_mat(e0, linear_polarizer_t(theta_la));
  if (c != Condition::LP) a = vec_mat(a, quarter_wave_plate_t(theta_qa));
  return a;
}

/// aᵀ M p.
template <class T>
T bilinear_intensity_t(const Vec4<T>& a, const MuellerMatrix& m, const Vec4<T>& p) {
  T acc(0.0);
  for (int i = 0; i < 4; ++i) {
    T row(0.0);
    for (int j = 0; j < 4; ++j) row = row + p[j] * m(i, j);
    acc = acc + a[i] * row;
  }
  return acc;
}

// ---------------------------------------------------------------------------

MuellerMatrix generator_matrix(const CaptureConfig& c, Condition tag);
MuellerMatrix analyzer_matrix(const CaptureConfig& c, Condition tag);

/// Simulated sensor reading [A·M·P·s]₀ with s = [L,0,0,0]ᵀ.
double intensity(const MuellerMatrix& m, const CaptureConfig& c, Condition tag,
                 double source_intensity = 1.0);

/// All K readings of a plan.
std::vector<double> measure(const MuellerMatrix& m, const MeasurementPlan& plan);

struct DesignMatrix {
  Eigen::Matrix<double, Eigen::Dynamic, 16, Eigen::RowMajor> w;

  int rows() const { return static_cast<int>(w.rows()); }
};

DesignMatrix build_design_matrix(const MeasurementPlan& plan);

struct MuellerEstimate {
  MuellerMatrix mueller;
  double residual = 0.0;  ///< ‖W·vec(M̂) − f‖₂
  int rank = 0;
};

/// Relative singular-value cutoff used for rank decisions.
inline constexpr double kRankTolerance = 1e-10;

/// Minimum-norm least-squares solution of W·vec(M) = f via SVD. Rank
/// deficiency is not an error. Throws std::invalid_argument if f.size() != K.
MuellerEstimate estimate_mueller(const MeasurementPlan& plan, std::span<const double> f);

struct PlanDiagnostics {
  int rank = 0;
  double condition_number = 0.0;  ///< σ_max / σ_min over the retained values
  std::array<double, 16> singular_values{};  ///< descending, zero-padded
};

PlanDiagnostics plan_diagnostics(const MeasurementPlan& plan);
PlanDiagnostics design_diagnostics(const DesignMatrix& design);

/// Row-major mask of the Mueller entries a plan determines uniquely: entry i
/// is observable when the unit vector e_i lies in the row space of W.
std::array<bool, 16> observable_entries(const DesignMatrix& design);

}  // namespace polopt
