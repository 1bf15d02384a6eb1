#pragma once

// End-to-end training of a measurement plan and a material classifier.
//
// Simulated intensities f_k = [A_k M P_k s]₀ of each (augmented) Mueller
// matrix feed the MLP directly. Under Regime::Optimized the rotation angles
// receive gradients through the forward model and are updated by Adam
// alongside the classifier weights; under Random and Uniform the plan stays
// frozen and only the classifier learns.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polopt/autodiff.hpp"
#include "polopt/format_error.hpp"
#include "polopt/materials.hpp"
#include "polopt/mlp.hpp"
#include "polopt/polarimeter.hpp"

namespace polopt {

enum class Regime { Random, Uniform, Optimized };

std::string_view to_string(Regime r);
/// Throws std::invalid_argument for an unknown name.
Regime regime_from_string(std::string_view name);

/// The free angles of a plan as a flat parameter vector. Per capture the
/// layout is (θ_Lg, θ_La) for LP, (θ_Qg, θ_Qa) for QWP and
/// (θ_Lg, θ_Qg, θ_Qa, θ_La) for LP_QWP. Values are unconstrained radians.
struct AnglePack {
  Condition condition = Condition::LP;
  double source_intensity = 1.0;
  std::vector<double> params;

  int captures() const { return static_cast<int>(params.size()) / free_angles_per_capture(condition); }

  static AnglePack from_plan(const MeasurementPlan& plan);
  /// i.i.d. U[0, π) for every free angle.
  static AnglePack random(Condition condition, int captures, Rng& rng, double source_intensity = 1.0);

  /// Canonicalizes the angles into a plan.
  MeasurementPlan to_plan() const;
};

/// Expands one capture's free angles into (θ_Lg, θ_Qg, θ_Qa, θ_La), using the
/// constant reference 0 for fixed elements.
template <class T>
std::array<T, 4> expand_capture(Condition c, std::span<const T> free) {
  switch (c) {
    case Condition::LP: return {free[0], T(0.0), T(0.0), free[1]};
    case Condition::QWP: return {T(0.0), free[0], free[1], T(0.0)};
    case Condition::LP_QWP: return {free[0], free[1], free[2], free[3]};
  }
  return {};
}

/// Differentiable intensities of one Mueller matrix; `angles` follows the
/// AnglePack layout.
std::vector<ad::Var> forward_measure(const MuellerMatrix& m, std::span<const ad::Var> angles,
                                     Condition condition, double source_intensity = 1.0);

/// Analyzer first rows and generator outputs of all captures, K×4 each.
struct OpticsTensors {
  ad::Tensor analyzer;
  ad::Tensor generator;
};

OpticsTensors optics_tensors(ad::Tape& tape, std::span<const ad::Var> angles, Condition condition,
                             double source_intensity);

/// B×K intensities aₖᵀ M_b pₖ of a batch of Mueller matrices.
ad::Tensor measure_batch(ad::Tape& tape, const OpticsTensors& optics, std::span<const MuellerMatrix> batch);

// ---------------------------------------------------------------------------

struct Minibatch {
  std::vector<MuellerMatrix> mueller;
  std::vector<int> labels;
  std::array<double, kNumCategories> class_weights{};
};

/// w_c = B / (P · n_c) for the P classes present in the batch, 0 otherwise.
/// A balanced batch gets all-ones weights.
std::array<double, kNumCategories> class_weights(std::span<const int> labels);

struct BatchOptions {
  int size = 128;
  bool augment = true;
};

/// `size` uniform draws with replacement from `pool` (indices into
/// dataset.samples), each scaled by augment_intensity then rotated by
/// augment_rotation. Throws std::invalid_argument on an empty pool.
Minibatch make_minibatch(const Dataset& dataset, std::span<const int> pool, Rng& rng,
                         const BatchOptions& options = {});

// ---------------------------------------------------------------------------

struct TrainConfig {
  int steps = 5000;
  int batch_size = 128;
  double lr_angles = 1e-2;
  double lr_classifier = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool augment = true;
};

struct HistoryEntry {
  int step = 0;
  double loss = 0.0;
  double batch_accuracy = 0.0;
};

struct TrainResult {
  MeasurementPlan plan;
  ClassifierParams classifier;
  std::vector<HistoryEntry> history;
};

/// Evenly spread configurations. LP: the first K pairs of the lexicographic
/// grid {0°,45°,90°,135°}² (K <= 16). QWP: θ_Qg = k·180°/K and
/// θ_Qa = 5·θ_Qg mod 180°. LP_QWP has no uniform scheme. Throws
/// std::invalid_argument for LP_QWP, K < 1 or LP with K > 16.
MeasurementPlan uniform_plan(Condition condition, int captures);

/// Loss of one batch through the optics and classifier, with gradients
/// stored on `tape`. Returns the loss tensor.
ad::Tensor batch_loss(ad::Tape& tape, std::span<const ad::Var> angles, Condition condition,
                      double source_intensity, const ClassifierTensors& classifier, const Minibatch& batch);

/// Convenience: loss value only.
double batch_loss_value(const AnglePack& angles, const ClassifierParams& classifier, const Minibatch& batch);

/// Initial plan for a trial: uniform_plan for Uniform, U[0, π) angles from
/// `seed` otherwise.
MeasurementPlan initial_plan(Condition condition, Regime regime, int captures, std::uint64_t seed);

/// Runs config.steps Adam steps on minibatches of the dataset's train split.
/// Deterministic given `seed`.
TrainResult train(const Dataset& dataset, Condition condition, Regime regime, int captures,
                  std::uint64_t seed, const TrainConfig& config = {});

/// Same, starting from an explicit plan.
TrainResult train_from(const Dataset& dataset, const MeasurementPlan& initial, Regime regime,
                       std::uint64_t seed, const TrainConfig& config = {});

// ---------------------------------------------------------------------------

struct EvalResult {
  double accuracy = 0.0;
  int total = 0;
  std::array<std::array<int, kNumCategories>, kNumCategories> confusion{};  ///< [true][predicted]
};

struct EvalOptions {
  /// When > 0, every sample is also evaluated at object rotations jπ/n,
  /// j = 0..n-1, for a rotation-robustness report.
  int rotation_sweep = 0;
};

/// Throws std::invalid_argument on an empty sample set or when the
/// classifier input width differs from the plan size.
EvalResult evaluate(const ClassifierParams& classifier, const MeasurementPlan& plan,
                    std::span<const MaterialSample> samples, const EvalOptions& options = {});

EvalResult evaluate(const ClassifierParams& classifier, const MeasurementPlan& plan, const Dataset& dataset,
                    Split split, const EvalOptions& options = {});

// ---------------------------------------------------------------------------
// Checkpoint: {"plan": <plan JSON>, "classifier": {"widths": [...], "weights": [...]},
//              "history": [{"step": .., "loss": ..}, ...]}

std::string checkpoint_to_json(const TrainResult& result);
TrainResult checkpoint_from_json(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const TrainResult& result);
TrainResult load_checkpoint(const std::filesystem::path& path);

}  // namespace polopt
