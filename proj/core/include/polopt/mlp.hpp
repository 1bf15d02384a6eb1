#pragma once

// Material classifier: C_in → 64 → 32 → 32 → 16 → C_out, ReLU after every
// hidden layer, linear output.

#include <array>
#include <span>
#include <vector>

#include "polopt/autodiff.hpp"
#include "polopt/random.hpp"

namespace polopt {

inline constexpr std::array<int, 4> kHiddenWidths = {64, 32, 32, 16};

struct ClassifierParams {
  std::vector<int> widths;     ///< C_in, hidden..., C_out
  std::vector<double> weights; ///< per layer: W (in×out, row-major) then b (out)

  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
  int num_layers() const { return static_cast<int>(widths.size()) - 1; }

  /// Offset of layer l's weight block in `weights`; its bias follows it.
  std::size_t weight_offset(int layer) const;
  std::size_t bias_offset(int layer) const;
};

/// Parameter count for a width list.
std::size_t parameter_count(std::span<const int> widths);

/// Zero-initialized parameters with the standard hidden widths.
ClassifierParams make_classifier(int input_width, int output_width);

/// Weights and biases ~ U(−1/√fan_in, 1/√fan_in).
ClassifierParams init_classifier(int input_width, int output_width, Rng& rng);

/// Plain forward pass. Throws std::invalid_argument on width mismatch.
std::vector<double> mlp_forward(const ClassifierParams& params, std::span<const double> x);

int argmax(std::span<const double> values);

/// w[label] · (logsumexp(z) − z[label]).
double weighted_cross_entropy(std::span<const double> logits, int label,
                              std::span<const double> class_weights);

/// Classifier weights registered on a tape: one (W, b) tensor pair per layer.
struct ClassifierTensors {
  std::vector<ad::Tensor> w;
  std::vector<ad::Tensor> b;
};

ClassifierTensors register_classifier(ad::Tape& tape, const ClassifierParams& params);

/// Batched tape forward pass; x is B×C_in.
ad::Tensor mlp_forward(ad::Tape& tape, const ClassifierTensors& layers, const ad::Tensor& x);

/// Gradient of every entry of params.weights, read back after backward().
std::vector<double> gather_gradients(ad::Tape& tape, const ClassifierTensors& layers,
                                     const ClassifierParams& params);

}  // namespace polopt
