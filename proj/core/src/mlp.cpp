#include "polopt/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace polopt {

std::size_t parameter_count(std::span<const int> widths) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l)
    n += static_cast<std::size_t>(widths[l]) * widths[l + 1] + widths[l + 1];
  return n;
}

std::size_t ClassifierParams::weight_offset(int layer) const {
  return parameter_count(std::span<const int>(widths.data(), static_cast<std::size_t>(layer) + 1));
}

std::size_t ClassifierParams::bias_offset(int layer) const {
  return weight_offset(layer) + static_cast<std::size_t>(widths[layer]) * widths[layer + 1];
}

ClassifierParams make_classifier(int input_width, int output_width) {
  if (input_width < 1 || output_width < 1) throw std::invalid_argument("classifier widths must be >= 1");
  ClassifierParams p;
  p.widths.push_back(input_width);
  p.widths.insert(p.widths.end(), kHiddenWidths.begin(), kHiddenWidths.end());
  p.widths.push_back(output_width);
  p.weights.assign(parameter_count(p.widths), 0.0);
  return p;
}

ClassifierParams init_classifier(int input_width, int output_width, Rng& rng) {
  ClassifierParams p = make_classifier(input_width, output_width);
  for (int l = 0; l < p.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.widths[l]));
    const std::size_t begin = p.weight_offset(l);
    const std::size_t end = p.bias_offset(l) + p.widths[l + 1];
    for (std::size_t i = begin; i < end; ++i) p.weights[i] = uniform(rng, -bound, bound);
  }
  return p;
}

std::vector<double> mlp_forward(const ClassifierParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.input_width())
    throw std::invalid_argument("classifier expects " + std::to_string(params.input_width()) +
                                " inputs, got " + std::to_string(x.size()));
  std::vector<double> act(x.begin(), x.end());
  for (int l = 0; l < params.num_layers(); ++l) {
    const int in = params.widths[l];
    const int out = params.widths[l + 1];
    const double* w = params.weights.data() + params.weight_offset(l);
    const double* b = params.weights.data() + params.bias_offset(l);
    std::vector<double> next(b, b + out);
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j) next[j] += act[i] * w[static_cast<std::size_t>(i) * out + j];
    if (l + 1 < params.num_layers())
      for (double& v : next) v = std::max(v, 0.0);
    act = std::move(next);
  }
  return act;
}

int argmax(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

double weighted_cross_entropy(std::span<const double> logits, int label,
                              std::span<const double> class_weights) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z - zmax);
  return class_weights[label] * (zmax + std::log(denom) - logits[label]);
}

ClassifierTensors register_classifier(ad::Tape& tape, const ClassifierParams& params) {
  ClassifierTensors out;
  for (int l = 0; l < params.num_layers(); ++l) {
    const int in = params.widths[l];
    const int n_out = params.widths[l + 1];
    const auto w_begin = params.weights.begin() + static_cast<std::ptrdiff_t>(params.weight_offset(l));
    const auto b_begin = params.weights.begin() + static_cast<std::ptrdiff_t>(params.bias_offset(l));
    out.w.push_back(tape.leaf(in, n_out, std::vector<double>(w_begin, w_begin + in * n_out)));
    out.b.push_back(tape.leaf(1, n_out, std::vector<double>(b_begin, b_begin + n_out)));
  }
  return out;
}

ad::Tensor mlp_forward(ad::Tape& tape, const ClassifierTensors& layers, const ad::Tensor& x) {
  ad::Tensor act = x;
  const std::size_t n = layers.w.size();
  for (std::size_t l = 0; l < n; ++l) {
    act = ad::linear(tape, act, layers.w[l], layers.b[l]);
    if (l + 1 < n) act = ad::relu(tape, act);
  }
  return act;
}

std::vector<double> gather_gradients(ad::Tape& tape, const ClassifierTensors& layers,
                                     const ClassifierParams& params) {
  std::vector<double> g(params.weights.size());
  for (int l = 0; l < params.num_layers(); ++l) {
    const auto gw = tape.grad(layers.w[l]);
    const auto gb = tape.grad(layers.b[l]);
    std::copy(gw.begin(), gw.end(), g.begin() + static_cast<std::ptrdiff_t>(params.weight_offset(l)));
    std::copy(gb.begin(), gb.end(), g.begin() + static_cast<std::ptrdiff_t>(params.bias_offset(l)));
  }
  return g;
}

}  // namespace polopt
