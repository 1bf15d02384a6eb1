#pragma once

#include <span>
#include <vector>

namespace polopt {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed-size parameter block.
class Adam {
 public:
  Adam(std::size_t size, AdamConfig config = {});

  /// params -= lr · m̂ / (√v̂ + ε). Throws std::invalid_argument on size mismatch.
  void step(std::span<double> params, std::span<const double> grads);

  const AdamConfig& config() const { return config_; }
  long steps() const { return t_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

}  // namespace polopt
