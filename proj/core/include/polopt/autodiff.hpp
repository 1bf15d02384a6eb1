#pragma once

// Reverse-mode automatic differentiation.
//
// The tape records two kinds of nodes in creation order:
//   * scalar nodes: a value, an adjoint, and up to two (parent, ∂/∂parent)
//     pairs. These carry the optics (angles → element matrices → intensity).
//   * tensor nodes: a dense row-major block with a backward callback. These
//     carry the classifier as fused matrix ops.
// backward() walks the combined record in reverse, so gradients flow from a
// tensor loss through the classifier into scalar angle parameters.
//
// A Var constructed from a double is a constant: it is not on any tape, and
// arithmetic between constants folds without recording.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace polopt::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(double constant) : value_(constant) {}  // NOLINT(google-explicit-constructor)

  double value() const { return value_; }
  bool is_constant() const { return tape_ == nullptr; }
  Tape* tape() const { return tape_; }
  int index() const { return index_; }

 private:
  friend class Tape;
  Var(Tape* tape, int index, double value) : tape_(tape), index_(index), value_(value) {}

  Tape* tape_ = nullptr;
  int index_ = -1;
  double value_ = 0.0;
};

struct Tensor {
  int id = -1;
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& self)>;

  /// New independent scalar.
  Var variable(double value);

  /// Scalar node with one or two parents. Constant parents are dropped.
  Var record(double value, const Var& a, double da);
  Var record(double value, const Var& a, double da, const Var& b, double db);

  /// Independent tensor (e.g. a weight matrix).
  Tensor leaf(int rows, int cols, std::vector<double> values);

  /// Derived tensor; `backward` reads grad(self) and accumulates into the
  /// gradients of its inputs.
  Tensor record_tensor(int rows, int cols, std::vector<double> values, Backward backward);

  std::span<const double> value(const Tensor& t) const;
  std::span<double> grad(const Tensor& t);
  double adjoint(const Var& v) const;
  /// Accumulate into a scalar's adjoint from inside a tensor backward.
  void add_adjoint(const Var& v, double amount);

  /// Seeds d(loss)/d(loss) = 1 and propagates to every recorded node.
  void backward(const Var& loss);
  /// `loss` must be 1×1.
  void backward(const Tensor& loss);

  void clear();
  std::size_t num_scalars() const { return values_.size(); }
  std::size_t num_tensors() const { return tensors_.size(); }

 private:
  struct ScalarNode {
    int parent[2] = {-1, -1};
    double partial[2] = {0.0, 0.0};
  };
  struct TensorNode {
    int rows = 0;
    int cols = 0;
    std::vector<double> value;
    std::vector<double> grad;
    Backward backward;
  };

  int push_scalar(double value, ScalarNode node);
  void reset_adjoints();
  void propagate();

  std::vector<double> values_;
  std::vector<double> adjoints_;
  std::vector<ScalarNode> scalars_;
  std::vector<TensorNode> tensors_;
  // Creation order: i >= 0 is scalar i, i < 0 is tensor ~i.
  std::vector<int> order_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator/(const Var& a, const Var& b);
Var operator-(const Var& a);

Var sin(const Var& x);
Var cos(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);

// ---------------------------------------------------------------------------
// Fused tensor ops.

/// Row-major rows×cols tensor from scalars; gradients flow back to them.
Tensor stack(Tape& tape, std::span<const Var> entries, int rows, int cols);

/// x·w + b with x: B×in, w: in×out, b: 1×out.
Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b);

Tensor relu(Tape& tape, const Tensor& x);

/// Σ_b w[y_b]·(logsumexp(z_b) − z_b[y_b]) / Σ_b w[y_b]  over the rows of
/// `logits`. Returns a 1×1 tensor.
Tensor weighted_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels,
                              std::span<const double> class_weights);

}  // namespace polopt::ad
