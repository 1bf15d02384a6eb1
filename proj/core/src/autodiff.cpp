#include "polopt/autodiff.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace polopt::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

Tape* tape_of(const Var& a, const Var& b) {
  Tape* t = a.is_constant() ? b.tape() : a.tape();
  assert(a.is_constant() || b.is_constant() || a.tape() == b.tape());
  return t;
}

}  // namespace

int Tape::push_scalar(double value, ScalarNode node) {
  const int idx = static_cast<int>(values_.size());
  values_.push_back(value);
  adjoints_.push_back(0.0);
  scalars_.push_back(node);
  order_.push_back(idx);
  return idx;
}

Var Tape::variable(double value) { return Var(this, push_scalar(value, {}), value); }

Var Tape::record(double value, const Var& a, double da) {
  if (a.is_constant()) return Var(value);
  ScalarNode node;
  node.parent[0] = a.index();
  node.partial[0] = da;
  return Var(this, push_scalar(value, node), value);
}

Var Tape::record(double value, const Var& a, double da, const Var& b, double db) {
  if (a.is_constant()) return record(value, b, db);
  if (b.is_constant()) return record(value, a, da);
  ScalarNode node;
  node.parent[0] = a.index();
  node.partial[0] = da;
  node.parent[1] = b.index();
  node.partial[1] = db;
  return Var(this, push_scalar(value, node), value);
}

Tensor Tape::leaf(int rows, int cols, std::vector<double> values) {
  return record_tensor(rows, cols, std::move(values), nullptr);
}

Tensor Tape::record_tensor(int rows, int cols, std::vector<double> values, Backward backward) {
  if (static_cast<int>(values.size()) != rows * cols)
    throw std::invalid_argument("tensor value size does not match its shape");
  const int id = static_cast<int>(tensors_.size());
  tensors_.push_back({rows, cols, std::move(values), {}, std::move(backward)});
  order_.push_back(~id);
  return {id, rows, cols};
}

std::span<const double> Tape::value(const Tensor& t) const { return tensors_.at(t.id).value; }

std::span<double> Tape::grad(const Tensor& t) {
  TensorNode& node = tensors_.at(t.id);
  if (node.grad.size() != node.value.size()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

double Tape::adjoint(const Var& v) const {
  if (v.is_constant()) return 0.0;
  return adjoints_.at(v.index());
}

void Tape::add_adjoint(const Var& v, double amount) {
  if (!v.is_constant()) adjoints_[v.index()] += amount;
}

void Tape::reset_adjoints() {
  std::fill(adjoints_.begin(), adjoints_.end(), 0.0);
  for (auto& t : tensors_) t.grad.assign(t.value.size(), 0.0);
}

void Tape::propagate() {
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    const int entry = *it;
    if (entry >= 0) {
      const double adj = adjoints_[entry];
      if (adj == 0.0) continue;
      const ScalarNode& node = scalars_[entry];
      for (int p = 0; p < 2; ++p)
        if (node.parent[p] >= 0) adjoints_[node.parent[p]] += node.partial[p] * adj;
    } else {
      TensorNode& node = tensors_[~entry];
      if (node.backward) node.backward(*this, Tensor{~entry, node.rows, node.cols});
    }
  }
}

void Tape::backward(const Var& loss) {
  reset_adjoints();
  if (loss.is_constant()) return;
  adjoints_[loss.index()] = 1.0;
  propagate();
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) throw std::invalid_argument("backward needs a 1x1 loss tensor");
  reset_adjoints();
  tensors_.at(loss.id).grad[0] = 1.0;
  propagate();
}

void Tape::clear() {
  values_.clear();
  adjoints_.clear();
  scalars_.clear();
  tensors_.clear();
  order_.clear();
}

Var operator+(const Var& a, const Var& b) {
  if (a.is_constant() && a.value() == 0.0) return b;
  if (b.is_constant() && b.value() == 0.0) return a;
  Tape* t = tape_of(a, b);
  const double v = a.value() + b.value();
  return t ? t->record(v, a, 1.0, b, 1.0) : Var(v);
}

Var operator-(const Var& a, const Var& b) {
  if (b.is_constant() && b.value() == 0.0) return a;
  Tape* t = tape_of(a, b);
  const double v = a.value() - b.value();
  return t ? t->record(v, a, 1.0, b, -1.0) : Var(v);
}

Var operator*(const Var& a, const Var& b) {
  // x·0 is identically zero, so its derivative vanishes as well.
  if ((a.is_constant() && a.value() == 0.0) || (b.is_constant() && b.value() == 0.0)) return Var(0.0);
  if (a.is_constant() && a.value() == 1.0) return b;
  if (b.is_constant() && b.value() == 1.0) return a;
  Tape* t = tape_of(a, b);
  const double v = a.value() * b.value();
  return t ? t->record(v, a, b.value(), b, a.value()) : Var(v);
}

Var operator/(const Var& a, const Var& b) {
  Tape* t = tape_of(a, b);
  const double v = a.value() / b.value();
  return t ? t->record(v, a, 1.0 / b.value(), b, -v / b.value()) : Var(v);
}

Var operator-(const Var& a) {
  return a.is_constant() ? Var(-a.value()) : a.tape()->record(-a.value(), a, -1.0);
}

Var sin(const Var& x) {
  const double v = std::sin(x.value());
  return x.is_constant() ? Var(v) : x.tape()->record(v, x, std::cos(x.value()));
}

Var cos(const Var& x) {
  const double v = std::cos(x.value());
  return x.is_constant() ? Var(v) : x.tape()->record(v, x, -std::sin(x.value()));
}

Var exp(const Var& x) {
  const double v = std::exp(x.value());
  return x.is_constant() ? Var(v) : x.tape()->record(v, x, v);
}

Var log(const Var& x) {
  const double v = std::log(x.value());
  return x.is_constant() ? Var(v) : x.tape()->record(v, x, 1.0 / x.value());
}

Tensor stack(Tape& tape, std::span<const Var> entries, int rows, int cols) {
  if (static_cast<int>(entries.size()) != rows * cols)
    throw std::invalid_argument("stack: entry count does not match shape");
  std::vector<double> values(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) values[i] = entries[i].value();
  return tape.record_tensor(rows, cols, std::move(values),
                            [inputs = std::vector<Var>(entries.begin(), entries.end())](Tape& t, const Tensor& self) {
                              const auto g = t.grad(self);
                              for (std::size_t i = 0; i < inputs.size(); ++i) t.add_adjoint(inputs[i], g[i]);
                            });
}

Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.cols != w.rows || b.rows != 1 || b.cols != w.cols)
    throw std::invalid_argument("linear: shape mismatch");
  std::vector<double> values(static_cast<std::size_t>(x.rows) * w.cols);
  MapMat y(values.data(), x.rows, w.cols);
  const auto xv = tape.value(x);
  const auto wv = tape.value(w);
  const auto bv = tape.value(b);
  y.noalias() = ConstMapMat(xv.data(), x.rows, x.cols) * ConstMapMat(wv.data(), w.rows, w.cols);
  y.rowwise() += ConstMapMat(bv.data(), 1, b.cols).row(0);
  return tape.record_tensor(x.rows, w.cols, std::move(values), [x, w, b](Tape& t, const Tensor& self) {
    const auto gy_span = t.grad(self);
    const ConstMapMat gy(gy_span.data(), self.rows, self.cols);
    const ConstMapMat xm(t.value(x).data(), x.rows, x.cols);
    const ConstMapMat wm(t.value(w).data(), w.rows, w.cols);
    MapMat gx(t.grad(x).data(), x.rows, x.cols);
    MapMat gw(t.grad(w).data(), w.rows, w.cols);
    MapMat gb(t.grad(b).data(), 1, b.cols);
    gx.noalias() += gy * wm.transpose();
    gw.noalias() += xm.transpose() * gy;
    gb += gy.colwise().sum();
  });
}

Tensor relu(Tape& tape, const Tensor& x) {
  const auto xv = tape.value(x);
  std::vector<double> values(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) values[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return tape.record_tensor(x.rows, x.cols, std::move(values), [x](Tape& t, const Tensor& self) {
    const auto gy = t.grad(self);
    const auto xv = t.value(x);
    auto gx = t.grad(x);
    for (std::size_t i = 0; i < gy.size(); ++i)
      if (xv[i] > 0.0) gx[i] += gy[i];
  });
}

Tensor weighted_cross_entropy(Tape& tape, const Tensor& logits, std::span<const int> labels,
                              std::span<const double> class_weights) {
  const int batch = logits.rows;
  const int classes = logits.cols;
  if (static_cast<int>(labels.size()) != batch || static_cast<int>(class_weights.size()) != classes)
    throw std::invalid_argument("weighted_cross_entropy: shape mismatch");

  const auto z = tape.value(logits);
  // Softmax probabilities are kept for the backward pass.
  std::vector<double> probs(z.size());
  double total = 0.0;
  double weight_sum = 0.0;
  for (int r = 0; r < batch; ++r) {
    const double* row = z.data() + static_cast<std::size_t>(r) * classes;
    const double zmax = *std::max_element(row, row + classes);
    double denom = 0.0;
    for (int c = 0; c < classes; ++c) denom += std::exp(row[c] - zmax);
    const double lse = zmax + std::log(denom);
    for (int c = 0; c < classes; ++c) probs[static_cast<std::size_t>(r) * classes + c] = std::exp(row[c] - lse);
    const double w = class_weights[labels[r]];
    total += w * (lse - row[labels[r]]);
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) throw std::invalid_argument("weighted_cross_entropy: zero total weight");

  std::vector<int> y(labels.begin(), labels.end());
  std::vector<double> cw(class_weights.begin(), class_weights.end());
  return tape.record_tensor(
      1, 1, {total / weight_sum},
      [logits, probs = std::move(probs), y = std::move(y), cw = std::move(cw), weight_sum](Tape& t,
                                                                                         const Tensor& self) {
        const double g = t.grad(self)[0];
        auto gz = t.grad(logits);
        const int classes = logits.cols;
        for (int r = 0; r < logits.rows; ++r) {
          const double scale = g * cw[y[r]] / weight_sum;
          if (scale == 0.0) continue;
          for (int c = 0; c < classes; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * classes + c;
            gz[i] += scale * (probs[i] - (c == y[r] ? 1.0 : 0.0));
          }
        }
      });
}

}  // namespace polopt::ad
