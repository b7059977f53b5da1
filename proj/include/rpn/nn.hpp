#pragma once
// Dense networks with hand-written reverse mode, losses, Adam and
// finite-difference gradient checks. Templated on the scalar so that training
// runs in float and gradient checks in double.

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpn/random.hpp"

namespace rpn::nn {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class NnErrc { ShapeMismatch, NonFiniteLoss, CorruptCheckpoint, VersionMismatch, IoError };

class NnError : public std::runtime_error {
 public:
  NnError(NnErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  NnErrc code() const { return code_; }

 private:
  NnErrc code_;
};

// A parameter tensor and its gradient accumulator.
template <class T>
struct Param {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;
};

template <class T>
using ParamRefs = std::vector<Param<T>*>;

// Affine layers with rectifier hidden activations. The last layer is linear
// unless relu_out is set.
template <class T>
class Mlp {
 public:
  struct Cache {
    std::vector<Matrix<T>> act;  // act[0] = input, act[i] = output of layer i
  };

  Mlp() = default;
  Mlp(std::string name, std::vector<int> sizes, bool relu_out = false)
      : name_(std::move(name)), sizes_(std::move(sizes)), relu_out_(relu_out) {
    if (sizes_.size() < 2) throw NnError(NnErrc::ShapeMismatch, "Mlp needs at least input and output sizes");
    for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
      const std::string p = name_ + "." + std::to_string(i);
      w_.push_back({p + ".W", Matrix<T>::Zero(sizes_[i], sizes_[i + 1]), Matrix<T>::Zero(sizes_[i], sizes_[i + 1])});
      b_.push_back({p + ".b", Matrix<T>::Zero(1, sizes_[i + 1]), Matrix<T>::Zero(1, sizes_[i + 1])});
    }
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int in() const { return sizes_.front(); }
  int out() const { return sizes_.back(); }
  bool relu_out() const { return relu_out_; }
  std::size_t layers() const { return w_.size(); }
  Param<T>& weight(std::size_t i) { return w_[i]; }
  Param<T>& bias(std::size_t i) { return b_[i]; }

  // Fan-in scaled uniform initialization.
  void init(Rng& rng) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
      const double a = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
      for (Eigen::Index i = 0; i < w_[l].value.size(); ++i) w_[l].value.data()[i] = static_cast<T>(rng.uniform(-a, a));
      for (Eigen::Index i = 0; i < b_[l].value.size(); ++i) b_[l].value.data()[i] = static_cast<T>(rng.uniform(-a, a));
    }
  }

  Matrix<T> forward(const Matrix<T>& x, Cache* cache = nullptr) const {
    if (x.cols() != in()) throw NnError(NnErrc::ShapeMismatch, name_ + ": input width " + std::to_string(x.cols()));
    if (cache) {
      cache->act.resize(w_.size() + 1);
      cache->act[0] = x;
    }
    Matrix<T> h = x;
    for (std::size_t l = 0; l < w_.size(); ++l) {
      Matrix<T> z = h * w_[l].value;
      z.rowwise() += b_[l].value.row(0);
      if (l + 1 < w_.size() || relu_out_) z = z.cwiseMax(T(0));
      if (cache) cache->act[l + 1] = z;
      h = std::move(z);
    }
    return h;
  }

  // Accumulates parameter gradients; returns d(loss)/d(input) when need_dx.
  Matrix<T> backward(const Cache& cache, const Matrix<T>& dy, bool need_dx = true) {
    Matrix<T> d = dy;
    for (std::size_t l = w_.size(); l-- > 0;) {
      if (l + 1 < w_.size() || relu_out_) d = (cache.act[l + 1].array() > T(0)).select(d, T(0));
      w_[l].grad.noalias() += cache.act[l].transpose() * d;
      b_[l].grad += d.colwise().sum();
      if (l == 0 && !need_dx) return {};
      d = d * w_[l].value.transpose();
    }
    return d;
  }

  void collect(ParamRefs<T>& out) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
      out.push_back(&w_[l]);
      out.push_back(&b_[l]);
    }
  }

  template <class U>
  Mlp<U> cast() const {
    Mlp<U> m(name_, sizes_, relu_out_);
    for (std::size_t l = 0; l < w_.size(); ++l) {
      m.weight(l).value = w_[l].value.template cast<U>();
      m.bias(l).value = b_[l].value.template cast<U>();
    }
    return m;
  }

 private:
  std::string name_;
  std::vector<int> sizes_;
  bool relu_out_ = false;
  std::vector<Param<T>> w_, b_;
};

template <class T>
void zero_grad(const ParamRefs<T>& ps) {
  for (auto* p : ps) p->grad.setZero();
}

// ---------------------------------------------------------------------------
// Losses: mean over rows; the returned gradient is with respect to the logits.

template <class T>
T sigmoid(T z) {
  return z >= T(0) ? T(1) / (T(1) + std::exp(-z)) : std::exp(z) / (T(1) + std::exp(z));
}

template <class T>
struct LossGrad {
  T loss = T(0);
  Matrix<T> grad;
};

template <class T>
void check_finite(T loss) {
  if (!std::isfinite(static_cast<double>(loss))) throw NnError(NnErrc::NonFiniteLoss, "non-finite loss");
}

template <class T>
LossGrad<T> bce_with_logits(const Matrix<T>& z, const std::vector<T>& y) {
  if (z.cols() != 1 || static_cast<std::size_t>(z.rows()) != y.size())
    throw NnError(NnErrc::ShapeMismatch, "bce: logits must be n x 1");
  LossGrad<T> r{T(0), Matrix<T>(z.rows(), 1)};
  const T n = static_cast<T>(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const T v = z(i, 0);
    r.loss += std::max(v, T(0)) - v * y[i] + std::log1p(std::exp(-std::abs(v)));
    r.grad(i, 0) = (sigmoid(v) - y[i]) / n;
  }
  r.loss /= n;
  check_finite(r.loss);
  return r;
}

// Softmax cross-entropy per row; labels index the class column.
template <class T>
LossGrad<T> cross_entropy(const Matrix<T>& z, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(z.rows()) != labels.size()) throw NnError(NnErrc::ShapeMismatch, "ce: label count");
  LossGrad<T> r{T(0), Matrix<T>(z.rows(), z.cols())};
  const T n = static_cast<T>(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const T m = z.row(i).maxCoeff();
    const auto e = (z.row(i).array() - m).exp();
    const T s = e.sum();
    r.loss += std::log(s) + m - z(i, labels[i]);
    r.grad.row(i) = e / (s * n);
    r.grad(i, labels[i]) -= T(1) / n;
  }
  r.loss /= n;
  check_finite(r.loss);
  return r;
}

template <class T>
LossGrad<T> squared_error(const Matrix<T>& z, const Matrix<T>& y) {
  if (z.rows() != y.rows() || z.cols() != y.cols()) throw NnError(NnErrc::ShapeMismatch, "mse: shape");
  const T n = static_cast<T>(z.rows());
  LossGrad<T> r{T(0.5) * (z - y).squaredNorm() / n, (z - y) / n};
  check_finite(r.loss);
  return r;
}

// ---------------------------------------------------------------------------

template <class T>
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Matrix<T>> m, v;
};

template <class T>
void adam_step(AdamState<T>& st, const ParamRefs<T>& ps) {
  if (st.m.empty()) {
    for (auto* p : ps) {
      st.m.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
      st.v.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (st.m.size() != ps.size()) throw NnError(NnErrc::ShapeMismatch, "adam: parameter count changed");
  ++st.step;
  const T b1 = static_cast<T>(st.beta1), b2 = static_cast<T>(st.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(st.beta1, static_cast<double>(st.step)));
  const T c2 = static_cast<T>(1.0 - std::pow(st.beta2, static_cast<double>(st.step)));
  const T lr = static_cast<T>(st.lr), eps = static_cast<T>(st.eps);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& p = *ps[i];
    if (p.grad.rows() != st.m[i].rows() || p.grad.cols() != st.m[i].cols())
      throw NnError(NnErrc::ShapeMismatch, "adam: shape of " + p.name);
    st.m[i] = b1 * st.m[i] + (T(1) - b1) * p.grad;
    st.v[i] = b2 * st.v[i] + (T(1) - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (st.m[i].array() / c1) / ((st.v[i].array() / c2).sqrt() + eps);
  }
}

// ---------------------------------------------------------------------------
// Central finite differences over every parameter. `loss` recomputes the
// scalar loss from the current parameter values; `analytic` fills grads.
// Relative error |a - n| / max(|a|, |n|, floor).

inline constexpr double kGradcheckFloor = 1e-6;

inline double gradcheck(const ParamRefs<double>& ps, const std::function<double()>& loss,
                        const std::function<void()>& analytic, double h = 1e-5) {
  zero_grad(ps);
  analytic();
  double worst = 0.0;
  for (auto* p : ps) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double& w = p->value.data()[i];
      const double saved = w;
      w = saved + h;
      const double up = loss();
      w = saved - h;
      const double down = loss();
      w = saved;
      const double num = (up - down) / (2 * h);
      const double a = p->grad.data()[i];
      const double rel = std::abs(a - num) / std::max({std::abs(a), std::abs(num), kGradcheckFloor});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Numeric text: hexfloat for checkpoints (bit-exact), shortest round-trip
// decimal for datasets.

inline std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_hexfloat(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw NnError(NnErrc::CorruptCheckpoint, "bad number '" + s + "'");
  return v;
}

template <class T>
void write_tensor(std::ostream& os, const std::string& name, const Matrix<T>& m) {
  os << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.size(); ++i) os << (i ? " " : "") << hexfloat(static_cast<double>(m.data()[i]));
  os << '\n';
}

template <class T>
void read_tensor(std::istream& is, const std::string& name, Matrix<T>& m) {
  std::string tag, got;
  Eigen::Index r = 0, c = 0;
  if (!(is >> tag >> got >> r >> c) || tag != "tensor")
    throw NnError(NnErrc::CorruptCheckpoint, "expected tensor " + name);
  if (got != name || r != m.rows() || c != m.cols())
    throw NnError(NnErrc::ShapeMismatch, "tensor " + got + " does not match " + name);
  std::string tok;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!(is >> tok)) throw NnError(NnErrc::CorruptCheckpoint, "truncated tensor " + name);
    m.data()[i] = static_cast<T>(parse_hexfloat(tok));
  }
}

}  // namespace rpn::nn
