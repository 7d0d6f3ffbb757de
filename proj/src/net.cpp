#include "rdftune/net.hpp"

#include <cmath>
#include <stdexcept>

#include "rdftune/kernels.hpp"

namespace rdftune {

QNetwork::QNetwork(std::vector<int> dims, Rng& rng) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw ValidationError("network needs at least two dims");
  for (int d : dims_)
    if (d <= 0) throw ValidationError("network dims must be positive");
  size_t n = dims_.size() - 1;
  W_.resize(n);
  b_.resize(n);
  for (size_t l = 0; l < n; l++) {
    int in = dims_[l], out = dims_[l + 1];
    double bound = std::sqrt(6.0 / (in + out));
    W_[l].resize(static_cast<size_t>(out) * in);
    for (double& w : W_[l]) w = rng.uniform(-bound, bound);
    b_[l].assign(static_cast<size_t>(out), 0.0);
  }
}

std::vector<double> QNetwork::forward(std::span<const double> x) const {
  return forward_batch(x, 1, nullptr);
}

std::vector<double> QNetwork::forward_batch(std::span<const double> X, int batch,
                                            Tape* tape) const {
  if (batch <= 0) throw ValidationError("forward_batch: batch must be positive");
  if (X.size() != static_cast<size_t>(batch) * dims_[0])
    throw ValidationError("forward_batch: input size mismatch");
  std::vector<double> cur(X.begin(), X.end());
  if (tape) {
    tape->batch = batch;
    tape->acts.assign(1, cur);
    tape->pre.clear();
  }
  for (size_t l = 0; l < W_.size(); l++) {
    int in = dims_[l], out = dims_[l + 1];
    std::vector<double> next(static_cast<size_t>(batch) * out);
    kernels::affine_batch(W_[l].data(), b_[l].data(), cur.data(), next.data(),
                          batch, in, out);
    bool hidden = l + 1 < W_.size();
    if (hidden) {
      if (tape) tape->pre.push_back(next);
      kernels::relu(next.data(), next.size());
    }
    if (tape) tape->acts.push_back(next);
    cur = std::move(next);
  }
  return cur;
}

QNetwork::Grads QNetwork::zero_grads() const {
  Grads g;
  g.dW.resize(W_.size());
  g.db.resize(b_.size());
  for (size_t l = 0; l < W_.size(); l++) {
    g.dW[l].assign(W_[l].size(), 0.0);
    g.db[l].assign(b_[l].size(), 0.0);
  }
  return g;
}

void QNetwork::backward(const Tape& tape, std::span<const double> dY,
                        Grads& g) const {
  if (tape.acts.size() != W_.size() + 1)
    throw ValidationError("backward: tape does not match network");
  if (dY.size() != static_cast<size_t>(tape.batch) * dims_.back())
    throw ValidationError("backward: output gradient size mismatch");
  if (g.dW.size() != W_.size()) g = zero_grads();
  int batch = tape.batch;
  std::vector<double> dz(dY.begin(), dY.end());
  for (size_t l = W_.size(); l-- > 0;) {
    int in = dims_[l], out = dims_[l + 1];
    // affine_grad overwrites dW/db, one call per layer
    kernels::affine_grad(dz.data(), tape.acts[l].data(), g.dW[l].data(),
                         g.db[l].data(), batch, in, out);
    if (l == 0) break;
    std::vector<double> dx(static_cast<size_t>(batch) * in);
    kernels::affine_backprop(W_[l].data(), dz.data(), dx.data(), batch, in, out);
    kernels::relu_backprop(tape.pre[l - 1].data(), dx.data(), dx.data(), dx.size());
    dz = std::move(dx);
  }
}

void QNetwork::apply_sgd(const Grads& g, double lr) {
  for (size_t l = 0; l < W_.size(); l++) {
    kernels::axpy_update(W_[l].data(), g.dW[l].data(), lr, W_[l].size());
    kernels::axpy_update(b_[l].data(), g.db[l].data(), lr, b_[l].size());
  }
}

size_t QNetwork::param_count() const {
  size_t n = 0;
  for (size_t l = 0; l < W_.size(); l++) n += W_[l].size() + b_[l].size();
  return n;
}

namespace {
// Locates flat parameter i within per-layer W/b blocks.
template <class Store>
double* locate(Store& W, Store& b, size_t i) {
  for (size_t l = 0; l < W.size(); l++) {
    if (i < W[l].size()) return &W[l][i];
    i -= W[l].size();
    if (i < b[l].size()) return &b[l][i];
    i -= b[l].size();
  }
  throw ValidationError("parameter index out of range");
}
}  // namespace

double QNetwork::get_param(size_t i) const {
  return *locate(const_cast<std::vector<std::vector<double>>&>(W_),
                 const_cast<std::vector<std::vector<double>>&>(b_), i);
}

void QNetwork::set_param(size_t i, double v) { *locate(W_, b_, i) = v; }

double QNetwork::grad_param(const Grads& g, size_t i) {
  return *locate(const_cast<std::vector<std::vector<double>>&>(g.dW),
                 const_cast<std::vector<std::vector<double>>&>(g.db), i);
}

nlohmann::json QNetwork::to_json() const {
  return {{"dims", dims_}, {"W", W_}, {"b", b_}};
}

QNetwork QNetwork::from_json(const nlohmann::json& j) {
  QNetwork n;
  j.at("dims").get_to(n.dims_);
  j.at("W").get_to(n.W_);
  j.at("b").get_to(n.b_);
  if (n.dims_.size() < 2 || n.W_.size() != n.dims_.size() - 1 ||
      n.b_.size() != n.W_.size())
    throw ValidationError("malformed network payload");
  for (size_t l = 0; l < n.W_.size(); l++) {
    size_t in = static_cast<size_t>(n.dims_[l]);
    size_t out = static_cast<size_t>(n.dims_[l + 1]);
    if (n.W_[l].size() != in * out || n.b_[l].size() != out)
      throw ValidationError("malformed network payload");
  }
  return n;
}

}  // namespace rdftune
