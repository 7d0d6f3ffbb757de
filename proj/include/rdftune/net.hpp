#pragma once

#include <span>
#include <vector>

#include "rdftune/common.hpp"

#include "json.hpp"

namespace rdftune {

// Fully connected net: rectifier on hidden layers, identity output. Double
// precision throughout; all dense work goes through the deterministic
// kernels, so results are identical at any thread count.
class QNetwork {
 public:
  QNetwork() = default;
  QNetwork(std::vector<int> dims, Rng& rng);  // dims = [in, hidden..., out]

  const std::vector<int>& dims() const { return dims_; }
  size_t layers() const { return W_.size(); }

  std::vector<double> forward(std::span<const double> x) const;

  struct Tape {
    int batch = 0;
    std::vector<std::vector<double>> acts;  // acts[0] = X, acts[l+1] = layer l output
    std::vector<std::vector<double>> pre;   // pre-rectifier values per hidden layer
  };
  // X is batch rows of dims()[0]; returns batch rows of dims().back()
  std::vector<double> forward_batch(std::span<const double> X, int batch,
                                    Tape* tape) const;

  struct Grads {
    std::vector<std::vector<double>> dW, db;
  };
  Grads zero_grads() const;
  // dY: batch-major gradient at the output; fills g (overwrites)
  void backward(const Tape& tape, std::span<const double> dY, Grads& g) const;
  void apply_sgd(const Grads& g, double lr);

  // flat parameter view (layer by layer: W then b) for finite-difference tests
  size_t param_count() const;
  double get_param(size_t i) const;
  void set_param(size_t i, double v);
  static double grad_param(const Grads& g, size_t i);

  nlohmann::json to_json() const;
  static QNetwork from_json(const nlohmann::json& j);

  bool operator==(const QNetwork&) const = default;

 private:
  std::vector<int> dims_;
  std::vector<std::vector<double>> W_;  // [l]: out*in, row-major
  std::vector<std::vector<double>> b_;  // [l]: out
};

}  // namespace rdftune
