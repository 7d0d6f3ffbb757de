#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rdftune/common.hpp"

// Data-parallel inner loops of the engine and the network. Every kernel has a
// serial reference implementation and an OpenMP one; both produce identical
// output bit for bit, for any thread count, because each output element is
// owned by exactly one thread and reductions run in a fixed order.
namespace rdftune::kernels {

// 0 = serial reference, otherwise OpenMP with that many threads.
// Default: OpenMP with the runtime's thread count.
int threads();
void set_threads(int n);
bool parallel_enabled();

// ---- scan kernels -------------------------------------------------------

struct ScanPredicate {
  const TermId* col = nullptr;
  TermId value = kNoTerm;  // col[r] == value
};
struct ScanColEq {
  const TermId* a = nullptr;
  const TermId* b = nullptr;  // a[r] == b[r]
};

// Packed indices of rows satisfying all predicates, in row order.
std::vector<uint32_t> scan_filter_serial(size_t rows,
                                         std::span<const ScanPredicate> eq,
                                         std::span<const ScanColEq> col_eq);
std::vector<uint32_t> scan_filter_parallel(size_t rows,
                                           std::span<const ScanPredicate> eq,
                                           std::span<const ScanColEq> col_eq);
std::vector<uint32_t> scan_filter(size_t rows, std::span<const ScanPredicate> eq,
                                  std::span<const ScanColEq> col_eq);

// out[i] = col[idx[i]]
void gather_serial(const TermId* col, std::span<const uint32_t> idx, TermId* out);
void gather_parallel(const TermId* col, std::span<const uint32_t> idx, TermId* out);
void gather(const TermId* col, std::span<const uint32_t> idx, TermId* out);

// ---- hash join ----------------------------------------------------------

// Equi-join of two key sequences. Keys are pre-mixed 64-bit digests of the
// join columns; `build_vals`/`probe_vals` hold the underlying column values
// (one row per key, `arity` values each) and are compared on digest match,
// so digest collisions cannot produce wrong pairs.
struct JoinPairs {
  std::vector<uint32_t> build_rows;
  std::vector<uint32_t> probe_rows;
};

JoinPairs hash_join_serial(std::span<const uint64_t> build_keys,
                           std::span<const uint64_t> probe_keys,
                           std::span<const TermId> build_vals,
                           std::span<const TermId> probe_vals, size_t arity);
JoinPairs hash_join_parallel(std::span<const uint64_t> build_keys,
                             std::span<const uint64_t> probe_keys,
                             std::span<const TermId> build_vals,
                             std::span<const TermId> probe_vals, size_t arity);
JoinPairs hash_join(std::span<const uint64_t> build_keys,
                    std::span<const uint64_t> probe_keys,
                    std::span<const TermId> build_vals,
                    std::span<const TermId> probe_vals, size_t arity);

// ---- dense ops (double precision, row-major) ----------------------------

// y[b] = W x[b] + bias for each of the `batch` rows of X.
void affine_batch_serial(const double* W, const double* bias, const double* X,
                         double* Y, int batch, int in_dim, int out_dim);
void affine_batch_parallel(const double* W, const double* bias, const double* X,
                           double* Y, int batch, int in_dim, int out_dim);
void affine_batch(const double* W, const double* bias, const double* X, double* Y,
                  int batch, int in_dim, int out_dim);

void relu_serial(double* x, size_t n);
void relu_parallel(double* x, size_t n);
void relu(double* x, size_t n);

// dW[o][i] = sum_b dY[b][o] * X[b][i]; db[o] = sum_b dY[b][o]
void affine_grad_serial(const double* dY, const double* X, double* dW, double* db,
                        int batch, int in_dim, int out_dim);
void affine_grad_parallel(const double* dY, const double* X, double* dW,
                          double* db, int batch, int in_dim, int out_dim);
void affine_grad(const double* dY, const double* X, double* dW, double* db,
                 int batch, int in_dim, int out_dim);

// dX[b][i] = sum_o W[o][i] * dY[b][o]
void affine_backprop_serial(const double* W, const double* dY, double* dX,
                            int batch, int in_dim, int out_dim);
void affine_backprop_parallel(const double* W, const double* dY, double* dX,
                              int batch, int in_dim, int out_dim);
void affine_backprop(const double* W, const double* dY, double* dX, int batch,
                     int in_dim, int out_dim);

// dX[b][i] = pre[b][i] > 0 ? dY[b][i] : 0
void relu_backprop_serial(const double* pre, const double* dY, double* dX, size_t n);
void relu_backprop_parallel(const double* pre, const double* dY, double* dX, size_t n);
void relu_backprop(const double* pre, const double* dY, double* dX, size_t n);

// w[i] -= lr * g[i]
void axpy_update_serial(double* w, const double* g, double lr, size_t n);
void axpy_update_parallel(double* w, const double* g, double lr, size_t n);
void axpy_update(double* w, const double* g, double lr, size_t n);

}  // namespace rdftune::kernels
