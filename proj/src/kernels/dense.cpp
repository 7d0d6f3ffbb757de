#include "rdftune/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdftune::kernels {

void affine_batch_serial(const double* W, const double* bias, const double* X,
                         double* Y, int batch, int in_dim, int out_dim) {
  for (int b = 0; b < batch; ++b) {
    const double* x = X + static_cast<size_t>(b) * in_dim;
    double* y = Y + static_cast<size_t>(b) * out_dim;
    for (int o = 0; o < out_dim; ++o) {
      const double* w = W + static_cast<size_t>(o) * in_dim;
      double acc = bias[o];
      for (int i = 0; i < in_dim; ++i) acc += w[i] * x[i];
      y[o] = acc;
    }
  }
}

void affine_batch_parallel(const double* W, const double* bias, const double* X,
                           double* Y, int batch, int in_dim, int out_dim) {
#ifndef _OPENMP
  affine_batch_serial(W, bias, X, Y, batch, in_dim, out_dim);
#else
  const long long total = static_cast<long long>(batch) * out_dim;
#pragma omp parallel for schedule(static)
  for (long long t = 0; t < total; ++t) {
    int b = static_cast<int>(t / out_dim);
    int o = static_cast<int>(t % out_dim);
    const double* x = X + static_cast<size_t>(b) * in_dim;
    const double* w = W + static_cast<size_t>(o) * in_dim;
    double acc = bias[o];
    for (int i = 0; i < in_dim; ++i) acc += w[i] * x[i];
    Y[static_cast<size_t>(b) * out_dim + o] = acc;
  }
#endif
}

void affine_batch(const double* W, const double* bias, const double* X, double* Y,
                  int batch, int in_dim, int out_dim) {
  if (parallel_enabled())
    affine_batch_parallel(W, bias, X, Y, batch, in_dim, out_dim);
  else
    affine_batch_serial(W, bias, X, Y, batch, in_dim, out_dim);
}

void relu_serial(double* x, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (x[i] < 0) x[i] = 0;
}

void relu_parallel(double* x, size_t n) {
#ifndef _OPENMP
  relu_serial(x, n);
#else
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    if (x[i] < 0) x[i] = 0;
#endif
}

void relu(double* x, size_t n) {
  if (parallel_enabled())
    relu_parallel(x, n);
  else
    relu_serial(x, n);
}

void affine_grad_serial(const double* dY, const double* X, double* dW, double* db,
                        int batch, int in_dim, int out_dim) {
  for (int o = 0; o < out_dim; ++o) {
    double acc = 0;
    for (int b = 0; b < batch; ++b) acc += dY[static_cast<size_t>(b) * out_dim + o];
    db[o] = acc;
    double* dw = dW + static_cast<size_t>(o) * in_dim;
    for (int i = 0; i < in_dim; ++i) {
      double a = 0;
      for (int b = 0; b < batch; ++b)
        a += dY[static_cast<size_t>(b) * out_dim + o] * X[static_cast<size_t>(b) * in_dim + i];
      dw[i] = a;
    }
  }
}

void affine_grad_parallel(const double* dY, const double* X, double* dW,
                          double* db, int batch, int in_dim, int out_dim) {
#ifndef _OPENMP
  affine_grad_serial(dY, X, dW, db, batch, in_dim, out_dim);
#else
#pragma omp parallel for schedule(static)
  for (long long o = 0; o < out_dim; ++o) {
    double acc = 0;
    for (int b = 0; b < batch; ++b) acc += dY[static_cast<size_t>(b) * out_dim + o];
    db[o] = acc;
  }
  const long long total = static_cast<long long>(out_dim) * in_dim;
#pragma omp parallel for schedule(static)
  for (long long t = 0; t < total; ++t) {
    int o = static_cast<int>(t / in_dim);
    int i = static_cast<int>(t % in_dim);
    double a = 0;
    for (int b = 0; b < batch; ++b)
      a += dY[static_cast<size_t>(b) * out_dim + o] * X[static_cast<size_t>(b) * in_dim + i];
    dW[t] = a;
  }
#endif
}

void affine_grad(const double* dY, const double* X, double* dW, double* db,
                 int batch, int in_dim, int out_dim) {
  if (parallel_enabled())
    affine_grad_parallel(dY, X, dW, db, batch, in_dim, out_dim);
  else
    affine_grad_serial(dY, X, dW, db, batch, in_dim, out_dim);
}

void affine_backprop_serial(const double* W, const double* dY, double* dX,
                            int batch, int in_dim, int out_dim) {
  for (int b = 0; b < batch; ++b) {
    const double* dy = dY + static_cast<size_t>(b) * out_dim;
    double* dx = dX + static_cast<size_t>(b) * in_dim;
    for (int i = 0; i < in_dim; ++i) {
      double acc = 0;
      for (int o = 0; o < out_dim; ++o) acc += W[static_cast<size_t>(o) * in_dim + i] * dy[o];
      dx[i] = acc;
    }
  }
}

void affine_backprop_parallel(const double* W, const double* dY, double* dX,
                              int batch, int in_dim, int out_dim) {
#ifndef _OPENMP
  affine_backprop_serial(W, dY, dX, batch, in_dim, out_dim);
#else
  const long long total = static_cast<long long>(batch) * in_dim;
#pragma omp parallel for schedule(static)
  for (long long t = 0; t < total; ++t) {
    int b = static_cast<int>(t / in_dim);
    int i = static_cast<int>(t % in_dim);
    const double* dy = dY + static_cast<size_t>(b) * out_dim;
    double acc = 0;
    for (int o = 0; o < out_dim; ++o) acc += W[static_cast<size_t>(o) * in_dim + i] * dy[o];
    dX[t] = acc;
  }
#endif
}

void affine_backprop(const double* W, const double* dY, double* dX, int batch,
                     int in_dim, int out_dim) {
  if (parallel_enabled())
    affine_backprop_parallel(W, dY, dX, batch, in_dim, out_dim);
  else
    affine_backprop_serial(W, dY, dX, batch, in_dim, out_dim);
}

void relu_backprop_serial(const double* pre, const double* dY, double* dX, size_t n) {
  for (size_t i = 0; i < n; ++i) dX[i] = pre[i] > 0 ? dY[i] : 0.0;
}

void relu_backprop_parallel(const double* pre, const double* dY, double* dX, size_t n) {
#ifndef _OPENMP
  relu_backprop_serial(pre, dY, dX, n);
#else
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    dX[i] = pre[i] > 0 ? dY[i] : 0.0;
#endif
}

void relu_backprop(const double* pre, const double* dY, double* dX, size_t n) {
  if (parallel_enabled())
    relu_backprop_parallel(pre, dY, dX, n);
  else
    relu_backprop_serial(pre, dY, dX, n);
}

void axpy_update_serial(double* w, const double* g, double lr, size_t n) {
  for (size_t i = 0; i < n; ++i) w[i] -= lr * g[i];
}

void axpy_update_parallel(double* w, const double* g, double lr, size_t n) {
#ifndef _OPENMP
  axpy_update_serial(w, g, lr, n);
#else
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(n); ++i) w[i] -= lr * g[i];
#endif
}

void axpy_update(double* w, const double* g, double lr, size_t n) {
  if (parallel_enabled())
    axpy_update_parallel(w, g, lr, n);
  else
    axpy_update_serial(w, g, lr, n);
}

}  // namespace rdftune::kernels
