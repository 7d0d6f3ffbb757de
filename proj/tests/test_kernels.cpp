#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <vector>

#include "rdftune/common.hpp"
#include "rdftune/kernels.hpp"

using namespace rdftune;

namespace {

struct ThreadGuard {
  int saved;
  explicit ThreadGuard(int n) : saved(kernels::threads()) {
    kernels::set_threads(n);
  }
  ~ThreadGuard() { kernels::set_threads(saved); }
};

std::vector<TermId> random_col(Rng& rng, size_t n, uint32_t card) {
  std::vector<TermId> v(n);
  for (auto& x : v) x = rng.below(card);
  return v;
}

}  // namespace

TEST_CASE("scan_filter matches a plain loop and both implementations agree") {
  Rng rng(1);
  for (int iter = 0; iter < 30; iter++) {
    size_t n = rng.below(2000);
    auto a = random_col(rng, n, 10);
    auto b = random_col(rng, n, 10);
    kernels::ScanPredicate eq{a.data(), rng.below(12)};  // sometimes no match
    kernels::ScanColEq ce{a.data(), b.data()};
    bool use_eq = rng.below(2), use_ce = rng.below(2);
    std::span<const kernels::ScanPredicate> eqs(&eq, use_eq ? 1 : 0);
    std::span<const kernels::ScanColEq> ces(&ce, use_ce ? 1 : 0);

    std::vector<uint32_t> expect;
    for (size_t r = 0; r < n; r++) {
      if (use_eq && a[r] != eq.value) continue;
      if (use_ce && a[r] != b[r]) continue;
      expect.push_back(static_cast<uint32_t>(r));
    }
    CHECK(kernels::scan_filter_serial(n, eqs, ces) == expect);
    CHECK(kernels::scan_filter_parallel(n, eqs, ces) == expect);
  }
}

TEST_CASE("gather both implementations agree with direct indexing") {
  Rng rng(2);
  auto col = random_col(rng, 500, 1000);
  std::vector<uint32_t> idx;
  for (int i = 0; i < 200; i++) idx.push_back(rng.below(500));
  std::vector<TermId> s(idx.size()), p(idx.size()), expect(idx.size());
  for (size_t i = 0; i < idx.size(); i++) expect[i] = col[idx[i]];
  kernels::gather_serial(col.data(), idx, s.data());
  kernels::gather_parallel(col.data(), idx, p.data());
  CHECK(s == expect);
  CHECK(p == expect);
}

TEST_CASE("hash_join equals the nested-loop oracle, in probe-major order") {
  Rng rng(3);
  for (int iter = 0; iter < 25; iter++) {
    size_t bn = rng.below(300), pn = rng.below(300);
    auto bv = random_col(rng, bn, 40);
    auto pv = random_col(rng, pn, 40);
    std::vector<uint64_t> bk(bn), pk(pn);
    for (size_t i = 0; i < bn; i++) bk[i] = splitmix64(bv[i]);
    for (size_t i = 0; i < pn; i++) pk[i] = splitmix64(pv[i]);

    kernels::JoinPairs expect;
    for (size_t p = 0; p < pn; p++)
      for (size_t b = 0; b < bn; b++)
        if (bv[b] == pv[p]) {
          expect.build_rows.push_back(static_cast<uint32_t>(b));
          expect.probe_rows.push_back(static_cast<uint32_t>(p));
        }

    auto s = kernels::hash_join_serial(bk, pk, bv, pv, 1);
    auto p = kernels::hash_join_parallel(bk, pk, bv, pv, 1);
    CHECK(s.build_rows == expect.build_rows);
    CHECK(s.probe_rows == expect.probe_rows);
    CHECK(p.build_rows == expect.build_rows);
    CHECK(p.probe_rows == expect.probe_rows);
  }
}

TEST_CASE("hash_join verifies values on digest match (colliding digests)") {
  // Two distinct single-column values given the SAME digest on purpose:
  // with arity 1 the value comparison must reject the false pair.
  std::vector<uint64_t> bk{42}, pk{42};
  std::vector<TermId> bv{7}, pv{9};
  auto out = kernels::hash_join(bk, pk, bv, pv, 1);
  CHECK(out.build_rows.empty());
  // arity 0 means "digest is trusted": the same pair now matches
  auto trusted = kernels::hash_join(bk, pk, bv, pv, 0);
  CHECK(trusted.build_rows.size() == 1);
}

TEST_CASE("dense kernels match naive references bit for bit") {
  Rng rng(4);
  int batch = 7, in = 13, out = 11;
  std::vector<double> W(static_cast<size_t>(out) * in), bias(out),
      X(static_cast<size_t>(batch) * in), dY(static_cast<size_t>(batch) * out);
  for (auto& v : W) v = rng.uniform(-2, 2);
  for (auto& v : bias) v = rng.uniform(-2, 2);
  for (auto& v : X) v = rng.uniform(-2, 2);
  for (auto& v : dY) v = rng.uniform(-2, 2);

  SUBCASE("affine_batch") {
    std::vector<double> naive(static_cast<size_t>(batch) * out);
    for (int b = 0; b < batch; b++)
      for (int o = 0; o < out; o++) {
        double acc = bias[o];
        for (int i = 0; i < in; i++) acc += W[o * in + i] * X[b * in + i];
        naive[b * out + o] = acc;
      }
    std::vector<double> ys(naive.size()), yp(naive.size());
    kernels::affine_batch_serial(W.data(), bias.data(), X.data(), ys.data(), batch,
                                 in, out);
    kernels::affine_batch_parallel(W.data(), bias.data(), X.data(), yp.data(),
                                   batch, in, out);
    CHECK(ys == yp);
    for (size_t i = 0; i < naive.size(); i++)
      CHECK(ys[i] == doctest::Approx(naive[i]).epsilon(1e-12));
  }

  SUBCASE("affine_grad overwrites with exact sums") {
    std::vector<double> dWs(W.size(), 123.0), dbs(out, 123.0), dWp(W.size(), -5.0),
        dbp(out, -5.0);
    kernels::affine_grad_serial(dY.data(), X.data(), dWs.data(), dbs.data(), batch,
                                in, out);
    kernels::affine_grad_parallel(dY.data(), X.data(), dWp.data(), dbp.data(),
                                  batch, in, out);
    CHECK(dWs == dWp);  // also proves the stale 123/-5 fill was overwritten
    CHECK(dbs == dbp);
    double acc = 0;
    for (int b = 0; b < batch; b++) acc += dY[b * out + 3] * X[b * in + 5];
    CHECK(dWs[3 * in + 5] == doctest::Approx(acc).epsilon(1e-12));
  }

  SUBCASE("affine_backprop and relu pair") {
    std::vector<double> dXs(static_cast<size_t>(batch) * in), dXp(dXs);
    kernels::affine_backprop_serial(W.data(), dY.data(), dXs.data(), batch, in, out);
    kernels::affine_backprop_parallel(W.data(), dY.data(), dXp.data(), batch, in,
                                      out);
    CHECK(dXs == dXp);

    std::vector<double> pre(X), r1(X), r2(X);
    kernels::relu_serial(r1.data(), r1.size());
    kernels::relu_parallel(r2.data(), r2.size());
    CHECK(r1 == r2);
    for (size_t i = 0; i < X.size(); i++) CHECK(r1[i] == std::max(0.0, X[i]));

    std::vector<double> g1(X.size()), g2(X.size());
    kernels::relu_backprop_serial(pre.data(), dY.data() + 0, g1.data(),
                                  std::min(dY.size(), X.size()));
    kernels::relu_backprop_parallel(pre.data(), dY.data() + 0, g2.data(),
                                    std::min(dY.size(), X.size()));
    CHECK(g1 == g2);
  }

  SUBCASE("axpy_update") {
    std::vector<double> w1(W), w2(W);
    kernels::axpy_update_serial(w1.data(), X.data(), 0.01,
                                std::min(W.size(), X.size()));
    kernels::axpy_update_parallel(w2.data(), X.data(), 0.01,
                                  std::min(W.size(), X.size()));
    CHECK(w1 == w2);
    CHECK(w1[0] == W[0] - 0.01 * X[0]);
  }
}

TEST_CASE("dispatchers are bitwise identical across thread counts") {
  Rng rng(5);
  size_t n = 5000;
  auto a = random_col(rng, n, 8);
  auto b = random_col(rng, n, 8);
  kernels::ScanPredicate eq{a.data(), 3};
  kernels::ScanColEq ce{a.data(), b.data()};

  std::vector<uint32_t> reference;
  {
    ThreadGuard g(0);  // serial reference implementation
    reference = kernels::scan_filter(n, {&eq, 1}, {&ce, 1});
  }
  for (int threads : {1, 2, 3, 7}) {
    ThreadGuard g(threads);
    CHECK(kernels::scan_filter(n, {&eq, 1}, {&ce, 1}) == reference);
  }
}

TEST_CASE("empty inputs are handled") {
  std::vector<uint64_t> nokeys;
  std::vector<TermId> novals;
  auto out = kernels::hash_join(nokeys, nokeys, novals, novals, 1);
  CHECK(out.build_rows.empty());
  CHECK(kernels::scan_filter(0, {}, {}).empty());
  kernels::gather(nullptr, {}, nullptr);  // no-op on empty index
}
