#include "rdftune/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdftune::kernels {

namespace {

inline bool row_passes(size_t r, std::span<const ScanPredicate> eq,
                       std::span<const ScanColEq> col_eq) {
  for (const auto& p : eq)
    if (p.col[r] != p.value) return false;
  for (const auto& c : col_eq)
    if (c.a[r] != c.b[r]) return false;
  return true;
}

}  // namespace

std::vector<uint32_t> scan_filter_serial(size_t rows,
                                         std::span<const ScanPredicate> eq,
                                         std::span<const ScanColEq> col_eq) {
  std::vector<uint32_t> out;
  for (size_t r = 0; r < rows; ++r)
    if (row_passes(r, eq, col_eq)) out.push_back(static_cast<uint32_t>(r));
  return out;
}

std::vector<uint32_t> scan_filter_parallel(size_t rows,
                                           std::span<const ScanPredicate> eq,
                                           std::span<const ScanColEq> col_eq) {
#ifndef _OPENMP
  return scan_filter_serial(rows, eq, col_eq);
#else
  // Fixed chunk grid (independent of thread count) so output order always
  // matches the serial scan.
  const size_t chunk = 16384;
  const size_t nchunks = (rows + chunk - 1) / chunk;
  std::vector<size_t> counts(nchunks + 1, 0);

#pragma omp parallel for schedule(static)
  for (long long ci = 0; ci < static_cast<long long>(nchunks); ++ci) {
    size_t lo = static_cast<size_t>(ci) * chunk;
    size_t hi = std::min(rows, lo + chunk);
    size_t n = 0;
    for (size_t r = lo; r < hi; ++r)
      if (row_passes(r, eq, col_eq)) ++n;
    counts[ci + 1] = n;
  }
  for (size_t i = 1; i <= nchunks; ++i) counts[i] += counts[i - 1];

  std::vector<uint32_t> out(counts[nchunks]);
#pragma omp parallel for schedule(static)
  for (long long ci = 0; ci < static_cast<long long>(nchunks); ++ci) {
    size_t lo = static_cast<size_t>(ci) * chunk;
    size_t hi = std::min(rows, lo + chunk);
    size_t w = counts[ci];
    for (size_t r = lo; r < hi; ++r)
      if (row_passes(r, eq, col_eq)) out[w++] = static_cast<uint32_t>(r);
  }
  return out;
#endif
}

std::vector<uint32_t> scan_filter(size_t rows, std::span<const ScanPredicate> eq,
                                  std::span<const ScanColEq> col_eq) {
  return parallel_enabled() ? scan_filter_parallel(rows, eq, col_eq)
                            : scan_filter_serial(rows, eq, col_eq);
}

void gather_serial(const TermId* col, std::span<const uint32_t> idx, TermId* out) {
  for (size_t i = 0; i < idx.size(); ++i) out[i] = col[idx[i]];
}

void gather_parallel(const TermId* col, std::span<const uint32_t> idx, TermId* out) {
#ifndef _OPENMP
  gather_serial(col, idx, out);
#else
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(idx.size()); ++i)
    out[i] = col[idx[i]];
#endif
}

void gather(const TermId* col, std::span<const uint32_t> idx, TermId* out) {
  if (parallel_enabled())
    gather_parallel(col, idx, out);
  else
    gather_serial(col, idx, out);
}

}  // namespace rdftune::kernels
