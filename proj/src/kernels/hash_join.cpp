#include "rdftune/kernels.hpp"

#include <algorithm>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdftune::kernels {

namespace {

// Chained hash table over the build side, CSR layout. Rows hang off their
// key bucket in row order, so probing enumerates matches exactly like the
// serial nested loop over equal keys would.
struct BuildIndex {
  std::unordered_map<uint64_t, uint32_t> key_to_bucket;
  std::vector<uint32_t> offsets;  // bucket -> [offsets[b], offsets[b+1]) in slots
  std::vector<uint32_t> slots;    // build row indices

  explicit BuildIndex(std::span<const uint64_t> keys) {
    key_to_bucket.reserve(keys.size() * 2);
    std::vector<uint32_t> counts;
    for (uint64_t k : keys) {
      auto [it, fresh] = key_to_bucket.try_emplace(k, static_cast<uint32_t>(counts.size()));
      if (fresh)
        counts.push_back(1);
      else
        ++counts[it->second];
    }
    offsets.assign(counts.size() + 1, 0);
    for (size_t b = 0; b < counts.size(); ++b) offsets[b + 1] = offsets[b] + counts[b];
    slots.resize(keys.size());
    std::vector<uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (uint32_t r = 0; r < keys.size(); ++r) {
      uint32_t b = key_to_bucket.find(keys[r])->second;
      slots[cursor[b]++] = r;
    }
  }
};

inline bool vals_equal(std::span<const TermId> a, size_t ra, std::span<const TermId> b,
                       size_t rb, size_t arity) {
  for (size_t i = 0; i < arity; ++i)
    if (a[ra * arity + i] != b[rb * arity + i]) return false;
  return true;
}

}  // namespace

JoinPairs hash_join_serial(std::span<const uint64_t> build_keys,
                           std::span<const uint64_t> probe_keys,
                           std::span<const TermId> build_vals,
                           std::span<const TermId> probe_vals, size_t arity) {
  BuildIndex ix(build_keys);
  JoinPairs out;
  for (uint32_t p = 0; p < probe_keys.size(); ++p) {
    auto it = ix.key_to_bucket.find(probe_keys[p]);
    if (it == ix.key_to_bucket.end()) continue;
    for (uint32_t s = ix.offsets[it->second]; s < ix.offsets[it->second + 1]; ++s) {
      uint32_t b = ix.slots[s];
      if (vals_equal(build_vals, b, probe_vals, p, arity)) {
        out.build_rows.push_back(b);
        out.probe_rows.push_back(p);
      }
    }
  }
  return out;
}

JoinPairs hash_join_parallel(std::span<const uint64_t> build_keys,
                             std::span<const uint64_t> probe_keys,
                             std::span<const TermId> build_vals,
                             std::span<const TermId> probe_vals, size_t arity) {
#ifndef _OPENMP
  return hash_join_serial(build_keys, probe_keys, build_vals, probe_vals, arity);
#else
  BuildIndex ix(build_keys);
  const size_t n = probe_keys.size();
  std::vector<uint64_t> match_counts(n + 1, 0);

#pragma omp parallel for schedule(static)
  for (long long p = 0; p < static_cast<long long>(n); ++p) {
    auto it = ix.key_to_bucket.find(probe_keys[p]);
    if (it == ix.key_to_bucket.end()) continue;
    uint64_t m = 0;
    for (uint32_t s = ix.offsets[it->second]; s < ix.offsets[it->second + 1]; ++s)
      if (vals_equal(build_vals, ix.slots[s], probe_vals, p, arity)) ++m;
    match_counts[p + 1] = m;
  }
  for (size_t p = 1; p <= n; ++p) match_counts[p] += match_counts[p - 1];

  JoinPairs out;
  out.build_rows.resize(match_counts[n]);
  out.probe_rows.resize(match_counts[n]);
#pragma omp parallel for schedule(static)
  for (long long p = 0; p < static_cast<long long>(n); ++p) {
    auto it = ix.key_to_bucket.find(probe_keys[p]);
    if (it == ix.key_to_bucket.end()) continue;
    uint64_t w = match_counts[p];
    for (uint32_t s = ix.offsets[it->second]; s < ix.offsets[it->second + 1]; ++s) {
      uint32_t b = ix.slots[s];
      if (vals_equal(build_vals, b, probe_vals, p, arity)) {
        out.build_rows[w] = b;
        out.probe_rows[w] = static_cast<uint32_t>(p);
        ++w;
      }
    }
  }
  return out;
#endif
}

JoinPairs hash_join(std::span<const uint64_t> build_keys,
                    std::span<const uint64_t> probe_keys,
                    std::span<const TermId> build_vals,
                    std::span<const TermId> probe_vals, size_t arity) {
  return parallel_enabled()
             ? hash_join_parallel(build_keys, probe_keys, build_vals, probe_vals, arity)
             : hash_join_serial(build_keys, probe_keys, build_vals, probe_vals, arity);
}

}  // namespace rdftune::kernels
