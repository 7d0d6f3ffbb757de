#pragma once

#include "rdftune/catalog.hpp"
#include "rdftune/query.hpp"

namespace rdftune {

enum class Mode { WallClock, CostModel };

struct Measurement {
  double wall_time = 0;  // seconds, averaged over repeats
  double cost = 0;       // rows scanned + per-scan output + per-join build/probe/output
  uint64_t rows_out = 0;
  double metric(Mode m) const { return m == Mode::CostModel ? cost : wall_time; }
};

struct ExecOut {
  ResultSet result;
  Measurement meas;
};

// Evaluates a rewritten query: filtered scan per ref, then hash joins in
// greedy connected order (build side = smaller input). Cost-model mode runs
// once and reports deterministic cost units; wall-clock mode runs `repeats`
// times and reports the average time.
ExecOut execute(const Catalog& cat, const RewrittenQuery& rw, Mode mode,
                int repeats = 3);

}  // namespace rdftune
