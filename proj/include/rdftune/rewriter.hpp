#pragma once

#include <set>
#include <string>
#include <vector>

#include "rdftune/catalog.hpp"
#include "rdftune/executor.hpp"
#include "rdftune/query.hpp"

namespace rdftune {

// Divided -> 1, Merged -> number of constituents. Base tables carry no weight.
int table_weight(const TableKey& k);

// One merge the table-sequence walk attempts. Events whose result already
// exists still matter: they are distinct ways to reach the same table and
// each becomes its own action.
struct MergeEvent {
  TableKey left, right, result;
  TableCond cond;
  bool duplicate = false;  // result was already produced by an earlier event
};

// Everything any rewrite of one query could use: a divided table per known
// predicate, a merged table per join condition, and all deeper merges formed
// by extending a merged table with one more divided table.
struct TableSequence {
  std::vector<PredCode> divides;   // first-appearance order over the patterns
  std::vector<MergeEvent> merges;  // walk order
  std::vector<TableKey> tables;    // divides, then distinct merge results
  int weight_sum = 0;              // = divides.size(), the exact-cover target
};

TableSequence generate_table_sequence(const QuerySpec& q, const Catalog& cat);

// One feasible rewrite: tables with pairwise-disjoint constituents exactly
// covering the query's predicates, possibly with some aliases routed to t0
// self-scans instead. Timing fills in lazily once the tables exist.
struct PriorityItem {
  std::vector<TableKey> tables;
  std::vector<uint32_t> t0_aliases;
  std::vector<TableCond> choose_info;  // transitive closure of the tables' conds
  bool timed = false;
  bool invalid = false;  // rewrite construction failed structurally
  Measurement meas;
};

// Per-query item list. Items are timed the first time their tables all exist
// and the measurement is cached for the rest of the run (table contents are
// a pure function of their identity, so the number never changes).
class PriorityList {
 public:
  PriorityList() = default;
  PriorityList(const QuerySpec& q, TableSequence seq, const Catalog& cat);

  struct Choice {
    RewrittenQuery rw;
    double time = 0;  // metric under the requested mode
    long item = -1;   // index into items(), -1 for the t0 fallback
  };

  // Fastest feasible item under the catalog's current tables; falls back to
  // the all-t0 baseline when no item's tables are all present.
  Choice select(const Catalog& cat, Mode mode, int repeats);

  // Baseline (all aliases on t0), timed once and cached.
  Choice baseline(const Catalog& cat, Mode mode, int repeats);

  // Creates whatever sequence tables are still missing, then times every
  // untimed item. Used for full list exports.
  void time_all(Catalog& cat, Mode mode, int repeats);

  // Valid, timed items sorted by (time, enumeration order).
  std::vector<size_t> ranked(Mode mode) const;

  // Rewrite of one item against the catalog's current table ids.
  RewrittenQuery materialize(const Catalog& cat, const PriorityItem& item) const;

  const std::vector<PriorityItem>& items() const { return items_; }
  const QuerySpec& query() const { return q_; }
  const TableSequence& sequence() const { return seq_; }

 private:
  void enumerate();
  bool feasible(const Catalog& cat, const PriorityItem& item) const;
  void time_item(const Catalog& cat, PriorityItem& item, Mode mode, int repeats);

  QuerySpec q_;
  TableSequence seq_;
  std::vector<PredCode> alias_codes_;  // per pattern; 0 = predicate not in data
  std::vector<PriorityItem> items_;
  bool baseline_timed_ = false;
  Measurement baseline_meas_;
};

// Creates the table a key names (recursively, via the sequence's events) and
// returns its id; reuses existing tables.
TableId ensure_table(Catalog& cat, const TableKey& key,
                     const std::vector<MergeEvent>& events);

}  // namespace rdftune
