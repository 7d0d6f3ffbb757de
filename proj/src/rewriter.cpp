#include "rdftune/rewriter.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace rdftune {

int table_weight(const TableKey& k) {
  switch (k.kind) {
    case TableKind::Divided:
      return 1;
    case TableKind::Merged:
      return static_cast<int>(k.preds.size());
    case TableKind::Base:
      break;
  }
  throw ValidationError("base tables carry no cover weight");
}

TableSequence generate_table_sequence(const QuerySpec& q, const Catalog& cat) {
  TableSequence seq;
  for (const TriplePattern& p : q.patterns) {
    PredCode c = cat.pred_code(p.predicate);
    if (c != 0 && std::find(seq.divides.begin(), seq.divides.end(), c) == seq.divides.end())
      seq.divides.push_back(c);
  }
  seq.weight_sum = static_cast<int>(seq.divides.size());

  std::set<TableKey> known;
  for (PredCode c : seq.divides) {
    seq.tables.push_back(TableKey::divided(c));
    known.insert(seq.tables.back());
  }

  // pattern-level join conditions, predicate-coded and deduplicated
  std::vector<TableCond> conds;
  for (const QJoin& j : q.joins) {
    if (j.a.alias == j.b.alias) continue;  // an intra-pattern filter, not a join
    PredCode pa = cat.pred_code(q.patterns[j.a.alias].predicate);
    PredCode pb = cat.pred_code(q.patterns[j.b.alias].predicate);
    if (pa == 0 || pb == 0 || pa == pb) continue;
    TableCond c({pa, j.a.pos}, {pb, j.b.pos});
    if (std::find(conds.begin(), conds.end(), c) == conds.end()) conds.push_back(c);
  }

  auto record = [&](TableKey left, TableKey right, const TableCond& cond) {
    std::vector<PredCode> preds = left.is_base() ? std::vector<PredCode>{} : left.preds;
    if (left.kind == TableKind::Divided) preds = {left.pred};
    preds.push_back(right.pred);
    std::vector<TableCond> cs(left.conds);
    cs.push_back(cond);
    MergeEvent ev{std::move(left), std::move(right),
                  TableKey::merged(std::move(preds), std::move(cs)), cond};
    ev.duplicate = known.count(ev.result) > 0;
    if (!ev.duplicate) {
      seq.tables.push_back(ev.result);
      known.insert(ev.result);
    }
    seq.merges.push_back(std::move(ev));
  };

  for (const TableCond& c : conds)
    record(TableKey::divided(c.a.pred), TableKey::divided(c.b.pred), c);

  const int n = static_cast<int>(q.patterns.size()) - 1;  // maximum join times
  for (int i = 2; i <= n; ++i) {
    // snapshot: extending a level adds tables of the next level only, but a
    // stable end bound keeps the walk order independent of insertions
    const size_t end = seq.tables.size();
    for (size_t ti = 0; ti < end; ++ti) {
      const TableKey t = seq.tables[ti];
      if (t.kind != TableKind::Merged || static_cast<int>(t.conds.size()) != i - 1)
        continue;
      for (const TableCond& c : conds) {
        if (std::find(t.conds.begin(), t.conds.end(), c) != t.conds.end()) continue;
        bool ina = std::find(t.preds.begin(), t.preds.end(), c.a.pred) != t.preds.end();
        bool inb = std::find(t.preds.begin(), t.preds.end(), c.b.pred) != t.preds.end();
        if (ina == inb) continue;  // must link one inside predicate to one outside
        record(t, TableKey::divided(ina ? c.b.pred : c.a.pred), c);
      }
    }
  }
  return seq;
}

TableId ensure_table(Catalog& cat, const TableKey& key,
                     const std::vector<MergeEvent>& events) {
  if (auto id = cat.find(key)) return *id;
  if (key.kind == TableKind::Divided) return cat.divide(key.pred);
  if (key.kind != TableKind::Merged)
    throw ValidationError("cannot create a base table");
  for (const MergeEvent& ev : events) {
    if (ev.result != key) continue;
    TableId l = ensure_table(cat, ev.left, events);
    TableId r = ensure_table(cat, ev.right, events);
    return cat.merge(l, r, ev.cond);
  }
  throw ValidationError("no recorded way to build the requested merged table");
}

PriorityList::PriorityList(const QuerySpec& q, TableSequence seq, const Catalog& cat)
    : q_(q), seq_(std::move(seq)) {
  alias_codes_.reserve(q_.patterns.size());
  for (const TriplePattern& p : q_.patterns)
    alias_codes_.push_back(cat.pred_code(p.predicate));
  enumerate();
}

void PriorityList::enumerate() {
  const size_t nt = seq_.tables.size();
  if (seq_.divides.size() > 64)
    throw ValidationError("query uses more than 64 distinct predicates");
  std::map<PredCode, int> bit;
  for (size_t i = 0; i < seq_.divides.size(); ++i)
    bit[seq_.divides[i]] = static_cast<int>(i);
  std::vector<uint64_t> mask(nt, 0);
  std::vector<int> weight(nt, 0);
  for (size_t i = 0; i < nt; ++i) {
    const TableKey& k = seq_.tables[i];
    weight[i] = table_weight(k);
    if (k.kind == TableKind::Divided) {
      mask[i] = 1ull << bit.at(k.pred);
    } else {
      for (PredCode p : k.preds) mask[i] |= 1ull << bit.at(p);
    }
  }

  auto close_conds = [&](const std::vector<TableKey>& tabs) {
    std::map<CondEnd, uint32_t> node;
    for (const TableKey& t : tabs)
      for (const TableCond& c : t.conds) {
        node.emplace(c.a, static_cast<uint32_t>(node.size()));
        node.emplace(c.b, static_cast<uint32_t>(node.size()));
      }
    std::vector<uint32_t> parent(node.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](uint32_t v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (const TableKey& t : tabs)
      for (const TableCond& c : t.conds) {
        uint32_t a = find(node.at(c.a)), b = find(node.at(c.b));
        if (a != b) parent[a] = b;
      }
    std::vector<TableCond> closed;
    for (auto i = node.begin(); i != node.end(); ++i)
      for (auto j = std::next(i); j != node.end(); ++j)
        if (find(i->second) == find(j->second))
          closed.emplace_back(i->first, j->first);
    std::sort(closed.begin(), closed.end());
    return closed;
  };

  auto emit = [&](const std::vector<uint32_t>& picked, std::vector<uint32_t> t0_aliases) {
    PriorityItem item;
    for (uint32_t i : picked) item.tables.push_back(seq_.tables[i]);
    item.t0_aliases = std::move(t0_aliases);
    item.choose_info = close_conds(item.tables);
    items_.push_back(std::move(item));
  };

  const int target = seq_.weight_sum;
  if (target == 0) return;
  std::vector<uint32_t> picked;
  long basic = -1;
  // depth-first walk over index-ordered subsets, pruned by weight overshoot
  // and constituent overlap: emits exactly the disjoint exact covers
  auto dfs = [&](auto&& self, size_t start, uint64_t used, int w) -> void {
    if (w == target) {
      bool all_single = std::all_of(picked.begin(), picked.end(), [&](uint32_t i) {
        return seq_.tables[i].kind == TableKind::Divided;
      });
      if (all_single) basic = static_cast<long>(items_.size());
      emit(picked, {});
      return;
    }
    for (size_t i = start; i < nt; ++i) {
      if ((mask[i] & used) || w + weight[i] > target) continue;
      picked.push_back(static_cast<uint32_t>(i));
      self(self, i + 1, used | mask[i], w + weight[i]);
      picked.pop_back();
    }
  };
  dfs(dfs, 0, 0, 0);

  // t0-inclusive variants of the all-single-tables item: one alias at a time
  // hands its pattern to a t0 self-scan
  if (basic >= 0 && seq_.divides.size() == q_.patterns.size()) {
    for (uint32_t a = 0; a < q_.patterns.size(); ++a) {
      PriorityItem item;
      for (const TableKey& k : items_[basic].tables)
        if (k.pred != alias_codes_[a]) item.tables.push_back(k);
      item.t0_aliases = {a};
      item.choose_info = close_conds(item.tables);
      items_.push_back(std::move(item));
    }
  }
}

RewrittenQuery PriorityList::materialize(const Catalog& cat,
                                         const PriorityItem& item) const {
  std::vector<AliasAssignment> groups;
  for (const TableKey& k : item.tables) {
    auto id = cat.find(k);
    if (!id) throw ValidationError("item table is not materialized");
    AliasAssignment g{*id, {}};
    for (uint32_t a = 0; a < q_.patterns.size(); ++a) {
      if (std::find(item.t0_aliases.begin(), item.t0_aliases.end(), a) !=
          item.t0_aliases.end())
        continue;
      PredCode c = alias_codes_[a];
      bool in = (k.kind == TableKind::Divided)
                    ? (k.pred == c)
                    : std::find(k.preds.begin(), k.preds.end(), c) != k.preds.end();
      if (in) g.aliases.push_back(a);
    }
    groups.push_back(std::move(g));
  }
  for (uint32_t a : item.t0_aliases) groups.push_back({0, {a}});
  return apply_rewrite(q_, groups, cat);
}

bool PriorityList::feasible(const Catalog& cat, const PriorityItem& item) const {
  for (const TableKey& k : item.tables)
    if (!cat.find(k)) return false;
  return true;
}

void PriorityList::time_item(const Catalog& cat, PriorityItem& item, Mode mode,
                             int repeats) {
  try {
    RewrittenQuery rw = materialize(cat, item);
    item.meas = execute(cat, rw, mode, repeats).meas;
    item.timed = true;
  } catch (const ValidationError&) {
    item.invalid = true;
  }
}

PriorityList::Choice PriorityList::baseline(const Catalog& cat, Mode mode,
                                            int repeats) {
  Choice c;
  c.rw = baseline_rewrite(q_, cat);
  if (!baseline_timed_) {
    baseline_meas_ = execute(cat, c.rw, mode, repeats).meas;
    baseline_timed_ = true;
  }
  c.time = baseline_meas_.metric(mode);
  c.item = -1;
  return c;
}

PriorityList::Choice PriorityList::select(const Catalog& cat, Mode mode,
                                          int repeats) {
  long best = -1;
  for (size_t i = 0; i < items_.size(); ++i) {
    PriorityItem& item = items_[i];
    if (item.invalid || !feasible(cat, item)) continue;
    if (!item.timed) time_item(cat, item, mode, repeats);
    if (item.invalid) continue;
    if (best < 0 ||
        item.meas.metric(mode) < items_[best].meas.metric(mode))
      best = static_cast<long>(i);
  }
  if (best < 0) return baseline(cat, mode, repeats);
  Choice c;
  c.rw = materialize(cat, items_[best]);
  c.time = items_[best].meas.metric(mode);
  c.item = best;
  return c;
}

void PriorityList::time_all(Catalog& cat, Mode mode, int repeats) {
  for (PriorityItem& item : items_) {
    if (item.timed || item.invalid) continue;
    try {
      for (const TableKey& k : item.tables) ensure_table(cat, k, seq_.merges);
    } catch (const ValidationError&) {
      item.invalid = true;
      continue;
    }
    time_item(cat, item, mode, repeats);
  }
  baseline(cat, mode, repeats);
}

std::vector<size_t> PriorityList::ranked(Mode mode) const {
  std::vector<size_t> idx;
  for (size_t i = 0; i < items_.size(); ++i)
    if (items_[i].timed && !items_[i].invalid) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return items_[a].meas.metric(mode) < items_[b].meas.metric(mode);
  });
  return idx;
}

}  // namespace rdftune
