#include "rdftune/executor.hpp"

#include <chrono>

#include "rdftune/kernels.hpp"

namespace rdftune {

namespace {

struct EvalOut {
  ResultSet rs;
  double cost = 0;
};

void validate_plan(const Catalog& cat, const RewrittenQuery& rw) {
  auto check = [&](uint32_t ref, uint32_t col) {
    if (ref >= rw.refs.size())
      throw ValidationError("plan references a missing table ref");
    if (col >= cat.table(rw.refs[ref].table).cols.size())
      throw ValidationError("plan references an unknown column");
  };
  for (const auto& f : rw.filters) check(f.ref, f.col);
  for (const auto& e : rw.eq_filters) {
    check(e.ref, e.col_a);
    check(e.ref, e.col_b);
  }
  for (const auto& j : rw.residual_joins) {
    check(j.ref_a, j.col_a);
    check(j.ref_b, j.col_b);
  }
  for (const auto& [ref, col] : rw.projection) check(ref, col);
}

EvalOut evaluate(const Catalog& cat, const RewrittenQuery& rw) {
  EvalOut out;
  const size_t nref = rw.refs.size();

  std::vector<const Table*> tbl(nref);
  std::vector<std::vector<uint32_t>> sel(nref);
  for (uint32_t r = 0; r < nref; ++r) {
    tbl[r] = &cat.table(rw.refs[r].table);
    std::vector<kernels::ScanPredicate> eq;
    std::vector<kernels::ScanColEq> ceq;
    for (const auto& f : rw.filters)
      if (f.ref == r) eq.push_back({tbl[r]->cols[f.col].data(), cat.term(f.value)});
    for (const auto& e : rw.eq_filters)
      if (e.ref == r)
        ceq.push_back({tbl[r]->cols[e.col_a].data(), tbl[r]->cols[e.col_b].data()});
    sel[r] = kernels::scan_filter(tbl[r]->rows(), eq, ceq);
    out.cost += static_cast<double>(tbl[r]->rows()) + static_cast<double>(sel[r].size());
  }

  // tuple columns of the running intermediate: cols[pos_of[r]][t] is the row
  // of ref r's table backing tuple t
  std::vector<uint32_t> pos_of(nref, UINT32_MAX);
  std::vector<std::vector<uint32_t>> cols{sel[0]};
  pos_of[0] = 0;
  size_t njoined = 1;

  while (njoined < nref) {
    uint32_t j = UINT32_MAX;
    for (uint32_t r = 0; r < nref && j == UINT32_MAX; ++r) {
      if (pos_of[r] != UINT32_MAX) continue;
      for (const auto& e : rw.residual_joins)
        if ((e.ref_a == r && pos_of[e.ref_b] != UINT32_MAX) ||
            (e.ref_b == r && pos_of[e.ref_a] != UINT32_MAX)) {
          j = r;
          break;
        }
    }
    if (j == UINT32_MAX)  // no connecting edge left: cross join
      for (uint32_t r = 0; r < nref; ++r)
        if (pos_of[r] == UINT32_MAX) {
          j = r;
          break;
        }

    struct Edge {
      uint32_t lref, lcol, jcol;
    };
    std::vector<Edge> edges;
    for (const auto& e : rw.residual_joins) {
      if (e.ref_a == j && pos_of[e.ref_b] != UINT32_MAX)
        edges.push_back({e.ref_b, e.col_b, e.col_a});
      else if (e.ref_b == j && pos_of[e.ref_a] != UINT32_MAX)
        edges.push_back({e.ref_a, e.col_a, e.col_b});
    }
    const size_t arity = edges.size();
    const size_t ltup = cols[0].size();
    const size_t rtup = sel[j].size();

    std::vector<uint64_t> lkeys(ltup), rkeys(rtup);
    std::vector<TermId> lvals(ltup * arity), rvals(rtup * arity);
    for (size_t t = 0; t < ltup; ++t) {
      uint64_t h = 0;
      for (size_t e = 0; e < arity; ++e) {
        TermId v = tbl[edges[e].lref]->cols[edges[e].lcol][cols[pos_of[edges[e].lref]][t]];
        lvals[t * arity + e] = v;
        h = hash_combine(h, v);
      }
      lkeys[t] = h;
    }
    for (size_t t = 0; t < rtup; ++t) {
      uint64_t h = 0;
      for (size_t e = 0; e < arity; ++e) {
        TermId v = tbl[j]->cols[edges[e].jcol][sel[j][t]];
        rvals[t * arity + e] = v;
        h = hash_combine(h, v);
      }
      rkeys[t] = h;
    }

    bool build_left = ltup <= rtup;
    kernels::JoinPairs pairs =
        build_left ? kernels::hash_join(lkeys, rkeys, lvals, rvals, arity)
                   : kernels::hash_join(rkeys, lkeys, rvals, lvals, arity);
    const auto& lrows = build_left ? pairs.build_rows : pairs.probe_rows;
    const auto& rrows = build_left ? pairs.probe_rows : pairs.build_rows;
    out.cost += static_cast<double>(ltup) + static_cast<double>(rtup) +
                static_cast<double>(lrows.size());

    std::vector<std::vector<uint32_t>> ncols(cols.size() + 1);
    for (size_t c = 0; c < cols.size(); ++c) {
      ncols[c].resize(lrows.size());
      kernels::gather(cols[c].data(), lrows, ncols[c].data());
    }
    ncols.back().resize(rrows.size());
    kernels::gather(sel[j].data(), rrows, ncols.back().data());
    pos_of[j] = static_cast<uint32_t>(cols.size());
    cols = std::move(ncols);
    ++njoined;
  }

  const size_t tuples = cols[0].size();
  out.rs.arity = static_cast<uint32_t>(rw.projection.size());
  out.rs.data.resize(tuples * rw.projection.size());
  for (size_t t = 0; t < tuples; ++t)
    for (size_t c = 0; c < rw.projection.size(); ++c) {
      auto [ref, col] = rw.projection[c];
      out.rs.data[t * rw.projection.size() + c] = tbl[ref]->cols[col][cols[pos_of[ref]][t]];
    }
  return out;
}

}  // namespace

ExecOut execute(const Catalog& cat, const RewrittenQuery& rw, Mode mode, int repeats) {
  if (rw.refs.empty()) throw ValidationError("rewritten query references no tables");
  validate_plan(cat, rw);
  if (mode == Mode::CostModel || repeats < 1) repeats = 1;
  ExecOut out;
  double total = 0;
  for (int r = 0; r < repeats; ++r) {
    auto start = std::chrono::steady_clock::now();
    EvalOut ev = evaluate(cat, rw);
    auto stop = std::chrono::steady_clock::now();
    total += std::chrono::duration<double>(stop - start).count();
    out.result = std::move(ev.rs);
    out.meas.cost = ev.cost;
  }
  out.meas.wall_time = total / repeats;
  out.meas.rows_out = out.result.rows();
  return out;
}

}  // namespace rdftune
