#pragma once

// Shared fixtures and independent oracles for the test suite. The oracles
// deliberately avoid the engine's own data structures: queries are evaluated
// by nested loops over raw triples, covers by bitmask subset enumeration.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rdftune/catalog.hpp"
#include "rdftune/executor.hpp"
#include "rdftune/query.hpp"
#include "rdftune/rewriter.hpp"

namespace testutil {

using namespace rdftune;

// ---- filesystem fixtures ---------------------------------------------------

// Unique scratch directory, removed on scope exit.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("rdftune_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// Normalized triples back to N-Triples source: IRI subjects/predicates,
// literal objects (escaped), one statement per line.
inline std::string ntriples_text(const std::vector<Triple>& triples) {
  std::string out;
  for (const Triple& t : triples) {
    out += "<" + t.s + "> <" + t.p + "> \"";
    for (char c : t.o) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += "\" .\n";
  }
  return out;
}

// Three-predicate/one-query fixture mirroring the running example used
// throughout the module tests: seniors whose comments concern universities.
// Term strings are in normalized (post-parse) form: IRI brackets and literal
// quotes already stripped, exactly as Catalog::from_triples expects.
inline std::vector<Triple> example_triples(bool with_extra_predicate = true) {
  std::vector<Triple> t = {
      {"u1", "type", "senior user"},
      {"u2", "type", "senior user"},
      {"u3", "type", "junior user"},
      {"u1", "comment", "c1"},
      {"u2", "comment", "c2"},
      {"u3", "comment", "c3"},
      {"c1", "topic", "university"},
      {"c2", "topic", "sports"},
      {"c3", "topic", "university"},
  };
  if (with_extra_predicate) t.push_back({"u4", "likes", "u1"});
  return t;
}

inline std::string example_query_text() {
  return "QUERY ex\n"
         "PATTERN a p=<type> o=\"senior user\"\n"
         "PATTERN b p=<comment>\n"
         "PATTERN c p=<topic> o=\"university\"\n"
         "JOIN a.s=b.s\n"
         "JOIN b.o=c.s\n"
         "SELECT a.s\n"
         "END\n";
}

inline QuerySpec example_query() { return parse_workload(example_query_text())[0]; }

// ---- brute-force query evaluation over raw triples ------------------------

using Row = std::vector<std::string>;
using Bag = std::multiset<Row>;

inline std::string endpoint_value(const Triple& t, Pos p) {
  return p == Pos::S ? t.s : t.o;
}

// Tries every combination of one triple per pattern; joins, constants and
// projections checked directly. Bag semantics: each combination contributes one
// output row.
inline Bag oracle_eval(const std::vector<Triple>& data, const QuerySpec& q) {
  size_t np = q.patterns.size();
  std::vector<std::vector<const Triple*>> cand(np);
  for (size_t i = 0; i < np; i++) {
    const TriplePattern& p = q.patterns[i];
    for (const Triple& t : data) {
      if (t.p != p.predicate) continue;
      if (p.s_const && t.s != *p.s_const) continue;
      if (p.o_const && t.o != *p.o_const) continue;
      cand[i].push_back(&t);
    }
  }
  Bag out;
  std::vector<size_t> pick(np, 0);
  while (true) {
    bool ok = true;
    for (size_t i = 0; ok && i < np; i++)
      if (cand[i].empty()) ok = false;
    if (!ok) break;
    for (const QJoin& j : q.joins) {
      const Triple* ta = cand[j.a.alias][pick[j.a.alias]];
      const Triple* tb = cand[j.b.alias][pick[j.b.alias]];
      if (endpoint_value(*ta, j.a.pos) != endpoint_value(*tb, j.b.pos)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      Row r;
      for (const QEnd& e : q.projections)
        r.push_back(endpoint_value(*cand[e.alias][pick[e.alias]], e.pos));
      out.insert(std::move(r));
    }
    size_t i = 0;
    for (; i < np; i++) {
      if (++pick[i] < cand[i].size()) break;
      pick[i] = 0;
    }
    if (i == np) break;
  }
  return out;
}

inline Bag to_bag(const ResultSet& rs, const Catalog& cat) {
  Bag out;
  for (size_t r = 0; r < rs.rows(); r++) {
    Row row;
    for (size_t c = 0; c < rs.arity; c++)
      row.push_back(cat.term_name(rs.data[r * rs.arity + c]));
    out.insert(std::move(row));
  }
  return out;
}

// ---- brute-force cover enumeration ----------------------------------------

// All subsets of the sequence's tables whose constituent predicate sets are
// pairwise disjoint and united equal the query's predicates. Matches the
// item list's non-t0-variant part. Queries repeating a predicate have none.
inline std::set<std::set<TableKey>> brute_covers(const TableSequence& seq,
                                                 const QuerySpec& q,
                                                 const Catalog& cat) {
  std::set<std::set<TableKey>> out;
  std::set<PredCode> want;
  for (const TriplePattern& p : q.patterns) {
    PredCode c = cat.pred_code(p.predicate);
    if (c == 0 || !want.insert(c).second) return out;  // unknown or repeated
  }
  size_t n = seq.tables.size();
  if (n > 25) throw std::runtime_error("brute_covers fixture too large");
  std::vector<std::set<PredCode>> preds(n);
  for (size_t i = 0; i < n; i++) {
    const TableKey& k = seq.tables[i];
    if (k.kind == TableKind::Divided)
      preds[i] = {k.pred};
    else
      preds[i] = {k.preds.begin(), k.preds.end()};
  }
  for (uint32_t m = 1; m < (1u << n); m++) {
    std::set<PredCode> got;
    bool ok = true;
    size_t total = 0;
    for (size_t i = 0; ok && i < n; i++) {
      if (!(m & (1u << i))) continue;
      for (PredCode c : preds[i])
        if (!got.insert(c).second) ok = false;  // overlap
      total += preds[i].size();
    }
    if (!ok || total != want.size() || got != want) continue;
    std::set<TableKey> cover;
    for (size_t i = 0; i < n; i++)
      if (m & (1u << i)) cover.insert(seq.tables[i]);
    out.insert(std::move(cover));
  }
  return out;
}

// ---- random fixtures -------------------------------------------------------

struct Fixture {
  std::vector<Triple> triples;
  std::vector<QuerySpec> queries;
};

// Random triples over k predicates, in normalized term form. Subjects and
// objects share one entity pool (so s=o joins can match) and objects mix in
// plain values.
inline std::vector<Triple> random_triples(Rng& rng, int max_triples = 600,
                                          int max_preds = 6) {
  int n = 20 + static_cast<int>(rng.below(max_triples - 19));
  int k = 1 + static_cast<int>(rng.below(max_preds));
  int ents = 4 + static_cast<int>(rng.below(n / 2 + 1));
  int vals = 2 + static_cast<int>(rng.below(8));
  std::vector<Triple> out;
  out.reserve(n);
  for (int i = 0; i < n; i++) {
    Triple t;
    t.s = "e" + std::to_string(rng.below(ents));
    t.p = "p" + std::to_string(1 + rng.below(k));
    t.o = rng.below(3) == 0 ? "v" + std::to_string(rng.below(vals))
                            : "e" + std::to_string(rng.below(ents));
    out.push_back(std::move(t));
  }
  return out;
}

// Random connected query over the data's predicates: up to `max_patterns`
// patterns, spanning-tree joins plus occasional extra edges, occasional
// constants drawn from the data (or a missing term), occasional repeated
// predicates. Canonicalized through print+parse.
inline QuerySpec random_query(Rng& rng, const std::vector<Triple>& data,
                              int max_patterns = 4) {
  std::vector<std::string> preds;
  {
    std::set<std::string> seen;
    for (const Triple& t : data)
      if (seen.insert(t.p).second) preds.push_back(t.p);
  }
  std::sort(preds.begin(), preds.end());
  int np = 1 + static_cast<int>(rng.below(max_patterns));
  QuerySpec q;
  q.name = "r";
  for (int i = 0; i < np; i++) {
    TriplePattern p;
    p.alias = std::string(1, static_cast<char>('a' + i));
    p.predicate = preds[rng.below(static_cast<uint32_t>(preds.size()))];
    if (rng.below(4) == 0) {  // constant on s or o
      const Triple& t = data[rng.below(static_cast<uint32_t>(data.size()))];
      if (rng.below(8) == 0) {
        p.o_const = "<missing-term>";
      } else if (rng.below(2) == 0) {
        p.s_const = t.s;
      } else {
        p.o_const = t.o;
      }
    }
    q.patterns.push_back(std::move(p));
  }
  auto rnd_pos = [&] { return rng.below(2) == 0 ? Pos::S : Pos::O; };
  for (int i = 1; i < np; i++) {  // spanning tree keeps the join graph connected
    QEnd a{static_cast<uint32_t>(rng.below(i)), rnd_pos()};
    QEnd b{static_cast<uint32_t>(i), rnd_pos()};
    q.joins.push_back(q.canonical_join(a, b));
  }
  if (np > 1 && rng.below(3) == 0) {  // one extra edge
    QEnd a{rng.below(static_cast<uint32_t>(np)), rnd_pos()};
    QEnd b{rng.below(static_cast<uint32_t>(np)), rnd_pos()};
    if (!(a == b)) q.joins.push_back(q.canonical_join(a, b));
  }
  q.projections.push_back({0, Pos::S});
  if (np > 1 && rng.below(2) == 0)
    q.projections.push_back({static_cast<uint32_t>(np - 1), Pos::O});
  return parse_workload(workload_text({q}))[0];
}

inline Fixture random_fixture(Rng& rng, int queries = 1, int max_triples = 600,
                              int max_patterns = 4) {
  Fixture f;
  f.triples = random_triples(rng, max_triples);
  for (int i = 0; i < queries; i++) {
    QuerySpec q = random_query(rng, f.triples, max_patterns);
    q.name = "r" + std::to_string(i + 1);
    f.queries.push_back(std::move(q));
  }
  return f;
}

}  // namespace testutil
