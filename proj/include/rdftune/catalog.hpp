#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "rdftune/common.hpp"

#include "json.hpp"

namespace rdftune {

struct Triple {
  std::string s, p, o;
};

// One endpoint of a build condition, named at constituent level: within a
// merged table every constituent predicate is unique, so (predicate, s|o)
// identifies a column regardless of constituent order.
struct CondEnd {
  PredCode pred = 0;
  Pos pos = Pos::S;
  auto operator<=>(const CondEnd&) const = default;
};

// Canonical (unordered) join condition between two constituent columns:
// a <= b always holds, so t1.s=t2.s and t2.s=t1.s are the same condition.
struct TableCond {
  CondEnd a, b;
  TableCond() = default;
  TableCond(CondEnd x, CondEnd y) {
    if (y < x) std::swap(x, y);
    a = x;
    b = y;
  }
  auto operator<=>(const TableCond&) const = default;
};

enum class TableKind : uint8_t { Base = 0, Divided = 1, Merged = 2 };

// Structural identity of a table, independent of creation order. Merged
// identity is the constituent set plus the build-condition set; the two
// bracketings of the same multi-way join are one table.
struct TableKey {
  TableKind kind = TableKind::Base;
  PredCode pred = 0;                 // Divided
  std::vector<PredCode> preds;       // Merged, sorted
  std::vector<TableCond> conds;      // Merged, sorted

  static TableKey base() { return {}; }
  static TableKey divided(PredCode p) {
    TableKey k;
    k.kind = TableKind::Divided;
    k.pred = p;
    return k;
  }
  static TableKey merged(std::vector<PredCode> ps, std::vector<TableCond> cs);

  bool is_base() const { return kind == TableKind::Base; }
  auto operator<=>(const TableKey&) const = default;
};

struct TableDef {
  TableId id = 0;
  std::string name;  // t0, t1, ...
  TableKind kind = TableKind::Base;
  std::vector<PredCode> constituents;  // in column order; empty for base
  std::set<TableCond> conds;           // build conditions (merged only)
  // provenance of a merged table
  TableId left = 0, right = 0;
  TableCond built_with;

  size_t column_count() const;
  // base: s,p,o; divided: s,o; merged: s,o,bs,bo,cs,co,...
  std::string column_name(size_t idx) const;
  // column index of (constituent predicate, position); throws on miss
  uint32_t column_of(PredCode pred, Pos pos) const;
  TableKey key() const;
};

struct Table {
  TableDef def;
  std::vector<std::vector<TermId>> cols;  // column-major
  size_t rows() const { return cols.empty() ? 0 : cols[0].size(); }
};

std::vector<Triple> parse_ntriples(const std::string& text);

// Reads one term token (IRI in <>, literal in "", or bare word) starting at
// line[i], advancing i past it. Delimiters are stripped from the result.
std::string lex_term(const std::string& line, size_t& i, size_t lineno);

// Relational state over one loaded dataset: t0 plus whatever divide/merge
// created. Terms are dictionary-encoded; the predicate dictionary maps each
// distinct predicate of t0 to a code in 1..n (first-appearance order).
class Catalog {
 public:
  static Catalog load_ntriples(const std::string& path);
  static Catalog from_triples(const std::vector<Triple>& triples);

  TableId divide(PredCode p);
  TableId divide(const std::string& predicate);
  TableId merge(TableId left, TableId right, const TableCond& cond);

  // Drops every non-base table.
  void reset_to_base();

  const Table& table(TableId id) const;
  size_t table_count() const { return tables_.size(); }
  std::optional<TableId> find(const TableKey& key) const;

  size_t predicate_count() const { return pred_names_.size() - 1; }
  PredCode pred_code(const std::string& predicate) const;  // 0 if unknown
  const std::string& pred_name(PredCode code) const;
  const std::map<std::string, PredCode>& predicate_dict() const { return pred_dict_; }

  TermId term(const std::string& t) const;  // kNoTerm if unknown
  const std::string& term_name(TermId id) const { return term_names_.at(id); }

  uint64_t total_rows() const;

  nlohmann::json layout_json() const;
  // Recreates the divided/merged tables a layout_json() dump describes.
  void materialize_layout(const nlohmann::json& layout);

 private:
  TermId intern(const std::string& t);
  TableId add_table(Table t);

  std::vector<std::string> term_names_;
  std::unordered_map<std::string, TermId> term_ids_;
  std::map<std::string, PredCode> pred_dict_;
  std::vector<std::string> pred_names_;  // code -> name, [0] unused
  std::vector<TermId> pred_terms_;       // code -> term id of the predicate
  std::vector<Table> tables_;
  std::map<TableKey, TableId> by_key_;
};

}  // namespace rdftune
