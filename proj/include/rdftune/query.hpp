#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdftune/catalog.hpp"
#include "rdftune/common.hpp"

namespace rdftune {

// One triple pattern of a conjunctive query. The predicate is always a
// constant; subject/object may each be pinned to a constant term.
struct TriplePattern {
  std::string alias;
  std::string predicate;
  std::optional<std::string> s_const, o_const;
  bool operator==(const TriplePattern&) const = default;
};

struct QEnd {
  uint32_t alias = 0;  // index into QuerySpec::patterns
  Pos pos = Pos::S;
  auto operator<=>(const QEnd&) const = default;
};

// Equality between two pattern columns, canonical: the lexicographically
// smaller endpoint (by "alias.pos" spelling) comes first.
struct QJoin {
  QEnd a, b;
  auto operator<=>(const QJoin&) const = default;
};

struct QuerySpec {
  std::string name;
  std::vector<TriplePattern> patterns;
  std::vector<QJoin> joins;  // canonical, sorted, duplicate-free
  std::vector<QEnd> projections;

  bool operator==(const QuerySpec&) const = default;
  std::string endpoint_text(const QEnd& e) const {
    return patterns[e.alias].alias + "." + (e.pos == Pos::S ? "s" : "o");
  }
  QJoin canonical_join(QEnd x, QEnd y) const {
    if (endpoint_text(y) < endpoint_text(x)) std::swap(x, y);
    return {x, y};
  }
};

std::vector<QuerySpec> parse_workload(const std::string& text);
std::vector<QuerySpec> load_workload(const std::string& path);
std::string workload_text(const std::vector<QuerySpec>& queries);

// A query mapped onto concrete tables. Each ref scans one table and serves a
// set of aliases; everything the executor needs (filters, intra-table column
// equalities, cross-ref joins, projection) is resolved to (ref, column).
struct RewrittenQuery {
  struct Ref {
    TableId table = 0;
    std::vector<uint32_t> aliases;
    bool operator==(const Ref&) const = default;
  };
  struct AliasLoc {
    uint32_t ref = 0;
    uint32_t s_col = 0, o_col = 0;
    bool operator==(const AliasLoc&) const = default;
  };
  struct ConstFilter {
    uint32_t ref = 0, col = 0;
    std::string value;
    bool operator==(const ConstFilter&) const = default;
  };
  struct EqFilter {
    uint32_t ref = 0, col_a = 0, col_b = 0;
    bool operator==(const EqFilter&) const = default;
  };
  struct ResidualJoin {
    uint32_t ref_a = 0, col_a = 0, ref_b = 0, col_b = 0;
    bool operator==(const ResidualJoin&) const = default;
  };

  std::vector<Ref> refs;
  std::vector<AliasLoc> locs;  // indexed by alias
  std::vector<ConstFilter> filters;
  std::vector<EqFilter> eq_filters;
  std::vector<ResidualJoin> residual_joins;
  std::vector<std::pair<uint32_t, uint32_t>> projection;  // (ref, col)

  size_t join_count() const { return residual_joins.size(); }
  bool operator==(const RewrittenQuery&) const = default;
};

// alias group -> table; a base-table group holds exactly one alias (its own
// t0 self-scan), a non-base group's aliases biject onto the constituents.
struct AliasAssignment {
  TableId table = 0;
  std::vector<uint32_t> aliases;
};

RewrittenQuery apply_rewrite(const QuerySpec& q,
                             const std::vector<AliasAssignment>& assignment,
                             const Catalog& cat);
// Convenience form: one table per alias; aliases sharing a non-base table
// form one group, base-table aliases scan t0 independently.
RewrittenQuery apply_rewrite(const QuerySpec& q,
                             const std::vector<TableId>& alias_tables,
                             const Catalog& cat);
RewrittenQuery baseline_rewrite(const QuerySpec& q, const Catalog& cat);

std::string rewritten_text(const QuerySpec& q, const RewrittenQuery& rw,
                           const Catalog& cat);

struct ResultSet {
  uint32_t arity = 0;
  std::vector<TermId> data;  // row-major
  size_t rows() const { return arity == 0 ? 0 : data.size() / arity; }
};

// Bag equality: order-insensitive, multiplicity-sensitive.
bool results_equal(const ResultSet& a, const ResultSet& b);

}  // namespace rdftune
