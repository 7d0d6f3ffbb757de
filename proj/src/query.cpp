#include "rdftune/query.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace rdftune {

namespace {

void skip_ws(const std::string& line, size_t& i) {
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
}

[[noreturn]] void fail(size_t lineno, const std::string& what) {
  throw ParseError("line " + std::to_string(lineno) + ": " + what);
}

std::string lex_word(const std::string& line, size_t& i) {
  size_t start = i;
  while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  return line.substr(start, i - start);
}

QEnd lex_endpoint(const std::string& line, size_t& i, size_t lineno,
                  const QuerySpec& q, const char* stop_chars) {
  size_t start = i;
  while (i < line.size() && line[i] != '.' &&
         !std::isspace(static_cast<unsigned char>(line[i])))
    ++i;
  if (i >= line.size() || line[i] != '.') fail(lineno, "expected <alias>.<s|o>");
  std::string alias = line.substr(start, i - start);
  ++i;
  start = i;
  while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
         !strchr(stop_chars, line[i]))
    ++i;
  std::string pos = line.substr(start, i - start);
  if (pos != "s" && pos != "o") fail(lineno, "unknown position token '" + pos + "'");
  for (uint32_t a = 0; a < q.patterns.size(); ++a)
    if (q.patterns[a].alias == alias) return {a, pos == "s" ? Pos::S : Pos::O};
  fail(lineno, "alias '" + alias + "' not declared");
}

// bare unless quoting is needed to survive the lexer
std::string fmt_term(const std::string& t) {
  bool quote = t.empty() || t[0] == '<' || t[0] == '"' || t[0] == '_';
  for (char c : t)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\\')
      quote = true;
  if (!quote) return t;
  std::string out = "\"";
  for (char c : t) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

void finish_query(QuerySpec& q, size_t lineno) {
  if (q.patterns.empty()) fail(lineno, "query '" + q.name + "' has no patterns");
  if (q.projections.empty()) fail(lineno, "query '" + q.name + "' selects nothing");
  std::sort(q.joins.begin(), q.joins.end());
  q.joins.erase(std::unique(q.joins.begin(), q.joins.end()), q.joins.end());
  // the join graph (self-loops aside) must connect every pattern
  std::vector<char> seen(q.patterns.size(), 0);
  std::vector<uint32_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    uint32_t a = stack.back();
    stack.pop_back();
    for (const QJoin& j : q.joins) {
      if (j.a.alias == j.b.alias) continue;
      uint32_t other;
      if (j.a.alias == a)
        other = j.b.alias;
      else if (j.b.alias == a)
        other = j.a.alias;
      else
        continue;
      if (!seen[other]) {
        seen[other] = 1;
        stack.push_back(other);
      }
    }
  }
  if (!std::all_of(seen.begin(), seen.end(), [](char c) { return c; }))
    fail(lineno, "query '" + q.name + "' has a disconnected join graph");
}

}  // namespace

std::vector<QuerySpec> parse_workload(const std::string& text) {
  std::vector<QuerySpec> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  bool open = false;
  QuerySpec q;
  while (std::getline(in, line)) {
    ++lineno;
    size_t i = 0;
    skip_ws(line, i);
    if (i >= line.size() || line[i] == '#') continue;
    std::string kw = lex_word(line, i);
    skip_ws(line, i);
    if (kw == "QUERY") {
      if (open) fail(lineno, "QUERY before previous END");
      q = QuerySpec{};
      q.name = lex_word(line, i);
      if (q.name.empty()) fail(lineno, "QUERY needs a name");
      for (const auto& prev : out)
        if (prev.name == q.name) fail(lineno, "duplicate query name '" + q.name + "'");
      open = true;
      continue;
    }
    if (!open) fail(lineno, "'" + kw + "' outside QUERY...END");
    if (kw == "PATTERN") {
      TriplePattern p;
      p.alias = lex_word(line, i);
      if (p.alias.empty()) fail(lineno, "PATTERN needs an alias");
      for (const auto& other : q.patterns)
        if (other.alias == p.alias) fail(lineno, "duplicate alias '" + p.alias + "'");
      skip_ws(line, i);
      bool have_p = false;
      while (i < line.size() && line[i] != '#') {
        char key = line[i++];
        if (i >= line.size() || line[i] != '=')
          fail(lineno, "expected <p|s|o>=<term> in PATTERN");
        ++i;
        std::string term = lex_term(line, i, lineno);
        if (key == 'p') {
          if (have_p) fail(lineno, "duplicate p= field");
          p.predicate = term;
          have_p = true;
        } else if (key == 's') {
          if (p.s_const) fail(lineno, "duplicate s= field");
          p.s_const = term;
        } else if (key == 'o') {
          if (p.o_const) fail(lineno, "duplicate o= field");
          p.o_const = term;
        } else {
          fail(lineno, std::string("unknown pattern field '") + key + "'");
        }
        skip_ws(line, i);
      }
      if (!have_p) fail(lineno, "PATTERN requires a constant p= predicate");
      q.patterns.push_back(std::move(p));
    } else if (kw == "JOIN") {
      QEnd a = lex_endpoint(line, i, lineno, q, "=");
      skip_ws(line, i);
      if (i >= line.size() || line[i] != '=') fail(lineno, "expected '=' in JOIN");
      ++i;
      skip_ws(line, i);
      QEnd b = lex_endpoint(line, i, lineno, q, "");
      if (a == b) fail(lineno, "JOIN endpoints must differ");
      q.joins.push_back(q.canonical_join(a, b));
    } else if (kw == "SELECT") {
      while (true) {
        q.projections.push_back(lex_endpoint(line, i, lineno, q, ","));
        skip_ws(line, i);
        if (i < line.size() && line[i] == ',') {
          ++i;
          skip_ws(line, i);
          continue;
        }
        break;
      }
      if (i < line.size() && line[i] != '#') fail(lineno, "trailing content in SELECT");
    } else if (kw == "END") {
      finish_query(q, lineno);
      out.push_back(std::move(q));
      open = false;
    } else {
      fail(lineno, "unknown keyword '" + kw + "'");
    }
  }
  if (open) fail(lineno, "missing END for query '" + q.name + "'");
  if (out.empty()) throw ParseError("workload holds no queries");
  return out;
}

std::vector<QuerySpec> load_workload(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open workload file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_workload(buf.str());
}

std::string workload_text(const std::vector<QuerySpec>& queries) {
  std::string out;
  for (const QuerySpec& q : queries) {
    out += "QUERY " + q.name + "\n";
    for (const TriplePattern& p : q.patterns) {
      out += "PATTERN " + p.alias + " p=" + fmt_term(p.predicate);
      if (p.s_const) out += " s=" + fmt_term(*p.s_const);
      if (p.o_const) out += " o=" + fmt_term(*p.o_const);
      out += "\n";
    }
    for (const QJoin& j : q.joins)
      out += "JOIN " + q.endpoint_text(j.a) + "=" + q.endpoint_text(j.b) + "\n";
    out += "SELECT ";
    for (size_t i = 0; i < q.projections.size(); ++i) {
      if (i) out += ", ";
      out += q.endpoint_text(q.projections[i]);
    }
    out += "\nEND\n";
  }
  return out;
}

namespace {

// equality closure over a merged table's build conditions
bool cond_enforced(const TableDef& def, const CondEnd& x, const CondEnd& y) {
  std::map<CondEnd, uint32_t> node;
  auto id = [&](const CondEnd& e) {
    return node.emplace(e, static_cast<uint32_t>(node.size())).first->second;
  };
  for (const TableCond& c : def.conds) {
    id(c.a);
    id(c.b);
  }
  std::vector<uint32_t> parent(node.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](uint32_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const TableCond& c : def.conds) {
    uint32_t a = find(node.at(c.a)), b = find(node.at(c.b));
    if (a != b) parent[a] = b;
  }
  auto ix = node.find(x);
  auto iy = node.find(y);
  if (ix == node.end() || iy == node.end()) return false;
  return find(ix->second) == find(iy->second);
}

}  // namespace

RewrittenQuery apply_rewrite(const QuerySpec& q,
                             const std::vector<AliasAssignment>& assignment,
                             const Catalog& cat) {
  const size_t n = q.patterns.size();
  std::vector<uint32_t> group_of(n, UINT32_MAX);
  for (size_t gi = 0; gi < assignment.size(); ++gi) {
    for (uint32_t a : assignment[gi].aliases) {
      if (a >= n) throw ValidationError("rewrite names an alias the query lacks");
      if (group_of[a] != UINT32_MAX)
        throw ValidationError("alias '" + q.patterns[a].alias + "' covered twice");
      group_of[a] = static_cast<uint32_t>(gi);
    }
  }
  for (size_t a = 0; a < n; ++a)
    if (group_of[a] == UINT32_MAX)
      throw ValidationError("alias '" + q.patterns[a].alias + "' left uncovered");

  RewrittenQuery rw;
  rw.locs.resize(n);
  for (size_t gi = 0; gi < assignment.size(); ++gi) {
    const AliasAssignment& g = assignment[gi];
    const Table& t = cat.table(g.table);
    rw.refs.push_back({g.table, g.aliases});
    if (t.def.kind == TableKind::Base) {
      if (g.aliases.size() != 1)
        throw ValidationError("a base-table ref serves exactly one alias");
      rw.locs[g.aliases[0]] = {static_cast<uint32_t>(gi), 0, 2};
      continue;
    }
    if (g.aliases.size() != t.def.constituents.size())
      throw ValidationError("table " + t.def.name +
                            " does not exactly cover its assigned aliases");
    std::vector<char> used(t.def.constituents.size(), 0);
    for (uint32_t a : g.aliases) {
      PredCode code = cat.pred_code(q.patterns[a].predicate);
      uint32_t j = UINT32_MAX;
      for (uint32_t k = 0; k < t.def.constituents.size(); ++k)
        if (t.def.constituents[k] == code && !used[k]) {
          j = k;
          break;
        }
      if (code == 0 || j == UINT32_MAX)
        throw ValidationError("alias '" + q.patterns[a].alias +
                              "' has no matching constituent in " + t.def.name);
      used[j] = 1;
      rw.locs[a] = {static_cast<uint32_t>(gi), 2 * j, 2 * j + 1};
    }
  }

  auto col_of = [&](const QEnd& e) {
    return e.pos == Pos::S ? rw.locs[e.alias].s_col : rw.locs[e.alias].o_col;
  };

  for (uint32_t a = 0; a < n; ++a) {
    const TriplePattern& p = q.patterns[a];
    const RewrittenQuery::AliasLoc& loc = rw.locs[a];
    if (cat.table(rw.refs[loc.ref].table).def.kind == TableKind::Base)
      rw.filters.push_back({loc.ref, 1, p.predicate});
    if (p.s_const) rw.filters.push_back({loc.ref, loc.s_col, *p.s_const});
    if (p.o_const) rw.filters.push_back({loc.ref, loc.o_col, *p.o_const});
  }

  for (const QJoin& j : q.joins) {
    uint32_t ra = rw.locs[j.a.alias].ref, rb = rw.locs[j.b.alias].ref;
    if (j.a.alias == j.b.alias) {
      rw.eq_filters.push_back({ra, col_of(j.a), col_of(j.b)});
      continue;
    }
    if (ra == rb) {
      const TableDef& def = cat.table(rw.refs[ra].table).def;
      CondEnd x{cat.pred_code(q.patterns[j.a.alias].predicate), j.a.pos};
      CondEnd y{cat.pred_code(q.patterns[j.b.alias].predicate), j.b.pos};
      if (!cond_enforced(def, x, y))
        throw ValidationError("join " + q.endpoint_text(j.a) + "=" +
                              q.endpoint_text(j.b) + " is not enforced by " +
                              def.name);
      continue;  // materialization already applied it
    }
    rw.residual_joins.push_back({ra, col_of(j.a), rb, col_of(j.b)});
  }

  for (const QEnd& e : q.projections)
    rw.projection.emplace_back(rw.locs[e.alias].ref, col_of(e));
  return rw;
}

RewrittenQuery apply_rewrite(const QuerySpec& q,
                             const std::vector<TableId>& alias_tables,
                             const Catalog& cat) {
  if (alias_tables.size() != q.patterns.size())
    throw ValidationError("rewrite must assign every alias a table");
  std::vector<AliasAssignment> groups;
  for (uint32_t a = 0; a < alias_tables.size(); ++a) {
    TableId tid = alias_tables[a];
    bool grouped = false;
    if (cat.table(tid).def.kind != TableKind::Base) {
      for (auto& g : groups)
        if (g.table == tid) {
          g.aliases.push_back(a);
          grouped = true;
          break;
        }
    }
    if (!grouped) groups.push_back({tid, {a}});
  }
  return apply_rewrite(q, groups, cat);
}

RewrittenQuery baseline_rewrite(const QuerySpec& q, const Catalog& cat) {
  return apply_rewrite(q, std::vector<TableId>(q.patterns.size(), 0), cat);
}

std::string rewritten_text(const QuerySpec&, const RewrittenQuery& rw,
                           const Catalog& cat) {
  std::vector<std::string> display(rw.refs.size()), from(rw.refs.size());
  for (size_t i = 0; i < rw.refs.size(); ++i) {
    const std::string& tname = cat.table(rw.refs[i].table).def.name;
    size_t uses = 0;
    for (const auto& r : rw.refs) uses += (r.table == rw.refs[i].table);
    if (uses == 1) {
      display[i] = from[i] = tname;
    } else {
      display[i] = "r" + std::to_string(i);
      from[i] = tname + " " + display[i];
    }
  }
  auto col = [&](uint32_t ref, uint32_t c) {
    return display[ref] + "." + cat.table(rw.refs[ref].table).def.column_name(c);
  };
  std::string out = "select ";
  for (size_t i = 0; i < rw.projection.size(); ++i) {
    if (i) out += ", ";
    out += col(rw.projection[i].first, rw.projection[i].second);
  }
  out += " from ";
  for (size_t i = 0; i < from.size(); ++i) {
    if (i) out += ", ";
    out += from[i];
  }
  std::vector<std::string> where;
  for (const auto& f : rw.filters)
    where.push_back(col(f.ref, f.col) + " = '" + f.value + "'");
  for (const auto& e : rw.eq_filters)
    where.push_back(col(e.ref, e.col_a) + " = " + col(e.ref, e.col_b));
  for (const auto& j : rw.residual_joins)
    where.push_back(col(j.ref_a, j.col_a) + " = " + col(j.ref_b, j.col_b));
  for (size_t i = 0; i < where.size(); ++i)
    out += (i == 0 ? " where " : " and ") + where[i];
  return out;
}

bool results_equal(const ResultSet& a, const ResultSet& b) {
  if (a.arity != b.arity) throw ValidationError("result arity mismatch");
  if (a.data.size() != b.data.size()) return false;
  if (a.arity == 0) return true;
  const size_t n = a.rows(), k = a.arity;
  std::vector<uint32_t> ia(n), ib(n);
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  auto order = [k](const std::vector<TermId>& d) {
    return [&d, k](uint32_t x, uint32_t y) {
      return std::lexicographical_compare(d.begin() + x * k, d.begin() + (x + 1) * k,
                                          d.begin() + y * k, d.begin() + (y + 1) * k);
    };
  };
  std::sort(ia.begin(), ia.end(), order(a.data));
  std::sort(ib.begin(), ib.end(), order(b.data));
  for (size_t r = 0; r < n; ++r)
    for (size_t c = 0; c < k; ++c)
      if (a.data[ia[r] * k + c] != b.data[ib[r] * k + c]) return false;
  return true;
}

}  // namespace rdftune
