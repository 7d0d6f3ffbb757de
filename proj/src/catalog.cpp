#include "rdftune/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <span>
#include <sstream>

#include "rdftune/kernels.hpp"

namespace rdftune {

TableKey TableKey::merged(std::vector<PredCode> ps, std::vector<TableCond> cs) {
  TableKey k;
  k.kind = TableKind::Merged;
  std::sort(ps.begin(), ps.end());
  std::sort(cs.begin(), cs.end());
  k.preds = std::move(ps);
  k.conds = std::move(cs);
  return k;
}

size_t TableDef::column_count() const {
  if (kind == TableKind::Base) return 3;
  return 2 * constituents.size();
}

std::string TableDef::column_name(size_t idx) const {
  if (kind == TableKind::Base) {
    static const char* base_names[] = {"s", "p", "o"};
    return base_names[idx];
  }
  size_t group = idx / 2;
  std::string name;
  if (group > 0) name.push_back(static_cast<char>('a' + group));
  name.push_back(idx % 2 == 0 ? 's' : 'o');
  return name;
}

uint32_t TableDef::column_of(PredCode pred, Pos pos) const {
  for (size_t i = 0; i < constituents.size(); ++i) {
    if (constituents[i] == pred)
      return static_cast<uint32_t>(2 * i + (pos == Pos::S ? 0 : 1));
  }
  throw ValidationError("table " + name + " has no constituent with predicate code " +
                        std::to_string(pred));
}

TableKey TableDef::key() const {
  switch (kind) {
    case TableKind::Base:
      return TableKey::base();
    case TableKind::Divided:
      return TableKey::divided(constituents.at(0));
    case TableKind::Merged:
      return TableKey::merged(constituents, {conds.begin(), conds.end()});
  }
  throw ValidationError("corrupt table kind");
}

// One term token: IRI in <>, literal in "" (with escapes, optional ^^<type>
// or @lang suffix), or a bare token (blank nodes, plain words). Delimiters
// are stripped; the suffix stays part of the literal's string.
std::string lex_term(const std::string& line, size_t& i, size_t lineno) {
  auto fail = [&](const std::string& what) -> std::string {
    throw ParseError("line " + std::to_string(lineno) + ": " + what);
  };
  if (i >= line.size()) return fail("expected term, found end of line");
  char c = line[i];
  if (c == '<') {
    size_t end = line.find('>', i + 1);
    if (end == std::string::npos) return fail("unterminated IRI");
    std::string t = line.substr(i + 1, end - i - 1);
    i = end + 1;
    return t;
  }
  if (c == '"') {
    std::string t;
    ++i;
    while (true) {
      if (i >= line.size()) return fail("unterminated literal");
      char ch = line[i++];
      if (ch == '"') break;
      if (ch != '\\') {
        t.push_back(ch);
        continue;
      }
      if (i >= line.size()) return fail("dangling escape in literal");
      char esc = line[i++];
      switch (esc) {
        case 't': t.push_back('\t'); break;
        case 'n': t.push_back('\n'); break;
        case 'r': t.push_back('\r'); break;
        case '"': t.push_back('"'); break;
        case '\\': t.push_back('\\'); break;
        default: return fail(std::string("unsupported escape \\") + esc);
      }
    }
    // keep any datatype/lang suffix verbatim so typed literals stay distinct
    if (i < line.size() && line[i] == '@') {
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
        t.push_back(line[i++]);
    } else if (i + 1 < line.size() && line[i] == '^' && line[i + 1] == '^') {
      t += "^^";
      i += 2;
      if (i >= line.size() || line[i] != '<') return fail("malformed datatype suffix");
      size_t end = line.find('>', i + 1);
      if (end == std::string::npos) return fail("unterminated datatype IRI");
      t += line.substr(i + 1, end - i - 1);
      i = end + 1;
    }
    return t;
  }
  size_t start = i;
  while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  std::string t = line.substr(start, i - start);
  if (t == ".") return fail("expected term before '.'");
  return t;
}

namespace {

void skip_ws(const std::string& line, size_t& i) {
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
}

}  // namespace

std::vector<Triple> parse_ntriples(const std::string& text) {
  std::vector<Triple> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t i = 0;
    skip_ws(line, i);
    if (i >= line.size() || line[i] == '#') continue;
    Triple t;
    t.s = lex_term(line, i, lineno);
    skip_ws(line, i);
    t.p = lex_term(line, i, lineno);
    skip_ws(line, i);
    t.o = lex_term(line, i, lineno);
    skip_ws(line, i);
    if (i >= line.size() || line[i] != '.')
      throw ParseError("line " + std::to_string(lineno) + ": missing terminating '.'");
    ++i;
    skip_ws(line, i);
    if (i < line.size() && line[i] != '#')
      throw ParseError("line " + std::to_string(lineno) + ": trailing content after '.'");
    out.push_back(std::move(t));
  }
  return out;
}

Catalog Catalog::load_ntriples(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open data file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  auto triples = parse_ntriples(buf.str());
  if (triples.empty()) throw ParseError("data file holds no triples: " + path);
  return from_triples(triples);
}

Catalog Catalog::from_triples(const std::vector<Triple>& triples) {
  Catalog c;
  c.pred_names_.emplace_back();  // code 0 unused
  c.pred_terms_.push_back(kNoTerm);
  Table t0;
  t0.def.id = 0;
  t0.def.name = "t0";
  t0.def.kind = TableKind::Base;
  t0.cols.resize(3);
  for (auto& col : t0.cols) col.reserve(triples.size());
  for (const auto& tr : triples) {
    TermId s = c.intern(tr.s), p = c.intern(tr.p), o = c.intern(tr.o);
    t0.cols[0].push_back(s);
    t0.cols[1].push_back(p);
    t0.cols[2].push_back(o);
    if (!c.pred_dict_.count(tr.p)) {
      PredCode code = static_cast<PredCode>(c.pred_names_.size());
      c.pred_dict_[tr.p] = code;
      c.pred_names_.push_back(tr.p);
      c.pred_terms_.push_back(p);
    }
  }
  c.tables_.push_back(std::move(t0));
  c.by_key_[TableKey::base()] = 0;
  return c;
}

TermId Catalog::intern(const std::string& t) {
  auto it = term_ids_.find(t);
  if (it != term_ids_.end()) return it->second;
  TermId id = static_cast<TermId>(term_names_.size());
  term_names_.push_back(t);
  term_ids_.emplace(t, id);
  return id;
}

TableId Catalog::add_table(Table t) {
  TableId id = static_cast<TableId>(tables_.size());
  t.def.id = id;
  t.def.name = "t" + std::to_string(id);
  by_key_[t.def.key()] = id;
  tables_.push_back(std::move(t));
  return id;
}

PredCode Catalog::pred_code(const std::string& predicate) const {
  auto it = pred_dict_.find(predicate);
  return it == pred_dict_.end() ? 0 : it->second;
}

const std::string& Catalog::pred_name(PredCode code) const {
  if (code == 0 || code >= pred_names_.size())
    throw ValidationError("unknown predicate code " + std::to_string(code));
  return pred_names_[code];
}

TermId Catalog::term(const std::string& t) const {
  auto it = term_ids_.find(t);
  return it == term_ids_.end() ? kNoTerm : it->second;
}

TableId Catalog::divide(PredCode p) {
  if (p == 0 || p >= pred_names_.size())
    throw ValidationError("divide: unknown predicate code " + std::to_string(p));
  if (by_key_.count(TableKey::divided(p)))
    throw ValidationError("divide: predicate '" + pred_names_[p] + "' already divided");
  const Table& base = tables_[0];
  kernels::ScanPredicate eq{base.cols[1].data(), pred_terms_[p]};
  auto idx = kernels::scan_filter(base.rows(), std::span(&eq, 1), {});
  Table t;
  t.def.kind = TableKind::Divided;
  t.def.constituents = {p};
  t.cols.resize(2);
  t.cols[0].resize(idx.size());
  t.cols[1].resize(idx.size());
  kernels::gather(base.cols[0].data(), idx, t.cols[0].data());
  kernels::gather(base.cols[2].data(), idx, t.cols[1].data());
  return add_table(std::move(t));
}

TableId Catalog::divide(const std::string& predicate) {
  PredCode p = pred_code(predicate);
  if (p == 0) throw ValidationError("divide: unknown predicate '" + predicate + "'");
  return divide(p);
}

TableId Catalog::merge(TableId left, TableId right, const TableCond& cond) {
  if (left >= tables_.size() || right >= tables_.size())
    throw ValidationError("merge: unknown table id");
  if (left == 0 || right == 0) throw ValidationError("merge: t0 cannot be merged");
  if (left == right) throw ValidationError("merge: a table cannot merge with itself");
  const Table& lt = tables_[left];
  const Table& rt = tables_[right];
  for (PredCode p : lt.def.constituents)
    for (PredCode q : rt.def.constituents)
      if (p == q)
        throw ValidationError("merge: predicate '" + pred_names_[p] +
                              "' would appear twice");
  // resolve which endpoint lives in which input
  auto has_pred = [](const TableDef& d, PredCode p) {
    return std::find(d.constituents.begin(), d.constituents.end(), p) !=
           d.constituents.end();
  };
  CondEnd le, re;
  if (has_pred(lt.def, cond.a.pred) && has_pred(rt.def, cond.b.pred)) {
    le = cond.a;
    re = cond.b;
  } else if (has_pred(lt.def, cond.b.pred) && has_pred(rt.def, cond.a.pred)) {
    le = cond.b;
    re = cond.a;
  } else {
    throw ValidationError("merge: condition does not connect the two tables");
  }

  Table t;
  t.def.kind = TableKind::Merged;
  t.def.constituents = lt.def.constituents;
  t.def.constituents.insert(t.def.constituents.end(), rt.def.constituents.begin(),
                            rt.def.constituents.end());
  t.def.conds = lt.def.conds;
  t.def.conds.insert(rt.def.conds.begin(), rt.def.conds.end());
  t.def.conds.insert(cond);
  t.def.left = left;
  t.def.right = right;
  t.def.built_with = cond;
  if (by_key_.count(t.def.key()))
    throw ValidationError("merge: an equivalent table already exists");

  auto digest = [](const std::vector<TermId>& col) {
    std::vector<uint64_t> keys(col.size());
    for (size_t i = 0; i < col.size(); ++i) keys[i] = splitmix64(col[i]);
    return keys;
  };
  auto lkey = digest(lt.cols[lt.def.column_of(le.pred, le.pos)]);
  auto rkey = digest(rt.cols[rt.def.column_of(re.pred, re.pos)]);
  // splitmix64 is injective, so single-column digests need no verification
  bool build_left = lt.rows() <= rt.rows();
  kernels::JoinPairs pairs = build_left ? kernels::hash_join(lkey, rkey, {}, {}, 0)
                                        : kernels::hash_join(rkey, lkey, {}, {}, 0);
  const auto& lrows = build_left ? pairs.build_rows : pairs.probe_rows;
  const auto& rrows = build_left ? pairs.probe_rows : pairs.build_rows;

  t.cols.resize(t.def.column_count());
  for (size_t ci = 0; ci < lt.cols.size(); ++ci) {
    t.cols[ci].resize(lrows.size());
    kernels::gather(lt.cols[ci].data(), lrows, t.cols[ci].data());
  }
  for (size_t ci = 0; ci < rt.cols.size(); ++ci) {
    auto& dst = t.cols[lt.cols.size() + ci];
    dst.resize(rrows.size());
    kernels::gather(rt.cols[ci].data(), rrows, dst.data());
  }
  return add_table(std::move(t));
}

void Catalog::reset_to_base() {
  tables_.resize(1);
  by_key_.clear();
  by_key_[TableKey::base()] = 0;
}

const Table& Catalog::table(TableId id) const {
  if (id >= tables_.size())
    throw ValidationError("unknown table id " + std::to_string(id));
  return tables_[id];
}

std::optional<TableId> Catalog::find(const TableKey& key) const {
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

uint64_t Catalog::total_rows() const {
  uint64_t n = 0;
  for (const auto& t : tables_) n += t.rows();
  return n;
}

namespace {

nlohmann::json cond_json(const Catalog& c, const TableCond& cond) {
  auto end_json = [&](const CondEnd& e) {
    return nlohmann::json{{"predicate", c.pred_name(e.pred)},
                          {"column", e.pos == Pos::S ? "s" : "o"}};
  };
  return nlohmann::json{{"a", end_json(cond.a)}, {"b", end_json(cond.b)}};
}

TableCond cond_from_json(const Catalog& c, const nlohmann::json& j) {
  auto end_from = [&](const nlohmann::json& e) {
    PredCode p = c.pred_code(e.at("predicate").get<std::string>());
    if (p == 0)
      throw ValidationError("layout references unknown predicate '" +
                            e.at("predicate").get<std::string>() + "'");
    std::string col = e.at("column").get<std::string>();
    if (col != "s" && col != "o")
      throw ValidationError("layout condition column must be 's' or 'o'");
    return CondEnd{p, col == "s" ? Pos::S : Pos::O};
  };
  return TableCond(end_from(j.at("a")), end_from(j.at("b")));
}

}  // namespace

nlohmann::json Catalog::layout_json() const {
  nlohmann::json tables = nlohmann::json::array();
  for (size_t i = 1; i < tables_.size(); ++i) {
    const TableDef& d = tables_[i].def;
    nlohmann::json jt{{"name", d.name}, {"rows", tables_[i].rows()}};
    if (d.kind == TableKind::Divided) {
      jt["kind"] = "divided";
      jt["predicate"] = pred_name(d.constituents[0]);
    } else {
      jt["kind"] = "merged";
      jt["left"] = tables_[d.left].def.name;
      jt["right"] = tables_[d.right].def.name;
      jt["cond"] = cond_json(*this, d.built_with);
      nlohmann::json preds = nlohmann::json::array();
      for (PredCode p : d.constituents) preds.push_back(pred_name(p));
      jt["constituents"] = preds;
    }
    tables.push_back(std::move(jt));
  }
  nlohmann::json dict = nlohmann::json::object();
  for (const auto& [name, code] : pred_dict_) dict[name] = code;
  return nlohmann::json{{"base_rows", tables_[0].rows()},
                        {"predicates", dict},
                        {"tables", std::move(tables)}};
}

void Catalog::materialize_layout(const nlohmann::json& layout) {
  if (tables_.size() != 1)
    throw ValidationError("layout can only be applied to a pristine catalog");
  std::unordered_map<std::string, TableId> by_name{{"t0", 0}};
  for (const auto& jt : layout.at("tables")) {
    std::string kind = jt.at("kind").get<std::string>();
    TableId id;
    if (kind == "divided") {
      id = divide(jt.at("predicate").get<std::string>());
    } else if (kind == "merged") {
      auto lookup = [&](const std::string& key) {
        auto it = by_name.find(jt.at(key).get<std::string>());
        if (it == by_name.end())
          throw ValidationError("layout references undefined table '" +
                                jt.at(key).get<std::string>() + "'");
        return it->second;
      };
      id = merge(lookup("left"), lookup("right"), cond_from_json(*this, jt.at("cond")));
    } else {
      throw ValidationError("layout table kind must be 'divided' or 'merged'");
    }
    by_name[jt.at("name").get<std::string>()] = id;
  }
}

}  // namespace rdftune
