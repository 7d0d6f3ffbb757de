#include "rdftune/commands.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdftune/rewriter.hpp"

namespace rdftune {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ExecError("cannot write file: " + path);
  f << text;
  if (!f) throw ExecError("write failed: " + path);
}

std::string hash_hex(uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string mode_name(Mode m) { return m == Mode::CostModel ? "cost" : "wall"; }

Mode mode_from(const std::string& s) {
  if (s == "cost") return Mode::CostModel;
  if (s == "wall") return Mode::WallClock;
  throw ValidationError("mode must be 'cost' or 'wall', got '" + s + "'");
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += "\"";
  return out;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  return out;
}

nlohmann::json load_json_file(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError("invalid JSON in " + path);
  return j;
}

// Items ranked fastest-first, one CSV per query; computed on a scratch copy
// of the catalog so exporting the full list never alters the live layout.
void export_priority_csvs(const Catalog& cat, const std::vector<QuerySpec>& wl,
                          Mode mode, int repeats, const std::string& out_dir) {
  Catalog scratch = cat;
  for (const QuerySpec& q : wl) {
    PriorityList pl(q, generate_table_sequence(q, scratch), scratch);
    pl.time_all(scratch, mode, repeats);
    std::string csv = "rank,table_ids,join_count,execute_time,rewritten_query_text\n";
    int rank = 0;
    for (size_t idx : pl.ranked(mode)) {
      const PriorityItem& item = pl.items()[idx];
      std::string ids;
      for (const TableKey& k : item.tables) {
        if (!ids.empty()) ids += "+";
        ids += scratch.table(*scratch.find(k)).def.name;
      }
      for (size_t i = 0; i < item.t0_aliases.size(); i++) {
        if (!ids.empty()) ids += "+";
        ids += "t0";
      }
      RewrittenQuery rw = pl.materialize(scratch, item);
      csv += std::to_string(++rank) + "," + csv_quote(ids) + "," +
             std::to_string(rw.join_count()) + "," + fmt17(item.meas.metric(mode)) +
             "," + csv_quote(rewritten_text(q, rw, scratch)) + "\n";
    }
    write_file(out_dir + "/priority_" + safe_name(q.name) + ".csv", csv);
  }
}

}  // namespace

nlohmann::json run_config_to_json(const RunConfig& c) {
  return {{"data", c.data_path},
          {"workload", c.workload_path},
          {"mode", mode_name(c.mode)},
          {"out_dir", c.out_dir},
          {"episodes", c.episodes},
          {"seed", c.agent.seed},
          {"env",
           {{"vector_dim", c.env.vector_dim},
            {"max_steps", c.env.max_steps},
            {"repeats", c.env.repeats},
            {"reward_scale", c.env.reward_scale}}},
          {"agent", c.agent}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  c.data_path = j.value("data", "");
  c.workload_path = j.value("workload", "");
  c.mode = mode_from(j.value("mode", "cost"));
  c.out_dir = j.value("out_dir", "out");
  c.episodes = j.value("episodes", 20);
  if (j.contains("env")) {
    const auto& e = j.at("env");
    c.env.vector_dim = e.value("vector_dim", c.env.vector_dim);
    c.env.max_steps = e.value("max_steps", c.env.max_steps);
    c.env.repeats = e.value("repeats", c.env.repeats);
    c.env.reward_scale = e.value("reward_scale", c.env.reward_scale);
  }
  if (j.contains("agent")) c.agent = j.at("agent").get<AgentConfig>();
  if (j.contains("seed")) c.agent.seed = j.at("seed").get<uint64_t>();
  c.env.mode = c.mode;
  if (c.data_path.empty() || c.workload_path.empty())
    throw ValidationError("config needs 'data' and 'workload' paths");
  if (c.episodes < 0) throw ValidationError("episodes must be non-negative");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_json(load_json_file(path));
}

uint64_t content_hash(const std::string& data_path,
                      const std::string& workload_path) {
  return fnv1a(read_file(workload_path), fnv1a(read_file(data_path)));
}

nlohmann::json cmd_ingest(const RunConfig& cfg) {
  Catalog cat = Catalog::load_ntriples(cfg.data_path);
  std::vector<QuerySpec> wl = load_workload(cfg.workload_path);
  size_t patterns = 0;
  for (const QuerySpec& q : wl) patterns += q.patterns.size();
  return {{"triples", cat.table(0).rows()},
          {"predicates", cat.predicate_count()},
          {"queries", wl.size()},
          {"patterns", patterns},
          {"predicate_dict", cat.predicate_dict()},
          {"content_hash", hash_hex(content_hash(cfg.data_path, cfg.workload_path))}};
}

nlohmann::json cmd_train(const RunConfig& cfg) {
  Catalog cat = Catalog::load_ntriples(cfg.data_path);
  std::vector<QuerySpec> wl = load_workload(cfg.workload_path);
  EnvConfig ecfg = cfg.env;
  ecfg.mode = cfg.mode;
  Env env(cat, wl, ecfg);
  Agent agent(static_cast<int>(ecfg.vector_dim),
              static_cast<int>(env.actions().size()), cfg.agent);

  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream trace(cfg.out_dir + "/trace.jsonl", std::ios::binary);
  if (!trace) throw ExecError("cannot write trace file in " + cfg.out_dir);
  TrainReport report = agent.train(env, cfg.episodes, &trace);
  trace.close();

  std::string csv = "episode,t1,t2,improvement,space_rows,epsilon\n";
  for (const EpisodeRow& r : report.episodes)
    csv += std::to_string(r.episode) + "," + fmt17(r.t1) + "," + fmt17(r.t2) + "," +
           fmt17(r.improvement) + "," + std::to_string(r.space_rows) + "," +
           fmt17(r.epsilon) + "\n";
  write_file(cfg.out_dir + "/episodes.csv", csv);
  write_file(cfg.out_dir + "/layout.json", report.best_layout.dump(2) + "\n");

  nlohmann::json checkpoint = {
      {"format_version", 1},
      {"content_hash", hash_hex(content_hash(cfg.data_path, cfg.workload_path))},
      {"predicate_dict", cat.predicate_dict()},
      {"run_config", run_config_to_json(cfg)},
      {"baseline_time", report.baseline_time},
      {"best_time", report.best_time},
      {"best_rows", report.best_rows},
      {"best_layout", report.best_layout},
      {"agent", agent.to_json()}};
  write_file(cfg.out_dir + "/checkpoint.json", checkpoint.dump(2) + "\n");

  double improvement = report.baseline_time > 0
                           ? (report.baseline_time - report.best_time) /
                                 report.baseline_time
                           : 0.0;
  return {{"episodes", report.episodes.size()},
          {"actions", env.actions().size()},
          {"baseline_time", report.baseline_time},
          {"best_time", report.best_time},
          {"improvement", improvement},
          {"space_rows", report.best_rows},
          {"checkpoint", cfg.out_dir + "/checkpoint.json"},
          {"layout", cfg.out_dir + "/layout.json"},
          {"episodes_csv", cfg.out_dir + "/episodes.csv"},
          {"trace", cfg.out_dir + "/trace.jsonl"}};
}

nlohmann::json cmd_apply(const std::string& checkpoint_path,
                         const std::optional<RunConfig>& override_cfg) {
  nlohmann::json ck = load_json_file(checkpoint_path);
  if (!ck.contains("content_hash") || !ck.contains("best_layout") ||
      !ck.contains("run_config"))
    throw ValidationError("checkpoint misses required fields");
  RunConfig cfg = override_cfg ? *override_cfg
                               : run_config_from_json(ck.at("run_config"));

  std::string have = hash_hex(content_hash(cfg.data_path, cfg.workload_path));
  std::string want = ck.at("content_hash").get<std::string>();
  if (have != want)
    throw HashMismatchError("checkpoint was trained on different inputs (hash " +
                            want + ", current " + have + ")");

  Catalog cat = Catalog::load_ntriples(cfg.data_path);
  std::vector<QuerySpec> wl = load_workload(cfg.workload_path);
  cat.materialize_layout(ck.at("best_layout"));

  std::filesystem::create_directories(cfg.out_dir);
  std::string sql;
  nlohmann::json per_query = nlohmann::json::array();
  for (const QuerySpec& q : wl) {
    PriorityList pl(q, generate_table_sequence(q, cat), cat);
    PriorityList::Choice best = pl.select(cat, cfg.mode, cfg.env.repeats);
    sql += "-- " + q.name + "\n" + rewritten_text(q, best.rw, cat) + "\n\n";
    per_query.push_back({{"query", q.name},
                         {"time", best.time},
                         {"joins", best.rw.join_count()},
                         {"fallback", best.item < 0}});
  }
  write_file(cfg.out_dir + "/rewritten.sql", sql);
  write_file(cfg.out_dir + "/applied_layout.json", cat.layout_json().dump(2) + "\n");

  return {{"tables", cat.table_count()},
          {"space_rows", cat.total_rows()},
          {"queries", per_query},
          {"rewritten", cfg.out_dir + "/rewritten.sql"},
          {"layout", cfg.out_dir + "/applied_layout.json"}};
}

nlohmann::json cmd_bench(const RunConfig& cfg, const std::string& layout_path) {
  Catalog cat = Catalog::load_ntriples(cfg.data_path);
  std::vector<QuerySpec> wl = load_workload(cfg.workload_path);
  if (!layout_path.empty()) cat.materialize_layout(load_json_file(layout_path));

  std::filesystem::create_directories(cfg.out_dir);
  std::string csv = "query,t1,t2,improvement\n";
  nlohmann::json rows = nlohmann::json::array();
  double total_t1 = 0, total_t2 = 0;
  for (const QuerySpec& q : wl) {
    PriorityList pl(q, generate_table_sequence(q, cat), cat);
    double t1 = pl.baseline(cat, cfg.mode, cfg.env.repeats).time;
    double t2 = pl.select(cat, cfg.mode, cfg.env.repeats).time;
    double imp = t1 > 0 ? (t1 - t2) / t1 : 0.0;
    total_t1 += t1;
    total_t2 += t2;
    csv += csv_quote(q.name) + "," + fmt17(t1) + "," + fmt17(t2) + "," + fmt17(imp) +
           "\n";
    rows.push_back(
        {{"query", q.name}, {"t1", t1}, {"t2", t2}, {"improvement", imp}});
  }
  double total_imp = total_t1 > 0 ? (total_t1 - total_t2) / total_t1 : 0.0;
  csv += "TOTAL," + fmt17(total_t1) + "," + fmt17(total_t2) + "," +
         fmt17(total_imp) + "\n";
  write_file(cfg.out_dir + "/bench.csv", csv);

  nlohmann::json report = {{"mode", mode_name(cfg.mode)},
                           {"repeats", cfg.env.repeats},
                           {"queries", rows},
                           {"total_t1", total_t1},
                           {"total_t2", total_t2},
                           {"improvement", total_imp},
                           {"space_rows", cat.total_rows()},
                           {"tables", cat.table_count()}};
  write_file(cfg.out_dir + "/bench.json", report.dump(2) + "\n");

  export_priority_csvs(cat, wl, cfg.mode, cfg.env.repeats, cfg.out_dir);
  return report;
}

nlohmann::json cmd_gen(const GenConfig& gen_cfg, const std::string& out_dir) {
  Generated g = generate(gen_cfg);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/data.nt", g.ntriples_text);
  write_file(out_dir + "/workload.txt", g.workload_file_text);
  return {{"shape", gen_cfg.shape},
          {"triples", g.triples.size()},
          {"predicates", gen_cfg.predicates},
          {"queries", g.workload.size()},
          {"data", out_dir + "/data.nt"},
          {"workload", out_dir + "/workload.txt"}};
}

}  // namespace rdftune
