#pragma once

#include <optional>
#include <string>

#include "rdftune/agent.hpp"
#include "rdftune/gen.hpp"

#include "json.hpp"

namespace rdftune {

// Everything one pipeline run needs; loaded from a JSON config file.
struct RunConfig {
  std::string data_path;
  std::string workload_path;
  Mode mode = Mode::CostModel;
  std::string out_dir = "out";
  int episodes = 20;
  EnvConfig env;      // mode mirrors `mode`
  AgentConfig agent;  // seed mirrors top-level `seed` when given
};

nlohmann::json run_config_to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// Joint digest of the dataset and workload bytes; a checkpoint is only valid
// for the pair it was trained on.
uint64_t content_hash(const std::string& data_path,
                      const std::string& workload_path);

// Each command returns its summary as JSON (the CLI prints it) and writes its
// report files under cfg.out_dir.
nlohmann::json cmd_ingest(const RunConfig& cfg);
nlohmann::json cmd_train(const RunConfig& cfg);
nlohmann::json cmd_apply(const std::string& checkpoint_path,
                         const std::optional<RunConfig>& override_cfg);
nlohmann::json cmd_bench(const RunConfig& cfg, const std::string& layout_path);
nlohmann::json cmd_gen(const GenConfig& gen_cfg, const std::string& out_dir);

}  // namespace rdftune
