#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "rdftune/commands.hpp"
#include "rdftune/kernels.hpp"

namespace {

// 0 ok, 2 parse, 3 validation, 4 checkpoint/input mismatch, 5 runtime
int run(int argc, char** argv) {
  CLI::App app{"Workload-driven storage layout optimizer for RDF triple data"};
  app.require_subcommand(1);
  int threads = -1;
  app.add_option("--threads", threads,
                 "kernel threads (0 = serial reference implementation)");

  std::string data, workload, config_path, checkpoint, layout, out_dir = "out";

  CLI::App* ingest = app.add_subcommand("ingest", "parse inputs, report summary");
  ingest->add_option("--data", data, "N-Triples file")->required();
  ingest->add_option("--workload", workload, "workload file")->required();

  CLI::App* train = app.add_subcommand("train", "learn a layout for a workload");
  train->add_option("--config", config_path, "run config JSON")->required();

  CLI::App* apply = app.add_subcommand("apply", "materialize a trained layout");
  apply->add_option("--checkpoint", checkpoint, "checkpoint JSON")->required();
  apply->add_option("--config", config_path, "override run config JSON");

  CLI::App* bench = app.add_subcommand("bench", "time workload against a layout");
  bench->add_option("--config", config_path, "run config JSON")->required();
  bench->add_option("--layout", layout, "layout JSON to materialize first");

  rdftune::GenConfig gen_cfg;
  CLI::App* gen = app.add_subcommand("gen", "emit a synthetic dataset + workload");
  gen->add_option("--shape", gen_cfg.shape, "star|path")->required();
  gen->add_option("--predicates", gen_cfg.predicates, "distinct predicates")
      ->required();
  gen->add_option("--rows", gen_cfg.rows, "approximate triple count")->required();
  gen->add_option("--queries", gen_cfg.queries, "workload size (default 3)");
  gen->add_option("--seed", gen_cfg.seed, "generator seed (default 7)");
  gen->add_option("--out", out_dir, "output directory (default out)");

  CLI11_PARSE(app, argc, argv);
  if (threads >= 0) rdftune::kernels::set_threads(threads);

  nlohmann::json summary;
  if (*ingest) {
    rdftune::RunConfig cfg;
    cfg.data_path = data;
    cfg.workload_path = workload;
    summary = rdftune::cmd_ingest(cfg);
  } else if (*train) {
    summary = rdftune::cmd_train(rdftune::load_run_config(config_path));
  } else if (*apply) {
    std::optional<rdftune::RunConfig> cfg;
    if (!config_path.empty()) cfg = rdftune::load_run_config(config_path);
    summary = rdftune::cmd_apply(checkpoint, cfg);
  } else if (*bench) {
    summary = rdftune::cmd_bench(rdftune::load_run_config(config_path), layout);
  } else if (*gen) {
    summary = rdftune::cmd_gen(gen_cfg, out_dir);
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rdftune::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const rdftune::HashMismatchError& e) {
    std::cerr << "checkpoint mismatch: " << e.what() << "\n";
    return 4;
  } catch (const rdftune::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
}
