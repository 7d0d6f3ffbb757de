#pragma once

#include <string>
#include <vector>

#include "rdftune/catalog.hpp"
#include "rdftune/executor.hpp"
#include "rdftune/query.hpp"
#include "rdftune/rewriter.hpp"

namespace rdftune {

struct Action {
  enum class Kind { Divide, Merge };
  Kind kind = Kind::Divide;
  PredCode pred = 0;  // Divide
  MergeEvent event;   // Merge
  std::string label;
};

// The action space is frozen from the workload: one divide per predicate any
// query mentions, one merge per distinct (left, right, cond) the table
// sequence walk attempts across queries. Two walks reaching the same table by
// different routes stay two actions.
std::vector<Action> build_action_space(const std::vector<QuerySpec>& workload,
                                       const Catalog& cat);

// Non-base tables in creation order: constituent predicate codes, then a
// separator (n+1) per table; zero-padded to dim. Throws when codes exceed dim.
std::vector<double> encode_state(const Catalog& cat, int dim);

struct EnvConfig {
  int vector_dim = 100;
  int max_steps = 12;
  Mode mode = Mode::CostModel;
  int repeats = 3;
  double reward_scale = 0;  // 0 = auto: 1 / baseline workload time
};

// The decision process over catalog layouts. Rewards are raw time decreases
// (previous workload time minus current); the configured reward scale is
// resolved by reward_scale() for the agent to apply on the learning side, so
// logged episode rewards always telescope to baseline minus final time.
class Env {
 public:
  Env(Catalog& cat, std::vector<QuerySpec> workload, EnvConfig cfg);

  const std::vector<Action>& actions() const { return actions_; }
  const EnvConfig& config() const { return cfg_; }
  const Catalog& catalog() const { return *cat_; }
  Catalog& mutable_catalog() { return *cat_; }
  std::vector<PriorityList>& lists() { return lists_; }
  const std::vector<QuerySpec>& workload() const { return workload_; }

  std::vector<double> reset();
  std::vector<char> legal_mask() const;

  struct StepOut {
    std::vector<double> state;
    double reward = 0;
    bool done = false;
    double total_time = 0;
    size_t table_count = 0;  // including t0
  };
  StepOut step(size_t action_index);

  double baseline_time() const { return baseline_; }
  double prev_time() const { return prev_time_; }
  int steps_taken() const { return steps_; }
  bool done() const { return done_; }
  double reward_scale() const;

  // per-query choices under the current tables (for reports)
  std::vector<PriorityList::Choice> select_all();

 private:
  double workload_time();

  Catalog* cat_;
  std::vector<QuerySpec> workload_;
  EnvConfig cfg_;
  std::vector<Action> actions_;
  std::vector<PriorityList> lists_;
  double baseline_ = 0, prev_time_ = 0;
  int steps_ = 0;
  bool done_ = true;  // call reset() first
};

}  // namespace rdftune
