#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <vector>

#include "rdftune/env.hpp"
#include "rdftune/net.hpp"

#include "json.hpp"

namespace rdftune {

struct Transition {
  std::vector<double> s, s2;
  int action = 0;
  double reward = 0;  // learning reward (already scaled)
  bool done = false;
  std::vector<char> next_mask;  // legal actions at s2
};

// Fixed-capacity FIFO experience pool with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void push(Transition t);
  size_t size() const { return buf_.size(); }
  size_t capacity() const { return cap_; }
  const Transition& at(size_t i) const { return buf_[i]; }  // 0 = oldest

  // n distinct transitions, uniform without replacement; n <= size()
  std::vector<const Transition*> sample(size_t n, Rng& rng) const;

 private:
  size_t cap_;
  std::deque<Transition> buf_;
};

struct AgentConfig {
  double gamma = 0.9;
  double learning_rate = 1e-3;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay = 0.95;  // multiplicative, per episode
  int batch_size = 32;
  size_t buffer_capacity = 2000;
  int target_sync_period = 5;  // episodes between target syncs
  int updates_per_episode = 16;
  std::vector<int> hidden = {128, 192, 256};
  uint64_t seed = 1;
};

void to_json(nlohmann::json& j, const AgentConfig& c);
void from_json(const nlohmann::json& j, AgentConfig& c);

struct EpisodeRow {
  int episode = 0;       // 1-based
  double t1 = 0;         // baseline workload time
  double t2 = 0;         // workload time after the episode's best prefix
  double improvement = 0;  // (t1 - t2) / t1
  size_t space_rows = 0;   // total stored rows under the best-prefix layout
  double epsilon = 0;      // exploration rate used during the episode
};

struct TrainReport {
  std::vector<EpisodeRow> episodes;
  nlohmann::json best_layout;  // replayable layout of the best prefix seen
  double baseline_time = 0;
  double best_time = 0;
  size_t best_rows = 0;
};

// Double deep Q-network: a prediction net updated by gradient steps and a
// periodically synced target net that values the prediction net's argmax.
class Agent {
 public:
  Agent(int state_dim, int action_count, AgentConfig cfg);

  const AgentConfig& config() const { return cfg_; }
  int state_dim() const { return state_dim_; }
  int action_count() const { return action_count_; }
  QNetwork& prediction() { return pred_; }
  const QNetwork& prediction() const { return pred_; }
  QNetwork& target() { return target_; }
  const QNetwork& target() const { return target_; }
  ReplayBuffer& replay() { return replay_; }
  Rng& rng() { return rng_; }
  double epsilon() const { return epsilon_; }
  void set_epsilon(double e) { epsilon_ = e; }

  // argmax over entries with mask[i] != 0; ties -> smallest index
  static int masked_argmax(std::span<const double> q, std::span<const char> mask);

  // epsilon-greedy over the legal actions
  int select_action(std::span<const double> s, double epsilon,
                    std::span<const char> mask);

  // One SGD step on the prediction net; returns mean squared TD error.
  double train_step(std::span<const Transition* const> batch);
  double train_step(std::span<const Transition> batch);

  void sync_target() { target_ = pred_; }

  // Roll out `episodes` episodes on env, learning from best-prefix replay.
  // Optionally writes one JSON line per step to `trace`.
  TrainReport train(Env& env, int episodes, std::ostream* trace = nullptr);

  nlohmann::json to_json() const;
  static Agent from_json(const nlohmann::json& j);

 private:
  AgentConfig cfg_;
  int state_dim_ = 0;
  int action_count_ = 0;
  Rng rng_;
  QNetwork pred_, target_;
  ReplayBuffer replay_;
  double epsilon_ = 1.0;
};

}  // namespace rdftune
