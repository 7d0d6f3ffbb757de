#include "rdftune/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace rdftune {

ReplayBuffer::ReplayBuffer(size_t capacity) : cap_(capacity) {
  if (capacity == 0) throw ValidationError("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  buf_.push_back(std::move(t));
  if (buf_.size() > cap_) buf_.pop_front();
}

std::vector<const Transition*> ReplayBuffer::sample(size_t n, Rng& rng) const {
  if (n == 0 || n > buf_.size())
    throw ValidationError("replay sample size out of range");
  std::vector<uint32_t> idx(buf_.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::vector<const Transition*> out;
  out.reserve(n);
  for (size_t k = 0; k < n; k++) {  // partial Fisher-Yates
    uint32_t j = k + rng.below(static_cast<uint32_t>(idx.size() - k));
    std::swap(idx[k], idx[j]);
    out.push_back(&buf_[idx[k]]);
  }
  return out;
}

void to_json(nlohmann::json& j, const AgentConfig& c) {
  j = {{"gamma", c.gamma},
       {"learning_rate", c.learning_rate},
       {"epsilon_start", c.epsilon_start},
       {"epsilon_end", c.epsilon_end},
       {"epsilon_decay", c.epsilon_decay},
       {"batch_size", c.batch_size},
       {"buffer_capacity", c.buffer_capacity},
       {"target_sync_period", c.target_sync_period},
       {"updates_per_episode", c.updates_per_episode},
       {"hidden", c.hidden},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, AgentConfig& c) {
  c = AgentConfig{};
  if (j.contains("gamma")) j.at("gamma").get_to(c.gamma);
  if (j.contains("learning_rate")) j.at("learning_rate").get_to(c.learning_rate);
  if (j.contains("epsilon_start")) j.at("epsilon_start").get_to(c.epsilon_start);
  if (j.contains("epsilon_end")) j.at("epsilon_end").get_to(c.epsilon_end);
  if (j.contains("epsilon_decay")) j.at("epsilon_decay").get_to(c.epsilon_decay);
  if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
  if (j.contains("buffer_capacity"))
    j.at("buffer_capacity").get_to(c.buffer_capacity);
  if (j.contains("target_sync_period"))
    j.at("target_sync_period").get_to(c.target_sync_period);
  if (j.contains("updates_per_episode"))
    j.at("updates_per_episode").get_to(c.updates_per_episode);
  if (j.contains("hidden")) j.at("hidden").get_to(c.hidden);
  if (j.contains("seed")) j.at("seed").get_to(c.seed);
}

namespace {
void validate_config(const AgentConfig& c) {
  if (!(c.gamma >= 0.0 && c.gamma < 1.0))
    throw ValidationError("gamma must lie in [0, 1)");
  if (c.learning_rate <= 0) throw ValidationError("learning_rate must be positive");
  if (c.epsilon_start < 0 || c.epsilon_end < 0 || c.epsilon_end > c.epsilon_start)
    throw ValidationError("need 0 <= epsilon_end <= epsilon_start");
  if (c.epsilon_decay <= 0 || c.epsilon_decay > 1)
    throw ValidationError("epsilon_decay must lie in (0, 1]");
  if (c.batch_size <= 0) throw ValidationError("batch_size must be positive");
  if (c.target_sync_period <= 0)
    throw ValidationError("target_sync_period must be positive");
  if (c.updates_per_episode < 0)
    throw ValidationError("updates_per_episode must be non-negative");
  if (c.hidden.size() != 3)
    throw ValidationError("agent uses exactly three hidden layers");
  for (size_t i = 0; i < c.hidden.size(); i++) {
    if (c.hidden[i] <= 0) throw ValidationError("hidden sizes must be positive");
    if (i > 0 && c.hidden[i] < c.hidden[i - 1])
      throw ValidationError("hidden sizes must be non-decreasing");
  }
}

std::vector<int> net_dims(int state_dim, int action_count, const AgentConfig& c) {
  validate_config(c);
  if (state_dim <= 0 || action_count <= 0)
    throw ValidationError("state and action dimensions must be positive");
  std::vector<int> dims{state_dim};
  dims.insert(dims.end(), c.hidden.begin(), c.hidden.end());
  dims.push_back(action_count);
  return dims;
}
}  // namespace

Agent::Agent(int state_dim, int action_count, AgentConfig cfg)
    : cfg_(std::move(cfg)),
      state_dim_(state_dim),
      action_count_(action_count),
      rng_(cfg_.seed),
      pred_(net_dims(state_dim, action_count, cfg_), rng_),
      target_(pred_),
      replay_(cfg_.buffer_capacity),
      epsilon_(cfg_.epsilon_start) {}

int Agent::masked_argmax(std::span<const double> q, std::span<const char> mask) {
  if (q.size() != mask.size())
    throw ValidationError("mask length does not match value vector");
  int best = -1;
  for (size_t i = 0; i < q.size(); i++) {
    if (!mask[i]) continue;
    if (best < 0 || q[i] > q[best]) best = static_cast<int>(i);
  }
  if (best < 0) throw ValidationError("no legal action to select");
  return best;
}

int Agent::select_action(std::span<const double> s, double epsilon,
                         std::span<const char> mask) {
  if (s.size() != static_cast<size_t>(state_dim_))
    throw ValidationError("state vector has wrong dimension");
  if (mask.size() != static_cast<size_t>(action_count_))
    throw ValidationError("action mask has wrong length");
  std::vector<int> legal;
  for (size_t i = 0; i < mask.size(); i++)
    if (mask[i]) legal.push_back(static_cast<int>(i));
  if (legal.empty()) throw ValidationError("no legal action to select");
  if (rng_.uniform01() < epsilon)
    return legal[rng_.below(static_cast<uint32_t>(legal.size()))];
  return masked_argmax(pred_.forward(s), mask);
}

double Agent::train_step(std::span<const Transition* const> batch) {
  if (batch.empty()) throw ValidationError("empty training batch");
  int n = static_cast<int>(batch.size());
  size_t D = static_cast<size_t>(state_dim_);
  size_t A = static_cast<size_t>(action_count_);
  std::vector<double> X(n * D), X2(n * D);
  for (int i = 0; i < n; i++) {
    const Transition& t = *batch[i];
    if (t.s.size() != D || t.s2.size() != D)
      throw ValidationError("transition state has wrong dimension");
    if (t.action < 0 || static_cast<size_t>(t.action) >= A)
      throw ValidationError("transition action out of range");
    if (!t.next_mask.empty() && t.next_mask.size() != A)
      throw ValidationError("transition mask has wrong length");
    std::copy(t.s.begin(), t.s.end(), X.begin() + i * D);
    std::copy(t.s2.begin(), t.s2.end(), X2.begin() + i * D);
  }

  QNetwork::Tape tape;
  std::vector<double> Q = pred_.forward_batch(X, n, &tape);
  std::vector<double> Qp2 = pred_.forward_batch(X2, n, nullptr);
  std::vector<double> Qt2 = target_.forward_batch(X2, n, nullptr);

  std::vector<double> dY(n * A, 0.0);
  double loss = 0;
  for (int i = 0; i < n; i++) {
    const Transition& t = *batch[i];
    bool has_next = !t.done && !t.next_mask.empty() &&
                    std::any_of(t.next_mask.begin(), t.next_mask.end(),
                                [](char m) { return m != 0; });
    double y = t.reward;
    if (has_next) {
      // action chosen by the prediction net, valued by the target net
      std::span<const double> row(Qp2.data() + i * A, A);
      int astar = masked_argmax(row, t.next_mask);
      y += cfg_.gamma * Qt2[i * A + astar];
    }
    double diff = Q[i * A + t.action] - y;
    loss += diff * diff;
    dY[i * A + t.action] = 2.0 * diff / n;
  }
  loss /= n;

  QNetwork::Grads g = pred_.zero_grads();
  pred_.backward(tape, dY, g);
  pred_.apply_sgd(g, cfg_.learning_rate);
  return loss;
}

double Agent::train_step(std::span<const Transition> batch) {
  std::vector<const Transition*> ptrs;
  ptrs.reserve(batch.size());
  for (const Transition& t : batch) ptrs.push_back(&t);
  return train_step(ptrs);
}

TrainReport Agent::train(Env& env, int episodes, std::ostream* trace) {
  if (episodes < 0) throw ValidationError("episode count must be non-negative");
  TrainReport report;

  std::vector<double> state = env.reset();
  report.baseline_time = env.baseline_time();
  report.best_time = env.baseline_time();
  report.best_layout = env.catalog().layout_json();
  report.best_rows = env.catalog().total_rows();

  for (int e = 1; e <= episodes; e++) {
    state = env.reset();
    double t1 = env.baseline_time();
    double scale = env.reward_scale();
    double eps_used = epsilon_;

    struct StepRec {
      Transition tr;
      double raw_reward = 0;
      double total_time = 0;
      nlohmann::json layout;
      size_t rows = 0;
    };
    std::vector<StepRec> steps;
    nlohmann::json layout0 = env.catalog().layout_json();
    size_t rows0 = env.catalog().total_rows();

    while (!env.done()) {
      std::vector<char> mask = env.legal_mask();
      int a = select_action(state, eps_used, mask);
      Env::StepOut so = env.step(static_cast<size_t>(a));
      StepRec rec;
      rec.tr.s = std::move(state);
      rec.tr.s2 = so.state;
      rec.tr.action = a;
      rec.tr.reward = so.reward * scale;
      rec.tr.done = so.done;
      rec.tr.next_mask = env.legal_mask();
      rec.raw_reward = so.reward;
      rec.total_time = so.total_time;
      rec.layout = env.catalog().layout_json();
      rec.rows = env.catalog().total_rows();
      if (trace) {
        nlohmann::json line = {{"episode", e},
                               {"step", static_cast<int>(steps.size()) + 1},
                               {"action", env.actions()[a].label},
                               {"reward", so.reward},
                               {"table_count", so.table_count},
                               {"total_time", so.total_time}};
        *trace << line.dump() << "\n";
      }
      steps.push_back(std::move(rec));
      state = std::move(so.state);
    }

    // Best prefix: largest accumulated raw reward; empty prefix counts as 0.
    size_t best_k = 0;
    double best_sum = 0, run = 0;
    for (size_t k = 0; k < steps.size(); k++) {
      run += steps[k].raw_reward;
      if (run > best_sum) {
        best_sum = run;
        best_k = k + 1;
      }
    }
    for (size_t k = 0; k < best_k; k++) replay_.push(steps[k].tr);

    EpisodeRow row;
    row.episode = e;
    row.t1 = t1;
    row.t2 = best_k == 0 ? t1 : steps[best_k - 1].total_time;
    row.improvement = t1 > 0 ? (t1 - row.t2) / t1 : 0.0;
    row.space_rows = best_k == 0 ? rows0 : steps[best_k - 1].rows;
    row.epsilon = eps_used;
    report.episodes.push_back(row);

    if (row.t2 < report.best_time) {
      report.best_time = row.t2;
      report.best_layout = best_k == 0 ? layout0 : steps[best_k - 1].layout;
      report.best_rows = row.space_rows;
    }

    if (replay_.size() > 0) {
      size_t n = std::min<size_t>(cfg_.batch_size, replay_.size());
      for (int u = 0; u < cfg_.updates_per_episode; u++)
        train_step(replay_.sample(n, rng_));
    }
    if (e % cfg_.target_sync_period == 0) sync_target();
    epsilon_ = std::max(cfg_.epsilon_end, epsilon_ * cfg_.epsilon_decay);
  }
  return report;
}

nlohmann::json Agent::to_json() const {
  return {{"config", cfg_},
          {"state_dim", state_dim_},
          {"action_count", action_count_},
          {"epsilon", epsilon_},
          {"prediction", pred_.to_json()},
          {"target", target_.to_json()}};
}

Agent Agent::from_json(const nlohmann::json& j) {
  AgentConfig cfg = j.at("config").get<AgentConfig>();
  Agent a(j.at("state_dim").get<int>(), j.at("action_count").get<int>(), cfg);
  a.pred_ = QNetwork::from_json(j.at("prediction"));
  a.target_ = QNetwork::from_json(j.at("target"));
  a.epsilon_ = j.at("epsilon").get<double>();
  if (a.pred_.dims() != net_dims(a.state_dim_, a.action_count_, cfg) ||
      a.target_.dims() != a.pred_.dims())
    throw ValidationError("checkpoint network shape does not match its config");
  return a;
}

}  // namespace rdftune
