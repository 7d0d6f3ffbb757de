#include "rdftune/env.hpp"

#include <algorithm>

namespace rdftune {

namespace {

std::string key_label(const Catalog& cat, const TableKey& k) {
  if (k.kind == TableKind::Divided) return "{" + cat.pred_name(k.pred) + "}";
  std::string s = "{";
  for (size_t i = 0; i < k.preds.size(); ++i)
    s += (i ? "," : "") + cat.pred_name(k.preds[i]);
  return s + "}";
}

std::string cond_label(const Catalog& cat, const TableCond& c) {
  auto end = [&](const CondEnd& e) {
    return cat.pred_name(e.pred) + (e.pos == Pos::S ? ".s" : ".o");
  };
  return end(c.a) + "=" + end(c.b);
}

}  // namespace

std::vector<Action> build_action_space(const std::vector<QuerySpec>& workload,
                                       const Catalog& cat) {
  if (workload.empty()) throw ValidationError("workload holds no queries");
  std::vector<Action> out;
  std::vector<PredCode> preds;
  std::vector<TableSequence> seqs;
  for (const QuerySpec& q : workload) {
    seqs.push_back(generate_table_sequence(q, cat));
    for (PredCode p : seqs.back().divides)
      if (std::find(preds.begin(), preds.end(), p) == preds.end()) preds.push_back(p);
  }
  std::sort(preds.begin(), preds.end());
  for (PredCode p : preds) {
    Action a;
    a.kind = Action::Kind::Divide;
    a.pred = p;
    a.label = "divide " + cat.pred_name(p);
    out.push_back(std::move(a));
  }
  auto same_event = [](const MergeEvent& x, const MergeEvent& y) {
    return x.left == y.left && x.right == y.right && x.cond == y.cond;
  };
  for (const TableSequence& seq : seqs) {
    for (const MergeEvent& ev : seq.merges) {
      bool dup = false;
      for (const Action& a : out)
        if (a.kind == Action::Kind::Merge && same_event(a.event, ev)) {
          dup = true;
          break;
        }
      if (dup) continue;
      Action a;
      a.kind = Action::Kind::Merge;
      a.event = ev;
      a.label = "merge " + key_label(cat, ev.left) + "+" + key_label(cat, ev.right) +
                " on " + cond_label(cat, ev.cond);
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::vector<double> encode_state(const Catalog& cat, int dim) {
  std::vector<double> v(dim, 0.0);
  const double sep = static_cast<double>(cat.predicate_count() + 1);
  size_t i = 0;
  auto put = [&](double x) {
    if (i >= static_cast<size_t>(dim))
      throw ValidationError("state encoding exceeds vector dimension " +
                            std::to_string(dim));
    v[i++] = x;
  };
  for (size_t t = 1; t < cat.table_count(); ++t) {
    const TableDef& def = cat.table(static_cast<TableId>(t)).def;
    for (PredCode p : def.constituents) put(static_cast<double>(p));
    put(sep);
  }
  return v;
}

Env::Env(Catalog& cat, std::vector<QuerySpec> workload, EnvConfig cfg)
    : cat_(&cat), workload_(std::move(workload)), cfg_(cfg) {
  actions_ = build_action_space(workload_, cat);
  for (const QuerySpec& q : workload_)
    lists_.emplace_back(q, generate_table_sequence(q, cat), cat);
}

double Env::workload_time() {
  double total = 0;
  for (PriorityList& pl : lists_)
    total += pl.select(*cat_, cfg_.mode, cfg_.repeats).time;
  return total;
}

std::vector<PriorityList::Choice> Env::select_all() {
  std::vector<PriorityList::Choice> out;
  for (PriorityList& pl : lists_)
    out.push_back(pl.select(*cat_, cfg_.mode, cfg_.repeats));
  return out;
}

std::vector<double> Env::reset() {
  cat_->reset_to_base();
  steps_ = 0;
  done_ = false;
  prev_time_ = baseline_ = workload_time();
  return encode_state(*cat_, cfg_.vector_dim);
}

std::vector<char> Env::legal_mask() const {
  std::vector<char> mask(actions_.size(), 0);
  for (size_t i = 0; i < actions_.size(); ++i) {
    const Action& a = actions_[i];
    if (a.kind == Action::Kind::Divide) {
      mask[i] = !cat_->find(TableKey::divided(a.pred));
    } else {
      mask[i] = cat_->find(a.event.left) && cat_->find(a.event.right) &&
                !cat_->find(a.event.result);
    }
  }
  return mask;
}

Env::StepOut Env::step(size_t action_index) {
  if (done_) throw ValidationError("step on a finished episode");
  if (action_index >= actions_.size())
    throw ValidationError("action index out of range");
  if (!legal_mask()[action_index])
    throw ValidationError("illegal action: " + actions_[action_index].label);
  const Action& a = actions_[action_index];
  if (a.kind == Action::Kind::Divide) {
    cat_->divide(a.pred);
  } else {
    TableId l = *cat_->find(a.event.left);
    TableId r = *cat_->find(a.event.right);
    cat_->merge(l, r, a.event.cond);
  }
  ++steps_;
  StepOut out;
  out.total_time = workload_time();
  out.reward = prev_time_ - out.total_time;
  prev_time_ = out.total_time;
  out.table_count = cat_->table_count();
  const auto mask = legal_mask();
  bool any = std::any_of(mask.begin(), mask.end(), [](char c) { return c != 0; });
  done_ = steps_ >= cfg_.max_steps || !any;
  out.done = done_;
  out.state = encode_state(*cat_, cfg_.vector_dim);
  return out;
}

double Env::reward_scale() const {
  if (cfg_.reward_scale > 0) return cfg_.reward_scale;
  return baseline_ > 0 ? 1.0 / baseline_ : 1.0;
}

}  // namespace rdftune
