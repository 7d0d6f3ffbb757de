#include "rdftune/gen.hpp"

#include <algorithm>
#include <numeric>

namespace rdftune {

namespace {

// Triples hold normalized terms (no <> wrappers), matching what the
// N-Triples loader and the workload parser produce; IRI syntax is added
// back only when emitting file text.
std::string pred_name(int j) { return "p" + std::to_string(j); }

std::string iri(const std::string& term) { return "<" + term + ">"; }

// np distinct predicate indices (1-based), order randomized
std::vector<int> pick_preds(int total, int np, Rng& rng) {
  std::vector<int> all(total);
  std::iota(all.begin(), all.end(), 1);
  for (int k = 0; k < np; k++) {
    int j = k + static_cast<int>(rng.below(static_cast<uint32_t>(total - k)));
    std::swap(all[k], all[j]);
  }
  all.resize(np);
  return all;
}

}  // namespace

Generated generate(const GenConfig& cfg) {
  if (cfg.shape != "star" && cfg.shape != "path")
    throw ValidationError("shape must be 'star' or 'path'");
  if (cfg.predicates < 1 || cfg.rows < 1 || cfg.queries < 1)
    throw ValidationError("predicates, rows and queries must be positive");

  Rng rng(cfg.seed);
  Generated g;
  int k = cfg.predicates;
  // objects actually emitted per predicate, for picking filter constants
  std::vector<std::vector<std::string>> objs(k + 1);

  if (cfg.shape == "star") {
    int n_subj = std::max(1, cfg.rows / k);
    const uint32_t pool = 10;
    for (int i = 0; i < n_subj; i++) {
      std::string subj = "e" + std::to_string(i);
      for (int j = 1; j <= k; j++) {
        std::string obj =
            "v" + std::to_string(j) + "_" + std::to_string(rng.below(pool));
        g.triples.push_back({subj, pred_name(j), obj});
        objs[j].push_back(obj);
      }
    }
  } else {  // path: layer j-1 nodes point to layer j nodes via predicate j
    int per_layer = std::max(1, cfg.rows / k);
    auto node = [](int layer, int i) {
      return "n" + std::to_string(layer) + "_" + std::to_string(i);
    };
    for (int j = 1; j <= k; j++) {
      for (int i = 0; i < per_layer; i++) {
        std::string obj = node(j, static_cast<int>(rng.below(per_layer)));
        g.triples.push_back({node(j - 1, i), pred_name(j), obj});
        objs[j].push_back(obj);
      }
    }
  }

  std::string wl;
  for (int qi = 0; qi < cfg.queries; qi++) {
    int np = std::min(k, 2 + static_cast<int>(rng.below(3)));  // 2..4 patterns
    std::vector<int> preds;
    if (cfg.shape == "star") {
      preds = pick_preds(k, np, rng);
    } else {  // chains need consecutive layer predicates
      int start = 1 + static_cast<int>(rng.below(static_cast<uint32_t>(k - np + 1)));
      for (int t = 0; t < np; t++) preds.push_back(start + t);
    }
    wl += "QUERY q" + std::to_string(qi + 1) + "\n";
    for (int t = 0; t < np; t++) {
      std::string alias(1, static_cast<char>('a' + t));
      wl += "PATTERN " + alias + " p=" + iri(pred_name(preds[t]));
      if (t == np - 1) {  // one selective constant per query
        const auto& pool = objs[preds[t]];
        wl += " o=" + iri(pool[rng.below(static_cast<uint32_t>(pool.size()))]);
      }
      wl += "\n";
    }
    for (int t = 1; t < np; t++) {
      std::string prev(1, static_cast<char>('a' + t - 1));
      std::string cur(1, static_cast<char>('a' + t));
      if (cfg.shape == "star")
        wl += "JOIN a.s=" + cur + ".s\n";
      else
        wl += "JOIN " + prev + ".o=" + cur + ".s\n";
    }
    wl += "SELECT a.s\nEND\n";
  }

  g.workload = parse_workload(wl);
  g.workload_file_text = wl;

  std::string nt;
  for (const Triple& t : g.triples)
    nt += iri(t.s) + " " + iri(t.p) + " " + iri(t.o) + " .\n";
  g.ntriples_text = std::move(nt);
  return g;
}

}  // namespace rdftune
