#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdftune/catalog.hpp"
#include "rdftune/query.hpp"

namespace rdftune {

// Synthetic dataset/workload generator for tests and demos. `star` gives each
// subject one triple per predicate (queries join on a shared subject); `path`
// links entity layers by consecutive predicates (queries chain o=s hops).
struct GenConfig {
  std::string shape = "star";  // star | path
  int predicates = 5;
  int rows = 1000;  // approximate triple count
  int queries = 3;
  uint64_t seed = 7;
};

struct Generated {
  std::vector<Triple> triples;
  std::vector<QuerySpec> workload;
  std::string ntriples_text;
  std::string workload_file_text;
};

Generated generate(const GenConfig& cfg);

}  // namespace rdftune
