#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mem0/pomdp.hpp"

namespace mem0 {

// Deterministic finite-memory controller found by the search: maps an
// encoded (observation, memory-bank) context to (action, write op). The
// write op is -1 for keep, or the slot index overwritten with the current
// raw observation. Bank slots hold raw observations or blanks.
struct ControllerPolicy {
  std::map<std::vector<int>, std::pair<int, int>> table;
};

struct MemSearchResult {
  double value = 0.0;
  ControllerPolicy policy;
  bool certified = true;
  std::uint64_t nodes_explored = 0;
};

struct TmcResult {
  double v_star = 0.0;
  std::vector<double> v_by_m;  // best value for m = 0..(computed maximum)
  int tmc = -1;                // minimal certified m, or -1 for "> m_max"
  int m_max = 0;
  double epsilon = 1e-9;
  bool certified = false;
  std::uint64_t nodes_explored = 0;
  // The memory model searched over: slot banks of raw past observations
  // with explicit write ops. Recorded so downstream consumers know which
  // controller family the numbers refer to.
  std::string memory_model = "raw-observation-slot controllers";
};

// Exact optimal success probability with full-history policies, via
// backward induction over the reachable belief tree. Throws ContractError
// when the memoized tree exceeds node_cap (never silently approximates).
double optimal_value(const TaskSpec& spec, std::uint64_t node_cap = 1000000);

// Best success probability over deterministic m-slot controllers, by
// depth-first branch-and-bound with lazy context assignment in first-
// reachability order. Budget exhaustion returns the best value found with
// certified=false.
MemSearchResult best_value_with_memory(const TaskSpec& spec, int m,
                                       std::uint64_t budget = 50000000);

TmcResult compute_tmc(const TaskSpec& spec, int m_max, double eps = 1e-9,
                      std::uint64_t budget = 50000000);

std::string tmc_result_json(const TmcResult& r, const std::string& task);

}  // namespace mem0
