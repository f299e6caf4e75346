#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mem0/pomdp.hpp"

namespace mem0 {

// Size knobs shared by the task builders; defaults reproduce the shipped
// catalog. Out-of-bounds values raise ContractError.
struct TaskParams {
  int pads = 4;          // put_back_block, rearrange_blocks (2..6)
  int slots = 3;         // pick_fixed_block, observe_and_pick_up (2..4)
  int orients = 4;       // swap_t (2..4)
  int digit_max = 3;     // press_button digits are 1..digit_max (2..4)
  int num_digits = 2;    // press_button (1..2)
  int attempt_slack = 2; // try-task budget = distinct attempts + slack (0..4)
};

// Catalog names: pick_fixed_block, observe_and_pick_up, rearrange_blocks,
// put_back_block, swap_blocks, swap_t, battery_try, blocks_ranking_try,
// cover_blocks, press_button. A "_reduced" suffix selects the small instance
// used for exhaustive memory-complexity certification.
TaskSpec build_task(const std::string& name, const TaskParams& params = {});

const std::vector<std::string>& all_task_names();

// Oracle agent with hidden-state access; solves every instance within the
// horizon and emits subtask ids and end flags for supervision.
AgentFn expert_policy(const TaskSpec& spec);

struct Demonstration {
  std::string task;
  std::uint64_t seed = 0;
  std::vector<TraceStep> steps;
};

struct DemoSet {
  std::string task;
  std::uint16_t version = 1;
  std::uint64_t base_seed = 0;
  std::vector<Demonstration> demos;
};

DemoSet generate_demos(const TaskSpec& spec, int n, std::uint64_t seed);

void save_demoset(const DemoSet& set, const std::string& path);
DemoSet load_demoset(const std::string& path);

}  // namespace mem0
