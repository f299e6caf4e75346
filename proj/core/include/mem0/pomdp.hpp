#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mem0 {

// One multi-channel symbolic observation. symbols[i] indexes into channel i's
// alphabet as declared by the owning TaskSpec (symbols[i] < obs_alphabet[i]).
struct Observation {
  std::vector<int> symbols;

  bool operator==(const Observation& o) const { return symbols == o.symbols; }
  bool operator<(const Observation& o) const { return symbols < o.symbols; }
};

// Task-specific latent record. Tasks document their field layout next to
// their builder; unused trailing fields stay zero.
struct HiddenState {
  std::array<std::int16_t, 10> f{};

  bool operator==(const HiddenState& s) const { return f == s.f; }
  bool operator<(const HiddenState& s) const { return f < s.f; }
};

// What an agent reports for one control step.
struct AgentStep {
  int action = 0;
  int subtask = 0;
  bool end_flag = false;
};

// Agent callback. Learned policies must ignore `state`; scripted experts and
// oracles may read it. `t` is the step index within the episode.
using AgentFn =
    std::function<AgentStep(const HiddenState& state, const Observation& obs, int t)>;

struct TaskSpec {
  std::string name;
  int horizon = 0;
  std::vector<int> obs_alphabet;  // per-channel alphabet sizes
  int action_count = 0;
  std::string tmc_label;  // "M(0)", "M(1)", or "M(n)"
  std::vector<std::string> action_names;
  std::vector<std::string> subtask_vocab;
  bool decomposition = false;  // subtask decomposition used at execution time

  // All initial-condition randomness lives in init; transition/observe/success
  // are pure and deterministic. init draws uniformly from enumerate_initial().
  std::function<HiddenState(std::uint64_t seed)> init;
  std::function<std::vector<HiddenState>()> enumerate_initial;
  std::function<HiddenState(const HiddenState&, int action)> transition;
  std::function<Observation(const HiddenState&)> observe;
  std::function<bool(const HiddenState&)> success;
  // True when the step (prev --action--> next) completes a subtask; consumed
  // by demonstration labeling and the ground-truth-termination variant.
  std::function<bool(const HiddenState& prev, int action, const HiddenState& next)>
      gt_subtask_end;
};

struct TraceStep {
  Observation obs;  // observation the action was chosen from
  int action = 0;
  bool end_flag = false;
  int subtask = 0;
};

struct EpisodeTrace {
  std::vector<TraceStep> steps;
  Observation final_obs;
  bool success = false;
  int step_count = 0;
  int planner_calls = 0;
  int completed_subtasks = 0;  // termination events that triggered a replan
  std::uint64_t seed = 0;
  std::string diagnostic;  // nonempty iff the agent callback failed
};

struct StepResult {
  HiddenState state;
  Observation obs;
  bool done = false;
  bool success = false;
};

std::pair<HiddenState, Observation> reset(const TaskSpec& spec, std::uint64_t seed);

// Applies transition then observe. Throws ContractError on an out-of-range
// action code; in-range actions that are physically impossible are no-ops.
StepResult step(const TaskSpec& spec, const HiddenState& state, int action);

EpisodeTrace rollout(const TaskSpec& spec, const AgentFn& agent, std::uint64_t seed,
                     int max_steps);

// Concatenated per-channel one-hot encoding; dimension = sum of alphabet
// sizes, injective over the observation alphabet.
std::vector<float> featurize(const TaskSpec& spec, const Observation& obs);
int feature_dim(const TaskSpec& spec);

// Line-delimited JSON: header line (task, seed, schema, outcome fields), then
// one object per step.
std::string serialize_trace(const TaskSpec& spec, const EpisodeTrace& trace);
EpisodeTrace deserialize_trace(const std::string& text);

}  // namespace mem0
