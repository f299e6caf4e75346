#include "mem0/pomdp.hpp"

#include <json.hpp>

#include "mem0/util.hpp"

namespace mem0 {

using nlohmann::json;

std::pair<HiddenState, Observation> reset(const TaskSpec& spec, std::uint64_t seed) {
  HiddenState s = spec.init(seed);
  return {s, spec.observe(s)};
}

StepResult step(const TaskSpec& spec, const HiddenState& state, int action) {
  if (action < 0 || action >= spec.action_count)
    throw ContractError("action code " + std::to_string(action) + " out of range for task " +
                        spec.name);
  StepResult r;
  r.state = spec.transition(state, action);
  r.obs = spec.observe(r.state);
  r.success = spec.success(r.state);
  r.done = r.success;
  return r;
}

EpisodeTrace rollout(const TaskSpec& spec, const AgentFn& agent, std::uint64_t seed,
                     int max_steps) {
  if (max_steps > spec.horizon)
    throw ContractError("max_steps exceeds horizon for task " + spec.name);
  EpisodeTrace trace;
  trace.seed = seed;
  auto [state, obs] = reset(spec, seed);
  for (int t = 0; t < max_steps; ++t) {
    AgentStep a;
    try {
      a = agent(state, obs, t);
    } catch (const std::exception& e) {
      trace.success = false;
      trace.diagnostic = std::string("agent callback failed: ") + e.what();
      trace.final_obs = obs;
      return trace;
    }
    StepResult r = step(spec, state, a.action);
    trace.steps.push_back({obs, a.action, a.end_flag, a.subtask});
    ++trace.step_count;
    state = r.state;
    obs = r.obs;
    if (r.done) {
      trace.success = true;
      break;
    }
  }
  trace.final_obs = obs;
  return trace;
}

int feature_dim(const TaskSpec& spec) {
  int d = 0;
  for (int a : spec.obs_alphabet) d += a;
  return d;
}

std::vector<float> featurize(const TaskSpec& spec, const Observation& obs) {
  if (obs.symbols.size() != spec.obs_alphabet.size())
    throw ContractError("observation channel count mismatch for task " + spec.name);
  std::vector<float> v(std::size_t(feature_dim(spec)), 0.0f);
  int off = 0;
  for (std::size_t i = 0; i < obs.symbols.size(); ++i) {
    int code = obs.symbols[i];
    if (code < 0 || code >= spec.obs_alphabet[i])
      throw ContractError("observation symbol out of alphabet for task " + spec.name);
    v[std::size_t(off + code)] = 1.0f;
    off += spec.obs_alphabet[i];
  }
  return v;
}

std::string serialize_trace(const TaskSpec& spec, const EpisodeTrace& trace) {
  std::string out;
  json header = {{"task", spec.name},
                 {"seed", trace.seed},
                 {"schema", 1},
                 {"success", trace.success},
                 {"step_count", trace.step_count},
                 {"planner_calls", trace.planner_calls},
                 {"completed_subtasks", trace.completed_subtasks},
                 {"final_obs", trace.final_obs.symbols}};
  if (!trace.diagnostic.empty()) header["diagnostic"] = trace.diagnostic;
  out += header.dump();
  out += '\n';
  for (const TraceStep& s : trace.steps) {
    json line = {{"obs", s.obs.symbols},
                 {"action", s.action},
                 {"end", s.end_flag},
                 {"subtask", s.subtask}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

EpisodeTrace deserialize_trace(const std::string& text) {
  EpisodeTrace trace;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError(std::string("malformed trace line: ") + e.what());
    }
    if (first) {
      first = false;
      if (!j.contains("schema") || j["schema"].get<int>() != 1)
        throw IoError("unsupported trace schema version");
      trace.seed = j["seed"].get<std::uint64_t>();
      trace.success = j["success"].get<bool>();
      trace.step_count = j["step_count"].get<int>();
      trace.planner_calls = j["planner_calls"].get<int>();
      trace.completed_subtasks = j.value("completed_subtasks", 0);
      trace.final_obs.symbols = j["final_obs"].get<std::vector<int>>();
      trace.diagnostic = j.value("diagnostic", std::string());
    } else {
      TraceStep s;
      s.obs.symbols = j["obs"].get<std::vector<int>>();
      s.action = j["action"].get<int>();
      s.end_flag = j["end"].get<bool>();
      s.subtask = j["subtask"].get<int>();
      trace.steps.push_back(std::move(s));
    }
  }
  if (first) throw IoError("empty trace text");
  return trace;
}

}  // namespace mem0
