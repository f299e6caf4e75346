#include "mem0/tmc.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <json.hpp>

#include "mem0/util.hpp"

namespace mem0 {

namespace {

// Enumeration of the full reachable state graph plus, for every state, the
// minimal number of steps to a success state (INT_MAX when unreachable).
// Used both to prune provably-dead branches and to order action branches by
// progress.
struct ReachInfo {
  std::vector<HiddenState> states;
  std::map<HiddenState, int> index;
  std::vector<std::vector<int>> next;  // next[state][action] -> state index
  std::vector<int> dist_to_success;
};

ReachInfo analyze(const TaskSpec& spec) {
  ReachInfo info;
  std::deque<int> queue;
  for (const HiddenState& s : spec.enumerate_initial()) {
    if (info.index.emplace(s, int(info.states.size())).second) {
      info.states.push_back(s);
      queue.push_back(int(info.states.size()) - 1);
    }
  }
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    if (int(info.next.size()) <= i) info.next.resize(std::size_t(i) + 1);
    info.next[std::size_t(i)].resize(std::size_t(spec.action_count));
    for (int a = 0; a < spec.action_count; ++a) {
      HiddenState n = spec.transition(info.states[std::size_t(i)], a);
      auto [it, fresh] = info.index.emplace(n, int(info.states.size()));
      if (fresh) {
        info.states.push_back(n);
        queue.push_back(int(info.states.size()) - 1);
      }
      info.next[std::size_t(i)][std::size_t(a)] = it->second;
    }
  }
  info.next.resize(info.states.size());
  for (std::size_t i = 0; i < info.states.size(); ++i)
    if (info.next[i].empty()) {
      info.next[i].resize(std::size_t(spec.action_count));
      for (int a = 0; a < spec.action_count; ++a)
        info.next[i][std::size_t(a)] = info.index.at(spec.transition(info.states[i], a));
    }
  // Multi-source reverse BFS from success states.
  const int inf = std::numeric_limits<int>::max();
  info.dist_to_success.assign(info.states.size(), inf);
  std::vector<std::vector<int>> rev(info.states.size());
  std::deque<int> bfs;
  for (std::size_t i = 0; i < info.states.size(); ++i) {
    for (int a = 0; a < spec.action_count; ++a)
      rev[std::size_t(info.next[i][std::size_t(a)])].push_back(int(i));
    if (spec.success(info.states[i])) {
      info.dist_to_success[i] = 0;
      bfs.push_back(int(i));
    }
  }
  while (!bfs.empty()) {
    int i = bfs.front();
    bfs.pop_front();
    for (int p : rev[std::size_t(i)])
      if (info.dist_to_success[std::size_t(p)] == inf) {
        info.dist_to_success[std::size_t(p)] = info.dist_to_success[std::size_t(i)] + 1;
        bfs.push_back(p);
      }
  }
  return info;
}

}  // namespace

double optimal_value(const TaskSpec& spec, std::uint64_t node_cap) {
  ReachInfo info = analyze(spec);
  const int inf = std::numeric_limits<int>::max();

  // Belief = sorted multiset of particle state indices (success/dead removed
  // before recursion). Value = max achievable number of eventual successes.
  std::map<std::pair<std::vector<int>, int>, long long> memo;
  std::uint64_t nodes = 0;

  std::function<long long(std::vector<int>, int)> value = [&](std::vector<int> belief,
                                                              int t) -> long long {
    long long succ = 0;
    std::vector<int> alive;
    for (int i : belief) {
      if (spec.success(info.states[std::size_t(i)])) {
        ++succ;
      } else if (info.dist_to_success[std::size_t(i)] != inf &&
                 info.dist_to_success[std::size_t(i)] <= spec.horizon - t) {
        alive.push_back(i);
      }
    }
    if (alive.empty() || t == spec.horizon) return succ;
    std::sort(alive.begin(), alive.end());
    auto key = std::make_pair(alive, t);
    auto it = memo.find(key);
    if (it != memo.end()) return succ + it->second;
    if (++nodes > node_cap)
      throw ContractError("optimal_value: node cap exceeded for task " + spec.name);
    long long best = 0;
    for (int a = 0; a < spec.action_count; ++a) {
      std::map<Observation, std::vector<int>> groups;
      for (int i : alive) {
        int n = info.next[std::size_t(i)][std::size_t(a)];
        groups[spec.observe(info.states[std::size_t(n)])].push_back(n);
      }
      long long total = 0;
      for (auto& [obs, group] : groups) total += value(group, t + 1);
      best = std::max(best, total);
    }
    memo.emplace(key, best);
    return succ + best;
  };

  std::vector<HiddenState> initials = spec.enumerate_initial();
  std::map<Observation, std::vector<int>> groups;
  for (const HiddenState& s : initials)
    groups[spec.observe(s)].push_back(info.index.at(s));
  long long total = 0;
  for (auto& [obs, group] : groups) total += value(group, 0);
  return double(total) / double(initials.size());
}

namespace {

// Bank = vector of m slots; each slot is an observation's symbol vector, or
// empty for blank. Context key = obs symbols + per-slot encodings, separated
// by sentinels that cannot collide with symbol codes.
std::vector<int> context_key(const Observation& obs, const std::vector<std::vector<int>>& bank) {
  std::vector<int> key = obs.symbols;
  for (const auto& slot : bank) {
    key.push_back(-1);
    if (slot.empty())
      key.push_back(-2);
    else
      key.insert(key.end(), slot.begin(), slot.end());
  }
  return key;
}

struct Searcher {
  const TaskSpec& spec;
  ReachInfo info;
  int m = 0;
  std::uint64_t budget = 0;
  std::uint64_t nodes = 0;
  bool aborted = false;
  bool solved = false;  // a witness matching the particle count was found

  std::vector<int> initial_indices;
  std::vector<Observation> obs_of;            // per state index
  std::vector<int> obs_id_of;                 // per state index
  std::vector<Observation> obs_list;          // id -> observation
  std::vector<std::vector<int>> action_reps;  // per obs id: representative actions
  std::vector<std::vector<int>> obs_members;  // per obs id: states sharing it

  std::map<std::vector<int>, std::pair<int, int>> table;
  long long best = -1;
  ControllerPolicy best_policy;

  explicit Searcher(const TaskSpec& s) : spec(s), info(analyze(s)) {
    obs_of.reserve(info.states.size());
    std::map<Observation, int> obs_ids;
    for (const HiddenState& st : info.states) {
      Observation o = spec.observe(st);
      auto [it, fresh] = obs_ids.emplace(o, int(obs_list.size()));
      if (fresh) obs_list.push_back(o);
      obs_of.push_back(o);
      obs_id_of.push_back(it->second);
    }
    // Per observation, collapse actions that behave identically on every
    // reachable state sharing that observation.
    obs_members.resize(obs_list.size());
    for (std::size_t i = 0; i < info.states.size(); ++i)
      obs_members[std::size_t(obs_id_of[i])].push_back(int(i));
    action_reps.resize(obs_list.size());
    for (std::size_t oid = 0; oid < obs_list.size(); ++oid) {
      std::vector<std::vector<int>> signatures;
      for (int a = 0; a < spec.action_count; ++a) {
        std::vector<int> sig;
        for (int i : obs_members[oid]) sig.push_back(info.next[std::size_t(i)][std::size_t(a)]);
        if (std::find(signatures.begin(), signatures.end(), sig) == signatures.end()) {
          signatures.push_back(sig);
          action_reps[oid].push_back(a);
        }
      }
    }
    for (const HiddenState& st : spec.enumerate_initial())
      initial_indices.push_back(info.index.at(st));
  }

  long long total() const { return (long long)(initial_indices.size()); }

  // Branch options for a fresh context, ordered: actions by distance-to-
  // success of the current particle's successor (progress first), and for
  // each action the write ops with "store" tried before "keep".
  std::vector<std::pair<int, int>> options(int state_idx, int obs_id,
                                           const std::vector<std::vector<int>>& bank) const {
    const std::vector<int>& cur_obs = obs_list[std::size_t(obs_id)].symbols;
    std::vector<int> writes;
    bool blank_seen = false;
    for (int j = 0; j < m; ++j) {
      if (bank[std::size_t(j)].empty()) {
        if (!blank_seen) writes.push_back(j);  // blanks are interchangeable
        blank_seen = true;
      } else if (bank[std::size_t(j)] != cur_obs) {
        writes.push_back(j);
      }
    }
    writes.push_back(-1);  // keep
    std::vector<int> acts = action_reps[std::size_t(obs_id)];
    std::stable_sort(acts.begin(), acts.end(), [&](int a, int b) {
      int da = info.dist_to_success[std::size_t(info.next[std::size_t(state_idx)][std::size_t(a)])];
      int db = info.dist_to_success[std::size_t(info.next[std::size_t(state_idx)][std::size_t(b)])];
      return da < db;
    });
    std::vector<std::pair<int, int>> out;
    for (int a : acts) {
      // (self-loop for every state sharing this observation, keep) traps all
      // particles reaching the context forever; any alternative dominates it.
      bool all_self_loop = true;
      for (int i : obs_members[std::size_t(obs_id)])
        if (info.next[std::size_t(i)][std::size_t(a)] != i) {
          all_self_loop = false;
          break;
        }
      for (int w : writes) {
        if (w == -1 && all_self_loop) continue;
        out.emplace_back(a, w);
      }
    }
    if (out.empty()) out.emplace_back(action_reps[std::size_t(obs_id)][0], -1);
    return out;
  }

  struct Particle {
    int state = 0;
    std::vector<std::vector<int>> bank;
    bool alive = true;
  };

  // Advances every surviving particle in lockstep. Branching happens only
  // when some alive particle reaches an unassigned context; each table
  // assignment combination is therefore explored at most once, and the
  // bound prunes as soon as enough particles are provably lost. `ps` is
  // settled in place (settling is option-independent), so option branches
  // share it by reference; only the synchronous step copies.
  void search(std::vector<Particle>& ps, int t, long long succ) {
    if (aborted || solved) return;
    if (++nodes > budget) {
      aborted = true;
      return;
    }
    const int inf = std::numeric_limits<int>::max();
    long long alive_n = 0;
    for (Particle& p : ps) {
      if (!p.alive) continue;
      if (spec.success(info.states[std::size_t(p.state)])) {
        p.alive = false;
        ++succ;
      } else if (info.dist_to_success[std::size_t(p.state)] == inf ||
                 info.dist_to_success[std::size_t(p.state)] > spec.horizon - t) {
        p.alive = false;  // success provably unreachable in the remaining steps
      } else {
        ++alive_n;
      }
    }
    if (succ + alive_n <= best) return;
    if (alive_n == 0 || t == spec.horizon) {
      best = succ;
      best_policy.table = table;
      if (best == total()) solved = true;
      return;
    }
    for (const Particle& p : ps) {
      if (!p.alive) continue;
      int oid = obs_id_of[std::size_t(p.state)];
      std::vector<int> key = context_key(obs_list[std::size_t(oid)], p.bank);
      if (table.count(key)) continue;
      for (auto [a, w] : options(p.state, oid, p.bank)) {
        table[key] = {a, w};
        step_and_recurse(ps, t, succ);
        table.erase(key);
        if (aborted || solved) return;
      }
      return;
    }
    step_and_recurse(ps, t, succ);
  }

  // Checks that every alive particle's context is assigned; if some is not,
  // falls back to branching, otherwise takes one synchronous step on a copy.
  void step_and_recurse(const std::vector<Particle>& ps, int t, long long succ) {
    std::vector<Particle> nps;
    nps.reserve(ps.size());
    for (const Particle& p : ps) {
      nps.push_back(p);
      if (!p.alive) continue;
      Particle& np = nps.back();
      int oid = obs_id_of[std::size_t(np.state)];
      auto it = table.find(context_key(obs_list[std::size_t(oid)], np.bank));
      if (it == table.end()) {
        // A context freshly reached under the latest assignment: recurse at
        // the same depth so search() branches on it.
        std::vector<Particle> same = ps;
        search(same, t, succ);
        return;
      }
      auto [a, w] = it->second;
      if (w >= 0) np.bank[std::size_t(w)] = obs_list[std::size_t(oid)].symbols;
      np.state = info.next[std::size_t(np.state)][std::size_t(a)];
    }
    search(nps, t + 1, succ);
  }

  void run() {
    std::vector<Particle> ps;
    for (int i : initial_indices)
      ps.push_back({i, std::vector<std::vector<int>>(std::size_t(m)), true});
    search(ps, 0, 0);
  }
};

}  // namespace

MemSearchResult best_value_with_memory(const TaskSpec& spec, int m, std::uint64_t budget) {
  if (m < 0) throw ContractError("best_value_with_memory: m must be >= 0");
  Searcher s(spec);
  s.m = m;
  s.budget = budget;
  s.run();
  MemSearchResult r;
  r.value = double(std::max<long long>(s.best, 0)) / double(s.total());
  r.policy = s.best_policy;
  // A witness matching every particle is optimal by construction, so an
  // early stop there still certifies the value.
  r.certified = !s.aborted;
  r.nodes_explored = s.nodes;
  return r;
}

TmcResult compute_tmc(const TaskSpec& spec, int m_max, double eps, std::uint64_t budget) {
  TmcResult res;
  res.m_max = m_max;
  res.epsilon = eps;
  res.v_star = optimal_value(spec);
  res.certified = true;
  for (int m = 0; m <= m_max; ++m) {
    MemSearchResult r = best_value_with_memory(spec, m, budget);
    res.nodes_explored += r.nodes_explored;
    res.v_by_m.push_back(r.value);
    if (!r.certified) res.certified = false;
    if (r.certified && r.value >= res.v_star - eps) {
      res.tmc = m;
      break;
    }
  }
  return res;
}

std::string tmc_result_json(const TmcResult& r, const std::string& task) {
  nlohmann::json j = {{"task", task},
                      {"v_star", r.v_star},
                      {"v_by_m", r.v_by_m},
                      {"tmc", r.tmc >= 0 ? nlohmann::json(r.tmc)
                                         : nlohmann::json(">" + std::to_string(r.m_max))},
                      {"m_max", r.m_max},
                      {"epsilon", r.epsilon},
                      {"certified", r.certified},
                      {"nodes_explored", r.nodes_explored},
                      {"memory_model", r.memory_model}};
  return j.dump(2);
}

}  // namespace mem0
