#include "mem0/policy.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "mem0/rng.hpp"
#include "mem0/util.hpp"

namespace mem0 {

using nlohmann::json;

void PolicyConfig::validate() const {
  if (H < 1) throw ContractError("PolicyConfig: H must be >= 1");
  if (delta < 1 || delta > H) throw ContractError("PolicyConfig: need 1 <= delta <= H");
  if (L < 1) throw ContractError("PolicyConfig: L must be >= 1");
  if (K < 1) throw ContractError("PolicyConfig: K must be >= 1");
  if (d_z < 1) throw ContractError("PolicyConfig: d_z must be >= 1");
  if (T_d < 1) throw ContractError("PolicyConfig: T_d must be >= 1");
}

std::string PolicyConfig::to_json_string() const {
  json j = {{"H", H},
            {"delta", delta},
            {"K", K},
            {"L", L},
            {"d_z", d_z},
            {"T_d", T_d},
            {"enc_hidden", enc_hidden},
            {"enc_tokens", enc_tokens},
            {"cls_hidden", cls_hidden},
            {"plan_hidden", plan_hidden},
            {"den_hidden", den_hidden},
            {"decomposition", decomposition},
            {"no_anchor", no_anchor},
            {"no_sliding", no_sliding},
            {"no_key", no_key},
            {"gt_classifier", gt_classifier},
            {"markovian", markovian}};
  return j.dump(2);
}

PolicyConfig PolicyConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("policy config sidecar: ") + e.what());
  }
  PolicyConfig c;
  c.H = j.value("H", c.H);
  c.delta = j.value("delta", c.delta);
  c.K = j.value("K", c.K);
  c.L = j.value("L", c.L);
  c.d_z = j.value("d_z", c.d_z);
  c.T_d = j.value("T_d", c.T_d);
  c.enc_hidden = j.value("enc_hidden", c.enc_hidden);
  c.enc_tokens = j.value("enc_tokens", c.enc_tokens);
  c.cls_hidden = j.value("cls_hidden", c.cls_hidden);
  c.plan_hidden = j.value("plan_hidden", c.plan_hidden);
  c.den_hidden = j.value("den_hidden", c.den_hidden);
  c.decomposition = j.value("decomposition", c.decomposition);
  c.no_anchor = j.value("no_anchor", c.no_anchor);
  c.no_sliding = j.value("no_sliding", c.no_sliding);
  c.no_key = j.value("no_key", c.no_key);
  c.gt_classifier = j.value("gt_classifier", c.gt_classifier);
  c.markovian = j.value("markovian", c.markovian);
  c.validate();
  return c;
}

void begin_subtask(Mem0State& st, const std::vector<float>& z_first) {
  if (!st.anchor.empty() || !st.sliding.empty())
    throw ContractError("begin_subtask: buffers must be empty");
  st.anchor = z_first;
  st.step_in_subtask = 0;
  st.end_bits.clear();
}

void update_sliding(Mem0State& st, const std::vector<float>& z, int K) {
  st.sliding.push_back(z);
  while (int(st.sliding.size()) > K) st.sliding.pop_front();
}

void reset_buffers(Mem0State& st) {
  st.anchor.clear();
  st.sliding.clear();
  st.end_bits.clear();
  st.pending.clear();
  st.step_in_subtask = 0;
}

bool check_termination(const Mem0State& st, int L) {
  if (int(st.end_bits.size()) < L) return false;
  for (std::size_t i = st.end_bits.size() - std::size_t(L); i < st.end_bits.size(); ++i)
    if (st.end_bits[i] != 1) return false;
  return true;
}

Mem0Model Mem0Model::create(const TaskSpec& spec, const PolicyConfig& cfg,
                            std::uint64_t seed) {
  cfg.validate();
  Mem0Model m;
  m.task = spec.name;
  m.cfg = cfg;
  m.d_o = feature_dim(spec);
  m.d_a = spec.action_count;
  m.n_sub = int(spec.subtask_vocab.size());
  m.d_prop = 1;
  SplitMix64 rng(derive_seed(seed, "init", 0));
  mlp_init(m.params, "enc", {m.d_o, cfg.enc_hidden, cfg.enc_tokens * cfg.d_z}, rng);
  m.params.add_init("text_emb", {std::max(1, m.n_sub), cfg.d_z}, rng);
  m.params.add_init("goal_emb", {1, cfg.d_z}, rng);
  for (const char* which : {"attn_anchor", "attn_slide"})
    for (const char* w : {"Wq", "Wk", "Wv", "Wo"})
      m.params.add_init(std::string(which) + "." + w, {cfg.d_z, cfg.d_z}, rng);
  mlp_init(m.params, "cls", {3 * cfg.d_z, cfg.cls_hidden, 1}, rng);
  mlp_init(m.params, "plan.entry", {std::max(1, m.n_sub) + m.d_o, cfg.plan_hidden, cfg.d_z},
           rng);
  mlp_init(m.params, "plan.head", {3 * cfg.d_z, cfg.plan_hidden, std::max(1, m.n_sub)}, rng);
  m.sched = DiffusionSchedule::make(cfg.T_d);
  m.den_cfg = DenoiserConfig{cfg.H, m.d_a, 3 * cfg.d_z + m.d_prop, 32, cfg.den_hidden,
                             cfg.T_d};
  denoiser_init(m.params, "den", m.den_cfg, rng);
  return m;
}

Tape::Var Mem0Model::encode_img(Tape& t, Tape::Var obs_feat) {
  Tape::Var flat = mlp_apply(t, params, "enc", 2, obs_feat);
  // Reshape the flat output into a token grid, then mean-pool the tokens.
  std::vector<Tape::Var> slices;
  for (int r = 0; r < cfg.enc_tokens; ++r)
    slices.push_back(t.slice(flat, r * cfg.d_z, cfg.d_z));
  return t.mean_rows(t.stack_rows(slices));
}

Tape::Var Mem0Model::encode_text(Tape& t, int subtask) {
  if (subtask < 0 || subtask >= std::max(1, n_sub))
    throw ContractError("encode_text: subtask id out of range");
  return t.row(t.param(params, "text_emb"), subtask);
}

Tape::Var Mem0Model::encode_goal(Tape& t) { return t.row(t.param(params, "goal_emb"), 0); }

Tape::Var Mem0Model::cross_attend(Tape& t, const std::string& prefix, Tape::Var q,
                                  const std::vector<Tape::Var>& memory) {
  if (memory.empty()) return q;  // attention term defined as zero
  Tape::Var Wq = t.param(params, prefix + ".Wq");
  Tape::Var Wk = t.param(params, prefix + ".Wk");
  Tape::Var Wv = t.param(params, prefix + ".Wv");
  Tape::Var Wo = t.param(params, prefix + ".Wo");
  Tape::Var M = t.stack_rows(memory);
  Tape::Var qp = t.linear(Wq, -1, q);
  Tape::Var Km = t.matmul(M, Wk);
  Tape::Var Vm = t.matmul(M, Wv);
  Tape::Var scores = t.scale(t.matvec(Km, qp), 1.0 / std::sqrt(double(cfg.d_z)));
  Tape::Var w = t.softmax(scores);
  Tape::Var attn = t.weighted_rows(w, Vm);
  return t.add(t.linear(Wo, -1, attn), q);
}

Tape::Var Mem0Model::fuse(Tape& t, Tape::Var z_img, const std::vector<Tape::Var>& anchor,
                          const std::vector<Tape::Var>& sliding, Tape::Var z_text,
                          const PolicyConfig& c) {
  std::vector<Tape::Var> a = (c.no_anchor || c.markovian) ? std::vector<Tape::Var>{} : anchor;
  std::vector<Tape::Var> s = (c.no_sliding || c.markovian) ? std::vector<Tape::Var>{} : sliding;
  Tape::Var za = cross_attend(t, "attn_anchor", z_img, a);
  Tape::Var zs = cross_attend(t, "attn_slide", z_img, s);
  return t.concat({za, zs, z_text});
}

Tape::Var Mem0Model::classifier_logit(Tape& t, Tape::Var c_t) {
  return mlp_apply(t, params, "cls", 2, c_t);
}

Tape::Var Mem0Model::planner_logits(Tape& t, const std::vector<float>& o0_feat,
                                    const std::vector<KeyEntry>& key_memory,
                                    const PolicyConfig& c) {
  Tape::Var o0 = encode_img(t, t.leaf_vec(o0_feat));
  Tape::Var goal = encode_goal(t);
  Tape::Var pooled = t.leaf_vec(std::vector<float>(std::size_t(cfg.d_z), 0.0f));
  if (!c.no_key && !key_memory.empty()) {
    // Position weights (i+1)/N_max keep the pooled encoding order-sensitive
    // (and, over identical entries, count-decodable).
    const double n_max = 64.0;
    Tape::Var acc = pooled;
    for (std::size_t i = 0; i < key_memory.size(); ++i) {
      std::vector<float> in(std::size_t(std::max(1, n_sub)), 0.0f);
      in[std::size_t(key_memory[i].subtask)] = 1.0f;
      in.insert(in.end(), key_memory[i].end_obs_feature.begin(),
                key_memory[i].end_obs_feature.end());
      Tape::Var e = mlp_apply(t, params, "plan.entry", 2, t.leaf_vec(in));
      acc = t.add(acc, t.scale(e, double(i + 1) / n_max));
    }
    pooled = acc;
  }
  return mlp_apply(t, params, "plan.head", 2, t.concat({o0, goal, pooled}));
}

int Mem0Model::plan(const std::vector<float>& o0_feat,
                    const std::vector<KeyEntry>& key_memory, const PolicyConfig& c) {
  Tape t;
  Tape::Var logits = planner_logits(t, o0_feat, key_memory, c);
  const std::vector<double>& v = t.value(logits);
  return int(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<float> Mem0Model::proprio(int step_in_subtask, int horizon) const {
  std::vector<float> p(std::size_t(d_prop), 0.0f);
  p[0] = float(double(step_in_subtask) / double(std::max(1, horizon)));
  return p;
}

std::vector<float> encode_action_row(int action, int d_a) {
  std::vector<float> row(std::size_t(d_a), -1.0f);
  row[std::size_t(action)] = 1.0f;
  return row;
}

int decode_action_row(const Tensor& chunk, int row) {
  int d_a = chunk.shape[1];
  int best = 0;
  float best_v = chunk.data[std::size_t(row * d_a)];
  for (int j = 1; j < d_a; ++j) {
    float v = chunk.data[std::size_t(row * d_a + j)];
    if (v > best_v) {
      best_v = v;
      best = j;
    }
  }
  return best;
}

namespace {

std::vector<float> tensor_to_vec(const Tensor& t) {
  return std::vector<float>(t.data.begin(), t.data.end());
}

}  // namespace

EpisodeTrace run_episode(Mem0Model& model, const TaskSpec& spec, const PolicyConfig& cfg,
                         std::uint64_t seed, const EpisodeProbe& probe) {
  cfg.validate();
  if (feature_dim(spec) != model.d_o || spec.action_count != model.d_a)
    throw ContractError("run_episode: model/task dimension mismatch");
  EpisodeTrace trace;
  trace.seed = seed;
  auto [state, obs] = reset(spec, seed);
  std::vector<float> o0_feat = featurize(spec, obs);
  Mem0State st;
  bool decomp = cfg.decomposition && !cfg.markovian;
  st.subtask = decomp ? model.plan(o0_feat, st.key_memory, cfg) : 0;
  st.planner_calls = 1;  // initial dispatch
  for (int t = 0; t < spec.horizon; ++t) {
    if (cfg.force_empty_anchor) st.anchor.clear();
    if (cfg.force_empty_sliding) st.sliding.clear();
    std::vector<float> feat = featurize(spec, obs);
    Tape tape;
    Tape::Var z_img = model.encode_img(tape, tape.leaf_vec(feat));
    std::vector<float> z_vec = tensor_to_vec(tape.tensor(z_img));
    if (!cfg.markovian && st.anchor.empty() && !cfg.force_empty_anchor)
      begin_subtask(st, z_vec);
    std::vector<Tape::Var> anchor_mem, sliding_mem;
    if (!st.anchor.empty()) anchor_mem.push_back(tape.leaf_vec(st.anchor));
    for (const auto& z : st.sliding) sliding_mem.push_back(tape.leaf_vec(z));
    Tape::Var z_text =
        cfg.markovian ? model.encode_goal(tape) : model.encode_text(tape, st.subtask);
    Tape::Var ct_var = model.fuse(tape, z_img, anchor_mem, sliding_mem, z_text, cfg);
    Tensor c_t = tape.tensor(ct_var);
    int bit = 0;
    if (decomp && !cfg.gt_classifier) {
      double logit = tape.value(model.classifier_logit(tape, ct_var))[0];
      bit = logit > 0.0 ? 1 : 0;  // sigmoid(logit) > 0.5
    }
    int action;
    if (!st.pending.empty()) {
      action = st.pending.front();
      st.pending.pop_front();
    } else {
      std::vector<float> cond = tensor_to_vec(c_t);
      std::vector<float> prop = model.proprio(st.step_in_subtask, spec.horizon);
      cond.insert(cond.end(), prop.begin(), prop.end());
      Tensor cond_t({int(cond.size())});
      cond_t.data = cond;
      // One noise stream per episode, shared by every chunk: with a fixed
      // draw, two chunks differ only if their conditioning differs, so
      // behavioral diversity reflects remembered information rather than
      // free sampling randomness (which would act as implicit exploration
      // and let memoryless variants enumerate options by luck).
      Tensor chunk = ddpm_sample(model.params, "den", model.den_cfg, model.sched,
                                 cond_t, derive_seed(seed, "chunk", 0));
      for (int r = 0; r < cfg.delta; ++r) st.pending.push_back(decode_action_row(chunk, r));
      action = st.pending.front();
      st.pending.pop_front();
    }
    if (!cfg.markovian && !cfg.force_empty_sliding) update_sliding(st, z_vec, cfg.K);
    StepResult next = step(spec, state, action);
    bool boundary = false;
    if (decomp) {
      if (cfg.gt_classifier) {
        boundary = spec.gt_subtask_end(state, action, next.state);
      } else {
        st.end_bits.push_back(bit);
        while (int(st.end_bits.size()) > cfg.L) st.end_bits.pop_front();
        boundary = check_termination(st, cfg.L);
      }
    }
    trace.steps.push_back({obs, action, boundary, st.subtask});
    ++trace.step_count;
    ++st.step_in_subtask;
    state = next.state;
    obs = next.obs;
    if (probe) probe(st, t);
    if (next.success) {
      trace.success = true;
      break;
    }
    if (boundary) {
      st.key_memory.push_back({st.subtask, featurize(spec, obs)});
      reset_buffers(st);
      st.subtask = model.plan(o0_feat, st.key_memory, cfg);
      ++st.planner_calls;
      ++trace.completed_subtasks;
    }
  }
  trace.final_obs = obs;
  trace.planner_calls = st.planner_calls;
  return trace;
}

void save_checkpoint(const Mem0Model& model, const std::string& path) {
  save_params(model.params, path);
  json sidecar = json::parse(model.cfg.to_json_string());
  sidecar["task"] = model.task;
  sidecar["d_o"] = model.d_o;
  sidecar["d_a"] = model.d_a;
  sidecar["n_sub"] = model.n_sub;
  write_file(path + ".json", sidecar.dump(2));
}

Mem0Model load_checkpoint(const std::string& path, const TaskSpec& spec) {
  std::string sidecar_text = read_file(path + ".json");
  PolicyConfig cfg = PolicyConfig::from_json_string(sidecar_text);
  json sidecar = json::parse(sidecar_text);
  std::string task = sidecar.value("task", std::string());
  if (task != spec.name)
    throw ContractError("checkpoint task '" + task + "' does not match '" + spec.name + "'");
  if (sidecar.value("d_o", -1) != feature_dim(spec) ||
      sidecar.value("d_a", -1) != spec.action_count ||
      sidecar.value("n_sub", -1) != int(spec.subtask_vocab.size()))
    throw ContractError("checkpoint dimensions do not match task " + spec.name);
  Mem0Model expect = Mem0Model::create(spec, cfg, 0);
  ParamStore loaded = load_params(path);
  for (const auto& [name, e] : expect.params.entries) {
    if (!loaded.has(name))
      throw ContractError("checkpoint missing parameter: " + name);
    if (loaded.at(name).value.shape != e.value.shape)
      throw ContractError("checkpoint shape mismatch for parameter: " + name);
  }
  for (const auto& [name, e] : loaded.entries)
    if (!expect.params.has(name))
      throw ContractError("checkpoint has unexpected parameter: " + name);
  expect.params = std::move(loaded);
  return expect;
}

}  // namespace mem0
