#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "mem0/ddpm.hpp"
#include "mem0/nn.hpp"
#include "mem0/pomdp.hpp"

namespace mem0 {

struct PolicyConfig {
  int H = 8;        // action-chunk horizon
  int delta = 4;    // executed prefix length, 1 <= delta <= H
  int K = 16;       // sliding-memory capacity
  int L = 8;        // consecutive-end threshold
  int d_z = 64;     // latent width
  int T_d = 16;     // diffusion steps
  int enc_hidden = 128;
  int enc_tokens = 4;
  int cls_hidden = 64;
  int plan_hidden = 64;
  int den_hidden = 128;
  bool decomposition = false;
  // Ablation switches.
  bool no_anchor = false;
  bool no_sliding = false;
  bool no_key = false;
  bool gt_classifier = false;
  bool markovian = false;
  // Debug switches that physically empty a buffer every step instead of
  // flagging it off; used to verify the ablation-equivalence property.
  bool force_empty_anchor = false;
  bool force_empty_sliding = false;

  void validate() const;  // ContractError on violated bounds
  std::string to_json_string() const;
  static PolicyConfig from_json_string(const std::string& text);
};

struct KeyEntry {
  int subtask = 0;
  std::vector<float> end_obs_feature;
};

struct Mem0State {
  std::vector<float> anchor;                 // empty = unset
  std::deque<std::vector<float>> sliding;    // size <= K
  std::vector<KeyEntry> key_memory;
  std::deque<int> end_bits;                  // last <= L bits
  int subtask = 0;
  int planner_calls = 0;
  int step_in_subtask = 0;
  std::deque<int> pending;                   // queued decoded actions, <= delta
};

// Spec-level memory ops, exposed for direct property testing.
void begin_subtask(Mem0State& st, const std::vector<float>& z_first);  // buffers must be empty
void update_sliding(Mem0State& st, const std::vector<float>& z, int K);
void reset_buffers(Mem0State& st);
bool check_termination(const Mem0State& st, int L);  // last L bits all 1

struct Mem0Model {
  std::string task;
  PolicyConfig cfg;
  int d_o = 0, d_a = 0, n_sub = 0, d_prop = 0;
  ParamStore params;
  DiffusionSchedule sched;
  DenoiserConfig den_cfg;

  static Mem0Model create(const TaskSpec& spec, const PolicyConfig& cfg,
                          std::uint64_t seed);

  // Tape-level building blocks (gradients flow when used in training).
  Tape::Var encode_img(Tape& t, Tape::Var obs_feat);
  Tape::Var encode_text(Tape& t, int subtask);
  Tape::Var encode_goal(Tape& t);
  // Single-head scaled-dot-product cross-attention with residual; empty
  // memory returns the query unchanged.
  Tape::Var cross_attend(Tape& t, const std::string& prefix, Tape::Var q,
                         const std::vector<Tape::Var>& memory);
  // c_t = [anchor-fused ; sliding-fused ; z_text].
  Tape::Var fuse(Tape& t, Tape::Var z_img, const std::vector<Tape::Var>& anchor,
                 const std::vector<Tape::Var>& sliding, Tape::Var z_text,
                 const PolicyConfig& cfg);
  Tape::Var classifier_logit(Tape& t, Tape::Var c_t);
  // Planner head over (o_0 encoding, goal embedding, position-weighted pooled
  // key entries); no_key replaces the pooled encoding with zeros.
  Tape::Var planner_logits(Tape& t, const std::vector<float>& o0_feat,
                           const std::vector<KeyEntry>& key_memory,
                           const PolicyConfig& cfg);

  int plan(const std::vector<float>& o0_feat, const std::vector<KeyEntry>& key_memory,
           const PolicyConfig& cfg);
  // Proprioceptive conditioning: the normalized step index within the
  // current subtask. Deliberately excludes the previous action — feeding
  // actions back in would give even the markovian variant a free one-step
  // recurrence (an action-chained counter can emulate memory).
  std::vector<float> proprio(int step_in_subtask, int horizon) const;
};

using EpisodeProbe = std::function<void(const Mem0State&, int t)>;

EpisodeTrace run_episode(Mem0Model& model, const TaskSpec& spec, const PolicyConfig& cfg,
                         std::uint64_t seed, const EpisodeProbe& probe = nullptr);

// Checkpoint = weight file + JSON config sidecar at path + ".json".
void save_checkpoint(const Mem0Model& model, const std::string& path);
Mem0Model load_checkpoint(const std::string& path, const TaskSpec& spec);

// Relaxed one-hot chunk rows: +1 at the action index, -1 elsewhere; decoded
// by per-row argmax.
std::vector<float> encode_action_row(int action, int d_a);
int decode_action_row(const Tensor& chunk, int row);

}  // namespace mem0
