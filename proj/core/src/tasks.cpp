#include "mem0/tasks.hpp"

#include <algorithm>
#include <memory>

#include <json.hpp>

#include "mem0/rng.hpp"
#include "mem0/util.hpp"

namespace mem0 {

using nlohmann::json;

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

// Wires the seeded initializer to the uniform enumeration so that the sampled
// distribution and the oracle's belief prior agree by construction.
TaskSpec finish(TaskSpec spec, std::vector<HiddenState> initials) {
  auto list = std::make_shared<std::vector<HiddenState>>(std::move(initials));
  spec.enumerate_initial = [list] { return *list; };
  spec.init = [list](std::uint64_t seed) {
    SplitMix64 g(seed);
    return (*list)[std::size_t(g.below(list->size()))];
  };
  return spec;
}

// ---------------------------------------------------------------------------
// pick_fixed_block — memory-free control task. The target slot stays visible
// the whole episode.
// State: f0 = target slot, f1 = picked.
// Obs:   [target (S), picked (2)] — nothing is ever masked.
TaskSpec make_pick_fixed(const TaskParams& p) {
  require(p.slots >= 2 && p.slots <= 4, "pick_fixed_block: slots must be in 2..4");
  const int S = p.slots;
  TaskSpec spec;
  spec.name = "pick_fixed_block";
  spec.horizon = 8;
  spec.obs_alphabet = {S, 2};
  spec.action_count = S + 1;
  for (int j = 0; j < S; ++j) spec.action_names.push_back("pick_" + std::to_string(j));
  spec.action_names.push_back("wait");
  spec.tmc_label = "M(0)";
  spec.subtask_vocab = {"pick"};
  spec.decomposition = false;
  spec.transition = [S](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[1] == 0 && a < S && a == n.f[0]) n.f[1] = 1;
    return n;
  };
  spec.observe = [](const HiddenState& s) {
    return Observation{{s.f[0], s.f[1]}};
  };
  spec.success = [](const HiddenState& s) { return s.f[1] == 1; };
  std::vector<HiddenState> init;
  for (int t = 0; t < S; ++t) {
    HiddenState s;
    s.f[0] = std::int16_t(t);
    init.push_back(s);
  }
  return finish(std::move(spec), std::move(init));
}

// ---------------------------------------------------------------------------
// observe_and_pick_up — a reference label is shown in phase 0, masked in
// phase 1; the agent must then pick the slot carrying the matching label.
// Slot labels stay visible; only the reference is hidden. Picking in phase 1
// is decisive (absorbing success/failure), so a memoryless agent can only
// match the reference by luck.
// State: f0 = reference, f1..f{S} = slot labels (a permutation),
//        f5 = phase, f6 = result (0 none / 1 success / 2 fail).
// Obs:   [ref display (S+1, value S when masked), S label channels (S each),
//         phase (2)]
TaskSpec make_observe_pick(const TaskParams& p) {
  require(p.slots >= 2 && p.slots <= 4, "observe_and_pick_up: slots must be in 2..4");
  const int S = p.slots;
  TaskSpec spec;
  spec.name = "observe_and_pick_up";
  spec.horizon = 8;
  spec.obs_alphabet = {S + 1};
  for (int j = 0; j < S; ++j) spec.obs_alphabet.push_back(S);
  spec.obs_alphabet.push_back(2);
  spec.action_count = S + 1;
  for (int j = 0; j < S; ++j) spec.action_names.push_back("pick_" + std::to_string(j));
  spec.action_names.push_back("wait");
  spec.tmc_label = "M(1)";
  spec.subtask_vocab = {"pick_reference"};
  spec.decomposition = false;
  spec.transition = [S](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[6] != 0) return n;
    if (n.f[5] == 0) {
      n.f[5] = 1;  // any first action reveals-then-hides; picks are no-ops here
      return n;
    }
    if (a < S) n.f[6] = (n.f[1 + a] == n.f[0]) ? 1 : 2;
    return n;
  };
  spec.observe = [S](const HiddenState& s) {
    Observation o;
    o.symbols.push_back(s.f[5] == 0 ? s.f[0] : std::int16_t(S));
    for (int j = 0; j < S; ++j) o.symbols.push_back(s.f[1 + j]);
    o.symbols.push_back(s.f[5] != 0 ? 1 : 0);
    return o;
  };
  spec.success = [](const HiddenState& s) { return s.f[6] == 1; };
  std::vector<HiddenState> init;
  std::vector<int> perm;
  for (int j = 0; j < S; ++j) perm.push_back(j);
  do {
    for (int r = 0; r < S; ++r) {
      HiddenState s;
      s.f[0] = std::int16_t(r);
      for (int j = 0; j < S; ++j) s.f[1 + j] = std::int16_t(perm[std::size_t(j)]);
      init.push_back(s);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return finish(std::move(spec), std::move(init));
}

// ---------------------------------------------------------------------------
// rearrange_blocks — block A sits on pad b (shown only before anything
// moves), block B sits on the middle. The agent clears the middle, presses
// the button, then must move A — distinguishable from B only by memory — to
// the middle. The post-press move is decisive.
// State: f0 = b (A's pad), f1 = B's pad once placed, f2 = phase
//        (0 B-at-middle / 1 B-placed / 2 pressed), f3 = result.
// Obs:   [middle occupied (2), pressed (2), pad display (P+1, masked = P)]
TaskSpec make_rearrange(const TaskParams& p) {
  require(p.pads >= 2 && p.pads <= 6, "rearrange_blocks: pads must be in 2..6");
  const int P = p.pads;
  TaskSpec spec;
  spec.name = "rearrange_blocks";
  spec.horizon = 12;
  spec.obs_alphabet = {2, 2, P + 1};
  spec.action_count = 2 * P + 2;
  for (int j = 0; j < P; ++j)
    spec.action_names.push_back("move_mid_to_pad_" + std::to_string(j));
  spec.action_names.push_back("press");
  for (int j = 0; j < P; ++j)
    spec.action_names.push_back("move_pad_" + std::to_string(j) + "_to_mid");
  spec.action_names.push_back("wait");
  spec.tmc_label = "M(1)";
  spec.subtask_vocab = {"rearrange"};
  spec.decomposition = false;
  spec.transition = [P](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[3] != 0) return n;
    if (n.f[2] == 0) {
      if (a < P && a != n.f[0]) {
        n.f[1] = std::int16_t(a);
        n.f[2] = 1;
      }
    } else if (n.f[2] == 1) {
      if (a == P) n.f[2] = 2;
    } else {  // pressed: moving any pad block to the middle decides the
      // episode at once — a wrong pick cannot be retried, otherwise a
      // memoryless policy could safely enumerate pads it knows are empty.
      if (a > P && a <= 2 * P) {
        int j = a - P - 1;
        n.f[3] = std::int16_t(j == n.f[0] ? 1 : 2);
      }
    }
    return n;
  };
  spec.observe = [P](const HiddenState& s) {
    int middle_occ = (s.f[2] == 0 || s.f[3] != 0) ? 1 : 0;
    int pressed = s.f[2] >= 2 ? 1 : 0;
    int pad_disp = s.f[2] == 0 ? s.f[0] : std::int16_t(P);
    return Observation{{middle_occ, pressed, pad_disp}};
  };
  spec.success = [](const HiddenState& s) { return s.f[3] == 1; };
  std::vector<HiddenState> init;
  for (int b = 0; b < P; ++b) {
    HiddenState s;
    s.f[0] = std::int16_t(b);
    init.push_back(s);
  }
  return finish(std::move(spec), std::move(init));
}

// ---------------------------------------------------------------------------
// put_back_block — the block starts on pad b (visible), must visit the
// center, the button is pressed there, and the block must then return to its
// original pad. Pad identity is masked once the block has visited the
// center, and the post-press placement is decisive.
// State: f0 = b, f1 = loc (0..P-1 pad / P center / P+1 held), f2 = pressed,
//        f3 = visited-center, f4 = result.
// Obs:   [loc display (P+3: pad index pre-visit, P center, P+1 held,
//         P+2 masked pad), pressed (2)]
TaskSpec make_put_back(const TaskParams& p) {
  require(p.pads >= 2 && p.pads <= 6, "put_back_block: pads must be in 2..6");
  const int P = p.pads;
  TaskSpec spec;
  spec.name = "put_back_block";
  spec.horizon = 16;
  spec.obs_alphabet = {P + 3, 2};
  spec.action_count = 2 * P + 4;
  for (int j = 0; j < P; ++j) spec.action_names.push_back("pick_pad_" + std::to_string(j));
  spec.action_names.push_back("pick_center");
  for (int j = 0; j < P; ++j) spec.action_names.push_back("place_pad_" + std::to_string(j));
  spec.action_names.push_back("place_center");
  spec.action_names.push_back("press");
  spec.action_names.push_back("wait");
  spec.tmc_label = "M(1)";
  spec.subtask_vocab = {"put_back"};
  spec.decomposition = false;
  const int kCenter = P, kHeld = P + 1;
  spec.transition = [P, kCenter, kHeld](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[4] != 0) return n;
    if (a < P) {  // pick from pad a
      if (n.f[1] == a) n.f[1] = std::int16_t(kHeld);
    } else if (a == P) {  // pick from center
      if (n.f[1] == kCenter) n.f[1] = std::int16_t(kHeld);
    } else if (a <= 2 * P) {  // place on pad a-P-1
      int j = a - P - 1;
      if (n.f[1] == kHeld) {
        n.f[1] = std::int16_t(j);
        if (n.f[2] != 0) n.f[4] = (j == n.f[0]) ? 1 : 2;
      }
    } else if (a == 2 * P + 1) {  // place on center
      if (n.f[1] == kHeld) {
        n.f[1] = std::int16_t(kCenter);
        n.f[3] = 1;
      }
    } else if (a == 2 * P + 2) {  // press
      if (n.f[1] == kCenter) n.f[2] = 1;
    }
    return n;
  };
  spec.observe = [P, kCenter, kHeld](const HiddenState& s) {
    int disp;
    if (s.f[1] == kCenter)
      disp = P;
    else if (s.f[1] == kHeld)
      disp = P + 1;
    else
      disp = s.f[3] != 0 ? P + 2 : s.f[1];
    return Observation{{disp, s.f[2] != 0 ? 1 : 0}};
  };
  spec.success = [](const HiddenState& s) { return s.f[4] == 1; };
  std::vector<HiddenState> init;
  for (int b = 0; b < P; ++b) {
    HiddenState s;
    s.f[0] = std::int16_t(b);
    s.f[1] = std::int16_t(b);
    init.push_back(s);
  }
  return finish(std::move(spec), std::move(init));
}

// ---------------------------------------------------------------------------
// swap_blocks — blocks A and B on two of three pads, labels visible only
// until the first move; swap them via the empty pad and press to confirm.
// The press is decisive.
// State: f0 = posA, f1 = posB, f2 = origA, f3 = origB, f4 = moved,
//        f5 = result.
// Obs:   three pad displays (4 each: 0 empty / 1 A / 2 B / 3 masked block)
TaskSpec make_swap_blocks(const TaskParams&) {
  TaskSpec spec;
  spec.name = "swap_blocks";
  spec.horizon = 12;
  spec.obs_alphabet = {4, 4, 4};
  static const int kPairs[6][2] = {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
  spec.action_count = 8;
  for (auto& pr : kPairs)
    spec.action_names.push_back("move_" + std::to_string(pr[0]) + "_to_" +
                                std::to_string(pr[1]));
  spec.action_names.push_back("press");
  spec.action_names.push_back("wait");
  spec.tmc_label = "M(1)";
  spec.subtask_vocab = {"swap"};
  spec.decomposition = false;
  spec.transition = [](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[5] != 0) return n;
    if (a < 6) {
      int src = kPairs[a][0], dst = kPairs[a][1];
      bool dst_empty = n.f[0] != dst && n.f[1] != dst;
      if (dst_empty) {
        if (n.f[0] == src) {
          n.f[0] = std::int16_t(dst);
          n.f[4] = 1;
        } else if (n.f[1] == src) {
          n.f[1] = std::int16_t(dst);
          n.f[4] = 1;
        }
      }
    } else if (a == 6) {
      n.f[5] = (n.f[0] == n.f[3] && n.f[1] == n.f[2]) ? 1 : 2;
    }
    return n;
  };
  spec.observe = [](const HiddenState& s) {
    Observation o{{0, 0, 0}};
    int a_label = s.f[4] != 0 ? 3 : 1;
    int b_label = s.f[4] != 0 ? 3 : 2;
    o.symbols[std::size_t(s.f[0])] = a_label;
    o.symbols[std::size_t(s.f[1])] = b_label;
    return o;
  };
  spec.success = [](const HiddenState& s) { return s.f[5] == 1; };
  std::vector<HiddenState> init;
  for (int e = 0; e < 3; ++e)
    for (int swap = 0; swap < 2; ++swap) {
      int a = (e + 1) % 3, b = (e + 2) % 3;
      if (swap) std::swap(a, b);
      HiddenState s;
      s.f[0] = std::int16_t(a);
      s.f[1] = std::int16_t(b);
      s.f[2] = std::int16_t(a);
      s.f[3] = std::int16_t(b);
      init.push_back(s);
    }
  return finish(std::move(spec), std::move(init));
}

// ---------------------------------------------------------------------------
// swap_t — objects A (left pad) and B (right pad) carry discrete
// orientations shown only until the first pick; the agent must swap their
// positions and orientations using the staging pad. Success latches once the
// target configuration is reached.
// State: f0 = locA, f1 = locB (0 left / 1 right / 2 stage / 3 held),
//        f2 = oA0, f3 = oB0, f4 = oA, f5 = oB, f6 = moved, f7 = done latch.
// Obs:   [occ left (2), occ right (2), occ stage (2), holding (2),
//         three orientation displays (R+1, masked-or-empty = R)]
TaskSpec make_swap_t(const TaskParams& p) {
  require(p.orients >= 2 && p.orients <= 4, "swap_t: orients must be in 2..4");
  const int R = p.orients;
  TaskSpec spec;
  spec.name = "swap_t";
  spec.horizon = 16;
  spec.obs_alphabet = {2, 2, 2, 2, R + 1, R + 1, R + 1};
  spec.action_count = 3 + 3 * R + 1;
  for (int q = 0; q < 3; ++q) spec.action_names.push_back("pick_" + std::to_string(q));
  for (int q = 0; q < 3; ++q)
    for (int o = 0; o < R; ++o)
      spec.action_names.push_back("place_" + std::to_string(q) + "_orient_" +
                                  std::to_string(o));
  spec.action_names.push_back("wait");
  spec.tmc_label = "M(1)";
  spec.subtask_vocab = {"swap_t"};
  spec.decomposition = false;
  spec.transition = [R](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[7] != 0) return n;
    bool holding = n.f[0] == 3 || n.f[1] == 3;
    if (a < 3) {
      if (!holding) {
        if (n.f[0] == a) {
          n.f[0] = 3;
          n.f[6] = 1;
        } else if (n.f[1] == a) {
          n.f[1] = 3;
          n.f[6] = 1;
        }
      }
    } else if (a < 3 + 3 * R) {
      int pad = (a - 3) / R, orient = (a - 3) % R;
      bool pad_empty = n.f[0] != pad && n.f[1] != pad;
      if (holding && pad_empty) {
        if (n.f[0] == 3) {
          n.f[0] = std::int16_t(pad);
          n.f[4] = std::int16_t(orient);
        } else {
          n.f[1] = std::int16_t(pad);
          n.f[5] = std::int16_t(orient);
        }
      }
    }
    if (n.f[0] == 1 && n.f[1] == 0 && n.f[4] == n.f[3] && n.f[5] == n.f[2]) n.f[7] = 1;
    return n;
  };
  spec.observe = [R](const HiddenState& s) {
    Observation o;
    for (int pad = 0; pad < 3; ++pad)
      o.symbols.push_back((s.f[0] == pad || s.f[1] == pad) ? 1 : 0);
    o.symbols.push_back((s.f[0] == 3 || s.f[1] == 3) ? 1 : 0);
    for (int pad = 0; pad < 3; ++pad) {
      int disp = R;
      if (s.f[6] == 0) {
        if (s.f[0] == pad) disp = s.f[4];
        if (s.f[1] == pad) disp = s.f[5];
      }
      o.symbols.push_back(disp);
    }
    return o;
  };
  spec.success = [](const HiddenState& s) { return s.f[7] != 0; };
  std::vector<HiddenState> init;
  for (int oa = 0; oa < R; ++oa)
    for (int ob = 0; ob < R; ++ob) {
      HiddenState s;
      s.f[0] = 0;
      s.f[1] = 1;
      s.f[2] = std::int16_t(oa);
      s.f[3] = std::int16_t(ob);
      s.f[4] = std::int16_t(oa);
      s.f[5] = std::int16_t(ob);
      init.push_back(s);
    }
  return finish(std::move(spec), std::move(init));
}

// ---------------------------------------------------------------------------
// battery_try — one of four insertion combinations (2 batteries x 2
// orientations) is correct; a failed insertion shows only a generic "tried"
// flag, so the set of already-tried combinations must be remembered. The
// attempt budget is the number of distinct combinations plus slack.
// State: f0 = correct combo, f1 = tried bitmask, f2 = attempts, f3 = result.
// Obs:   [status (2): fresh / at-least-one-failure]
TaskSpec make_battery(const TaskParams& p) {
  require(p.attempt_slack >= 0 && p.attempt_slack <= 4,
          "battery_try: attempt_slack must be in 0..4");
  const int C = 4;
  const int budget = C + p.attempt_slack;
  TaskSpec spec;
  spec.name = "battery_try";
  spec.horizon = 10;
  spec.obs_alphabet = {2};
  spec.action_count = C + 1;
  for (int c = 0; c < C; ++c) spec.action_names.push_back("insert_" + std::to_string(c));
  spec.action_names.push_back("wait");
  spec.tmc_label = "M(n)";
  for (int c = 0; c < C; ++c) spec.subtask_vocab.push_back("try_" + std::to_string(c));
  spec.decomposition = true;
  spec.transition = [C, budget](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[3] != 0) return n;
    if (a < C && n.f[2] < budget) {
      n.f[2] = std::int16_t(n.f[2] + 1);
      if (a == n.f[0])
        n.f[3] = 1;
      else
        n.f[1] = std::int16_t(n.f[1] | (1 << a));
      if (n.f[3] == 0 && n.f[2] == budget) n.f[3] = 2;
    }
    return n;
  };
  spec.observe = [](const HiddenState& s) {
    return Observation{{s.f[2] > 0 && s.f[3] != 1 ? 1 : 0}};
  };
  spec.success = [](const HiddenState& s) { return s.f[3] == 1; };
  spec.gt_subtask_end = [](const HiddenState& prev, int, const HiddenState& next) {
    return next.f[2] != prev.f[2];
  };
  std::vector<HiddenState> init;
  for (int c = 0; c < C; ++c) {
    HiddenState s;
    s.f[0] = std::int16_t(c);
    init.push_back(s);
  }
  return finish(std::move(spec), std::move(init));
}

// ---------------------------------------------------------------------------
// blocks_ranking_try — same retry structure as battery_try over the six
// orderings of three blocks.
// State/obs layout identical to battery_try with six attempt actions.
TaskSpec make_ranking(const TaskParams& p) {
  require(p.attempt_slack >= 0 && p.attempt_slack <= 4,
          "blocks_ranking_try: attempt_slack must be in 0..4");
  const int C = 6;
  const int budget = C + p.attempt_slack;
  TaskSpec spec;
  spec.name = "blocks_ranking_try";
  spec.horizon = 12;
  spec.obs_alphabet = {2};
  spec.action_count = C + 1;
  for (int c = 0; c < C; ++c) spec.action_names.push_back("arrange_" + std::to_string(c));
  spec.action_names.push_back("wait");
  spec.tmc_label = "M(n)";
  for (int c = 0; c < C; ++c) spec.subtask_vocab.push_back("try_" + std::to_string(c));
  spec.decomposition = true;
  spec.transition = [C, budget](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[3] != 0) return n;
    if (a < C && n.f[2] < budget) {
      n.f[2] = std::int16_t(n.f[2] + 1);
      if (a == n.f[0])
        n.f[3] = 1;
      else
        n.f[1] = std::int16_t(n.f[1] | (1 << a));
      if (n.f[3] == 0 && n.f[2] == budget) n.f[3] = 2;
    }
    return n;
  };
  spec.observe = [](const HiddenState& s) {
    return Observation{{s.f[2] > 0 && s.f[3] != 1 ? 1 : 0}};
  };
  spec.success = [](const HiddenState& s) { return s.f[3] == 1; };
  spec.gt_subtask_end = [](const HiddenState& prev, int, const HiddenState& next) {
    return next.f[2] != prev.f[2];
  };
  std::vector<HiddenState> init;
  for (int c = 0; c < C; ++c) {
    HiddenState s;
    s.f[0] = std::int16_t(c);
    init.push_back(s);
  }
  return finish(std::move(spec), std::move(init));
}

// ---------------------------------------------------------------------------
// cover_blocks — three blocks with hidden colors are covered position by
// position; covering a block briefly reveals its color. Once everything is
// covered the display goes blank (so the third block's color is never
// shown), and uncovering must proceed in red-green-blue order; a wrong
// uncover is decisive. Remembering the revealed color-to-position map is
// the whole task. The observation deliberately excludes the cover count and
// per-position bitmap: with them, a single adaptively-written slot encodes
// the full permutation and the task stops needing multi-slot memory.
// State: f0..f2 = color at position (permutation of red=0,green=1,blue=2),
//        f3 = covered count, f4 = uncovered count, f5 = last revealed color
//        (3 = none), f6 = result, f7 = uncovered bitmask.
// Obs:   [all covered (2), last color (4, masked to 3 once all covered),
//         uncovered count (4)]
TaskSpec make_cover(const TaskParams&) {
  TaskSpec spec;
  spec.name = "cover_blocks";
  spec.horizon = 10;
  spec.obs_alphabet = {2, 4, 4};
  spec.action_count = 5;
  spec.action_names = {"cover_next", "uncover_0", "uncover_1", "uncover_2", "wait"};
  spec.tmc_label = "M(n)";
  spec.subtask_vocab = {"cover_1",       "cover_2",       "cover_3",
                        "uncover_pos_0", "uncover_pos_1", "uncover_pos_2"};
  spec.decomposition = true;
  spec.transition = [](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[6] != 0) return n;
    if (a == 0) {
      if (n.f[3] < 3 && n.f[4] == 0) {
        n.f[5] = n.f[std::size_t(n.f[3])];
        n.f[3] = std::int16_t(n.f[3] + 1);
      }
    } else if (a >= 1 && a <= 3) {
      int pos = a - 1;
      bool covered = pos < n.f[3] && !((n.f[7] >> pos) & 1);
      if (n.f[3] == 3 && covered) {
        if (n.f[std::size_t(pos)] == n.f[4]) {
          n.f[7] = std::int16_t(n.f[7] | (1 << pos));
          n.f[4] = std::int16_t(n.f[4] + 1);
          n.f[5] = 3;
          if (n.f[4] == 3) n.f[6] = 1;
        } else {
          n.f[6] = 2;
        }
      }
    }
    return n;
  };
  spec.observe = [](const HiddenState& s) {
    int all_covered = s.f[3] == 3 ? 1 : 0;
    int last = all_covered ? 3 : s.f[5];
    return Observation{{all_covered, last, s.f[4]}};
  };
  spec.success = [](const HiddenState& s) { return s.f[6] == 1; };
  spec.gt_subtask_end = [](const HiddenState& prev, int, const HiddenState& next) {
    return next.f[3] != prev.f[3] || next.f[4] != prev.f[4] || next.f[6] != prev.f[6];
  };
  std::vector<HiddenState> init;
  int colors[3] = {0, 1, 2};
  std::sort(colors, colors + 3);
  do {
    HiddenState s;
    s.f[0] = std::int16_t(colors[0]);
    s.f[1] = std::int16_t(colors[1]);
    s.f[2] = std::int16_t(colors[2]);
    s.f[5] = 3;
    init.push_back(s);
  } while (std::next_permutation(colors, colors + 3));
  return finish(std::move(spec), std::move(init));
}

// ---------------------------------------------------------------------------
// press_button — the digit display is visible only before the first action;
// the buttons themselves never change appearance, so press counts must be
// remembered. press_right confirms and is decisive.
// State: f0 = d1, f1 = d2 (0 when single-digit), f2 = left presses,
//        f3 = mid presses, f4 = phase (display masked once 1), f5 = result.
// Obs:   one display channel per digit (digit_max+1, 0 = masked)
TaskSpec make_press(const TaskParams& p) {
  require(p.digit_max >= 2 && p.digit_max <= 4, "press_button: digit_max must be in 2..4");
  require(p.num_digits >= 1 && p.num_digits <= 2,
          "press_button: num_digits must be 1 or 2");
  const int M = p.digit_max, D = p.num_digits;
  TaskSpec spec;
  spec.name = "press_button";
  spec.horizon = 12;
  spec.obs_alphabet = {M + 1};
  if (D == 2) spec.obs_alphabet.push_back(M + 1);
  spec.action_count = 4;
  spec.action_names = {"press_left", "press_mid", "press_right", "wait"};
  spec.tmc_label = "M(n)";
  spec.subtask_vocab = {"press_left", "press_mid", "confirm"};
  spec.decomposition = true;
  spec.transition = [M](const HiddenState& s, int a) {
    HiddenState n = s;
    if (n.f[5] != 0) return n;
    n.f[4] = 1;
    // Counters saturate one past the largest digit: once overshot they can
    // never match again, so the merged overshoot state is faithful (and it
    // keeps the reachable state space finite).
    if (a == 0)
      n.f[2] = std::int16_t(std::min(n.f[2] + 1, M + 1));
    else if (a == 1)
      n.f[3] = std::int16_t(std::min(n.f[3] + 1, M + 1));
    else if (a == 2)
      n.f[5] = (n.f[2] == n.f[0] && n.f[3] == n.f[1]) ? 1 : 2;
    return n;
  };
  spec.observe = [D](const HiddenState& s) {
    Observation o;
    o.symbols.push_back(s.f[4] == 0 ? s.f[0] : 0);
    if (D == 2) o.symbols.push_back(s.f[4] == 0 ? s.f[1] : 0);
    return o;
  };
  spec.success = [](const HiddenState& s) { return s.f[5] == 1; };
  spec.gt_subtask_end = [](const HiddenState& prev, int, const HiddenState& next) {
    return next.f[2] != prev.f[2] || next.f[3] != prev.f[3] || next.f[5] != prev.f[5];
  };
  std::vector<HiddenState> init;
  for (int d1 = 1; d1 <= M; ++d1) {
    if (D == 1) {
      HiddenState s;
      s.f[0] = std::int16_t(d1);
      init.push_back(s);
    } else {
      for (int d2 = 1; d2 <= M; ++d2) {
        HiddenState s;
        s.f[0] = std::int16_t(d1);
        s.f[1] = std::int16_t(d2);
        init.push_back(s);
      }
    }
  }
  return finish(std::move(spec), std::move(init));
}

}  // namespace

const std::vector<std::string>& all_task_names() {
  static const std::vector<std::string> names = {
      "pick_fixed_block", "observe_and_pick_up", "rearrange_blocks", "put_back_block",
      "swap_blocks",      "swap_t",              "battery_try",      "blocks_ranking_try",
      "cover_blocks",     "press_button"};
  return names;
}

TaskSpec build_task(const std::string& name, const TaskParams& params) {
  std::string base = name;
  TaskParams p = params;
  bool reduced = false;
  const std::string suffix = "_reduced";
  if (base.size() > suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    base = base.substr(0, base.size() - suffix.size());
    reduced = true;
    // Reduced instances shrink the knobs that drive search-space size; tasks
    // that are already exhaustively checkable keep their defaults.
    if (base == "observe_and_pick_up") p.slots = 2;
    if (base == "rearrange_blocks" || base == "put_back_block") p.pads = 2;
    if (base == "swap_t") p.orients = 2;
    if (base == "press_button") {
      p.num_digits = 1;
      p.digit_max = 3;
    }
  }
  TaskSpec spec;
  if (base == "pick_fixed_block")
    spec = make_pick_fixed(p);
  else if (base == "observe_and_pick_up")
    spec = make_observe_pick(p);
  else if (base == "rearrange_blocks")
    spec = make_rearrange(p);
  else if (base == "put_back_block")
    spec = make_put_back(p);
  else if (base == "swap_blocks")
    spec = make_swap_blocks(p);
  else if (base == "swap_t")
    spec = make_swap_t(p);
  else if (base == "battery_try")
    spec = make_battery(p);
  else if (base == "blocks_ranking_try")
    spec = make_ranking(p);
  else if (base == "cover_blocks")
    spec = make_cover(p);
  else if (base == "press_button")
    spec = make_press(p);
  else
    throw ContractError("unknown task name: " + name);
  if (reduced) {
    // Tighten the horizon to the longest shortest solution. Controller
    // search cost grows exponentially with depth, and a tight horizon also
    // lets the reachability prune reject wasted moves immediately.
    if (base == "cover_blocks") spec.horizon = 6;
    if (base == "press_button") spec.horizon = 4;
  }
  spec.name = name;
  if (!spec.gt_subtask_end) {
    auto success = spec.success;
    spec.gt_subtask_end = [success](const HiddenState& prev, int, const HiddenState& next) {
      return success(next) && !success(prev);
    };
  }
  return spec;
}

namespace {

// Scripted experts read the hidden state directly. They are deterministic
// and never repeat a failed attempt on the retry tasks.
AgentFn expert_for(const TaskSpec& spec) {
  std::string base = spec.name;
  const std::string suffix = "_reduced";
  if (base.size() > suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0)
    base = base.substr(0, base.size() - suffix.size());

  if (base == "pick_fixed_block") {
    return [](const HiddenState& s, const Observation&, int) {
      return AgentStep{int(s.f[0]), 0, true};
    };
  }
  if (base == "observe_and_pick_up") {
    const int S = int(spec.obs_alphabet[0]) - 1;
    return [S](const HiddenState& s, const Observation&, int) {
      if (s.f[5] == 0) return AgentStep{S, 0, false};  // wait through the reveal
      for (int j = 0; j < S; ++j)
        if (s.f[1 + j] == s.f[0]) return AgentStep{j, 0, true};
      return AgentStep{S, 0, false};
    };
  }
  if (base == "rearrange_blocks") {
    const int P = int(spec.obs_alphabet[2]) - 1;
    return [P](const HiddenState& s, const Observation&, int t) {
      if (t == 0) return AgentStep{2 * P + 1, 0, false};  // wait: observe the pad
      if (s.f[2] == 0) {
        int j = s.f[0] == 0 ? 1 : 0;
        return AgentStep{j, 0, false};
      }
      if (s.f[2] == 1) return AgentStep{P, 0, false};
      return AgentStep{P + 1 + s.f[0], 0, true};
    };
  }
  if (base == "put_back_block") {
    const int P = int(spec.obs_alphabet[0]) - 3;
    return [P](const HiddenState& s, const Observation&, int) {
      if (s.f[1] < P && s.f[2] == 0) return AgentStep{int(s.f[1]), 0, false};  // pick pad
      if (s.f[1] == P + 1 && s.f[2] == 0) return AgentStep{2 * P + 1, 0, false};
      if (s.f[1] == P && s.f[2] == 0) return AgentStep{2 * P + 2, 0, false};  // press
      if (s.f[1] == P && s.f[2] != 0) return AgentStep{P, 0, false};  // pick center
      return AgentStep{P + 1 + s.f[0], 0, true};  // place on original pad
    };
  }
  if (base == "swap_blocks") {
    auto move_index = [](int src, int dst) {
      static const int pairs[6][2] = {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
      for (int i = 0; i < 6; ++i)
        if (pairs[i][0] == src && pairs[i][1] == dst) return i;
      return 7;
    };
    return [move_index](const HiddenState& s, const Observation&, int) {
      int a = s.f[0], b = s.f[1], oa = s.f[2], ob = s.f[3];
      if (a == oa && b == ob) {
        int e = 3 - a - b;
        return AgentStep{move_index(a, e), 0, false};
      }
      if (b == ob) return AgentStep{move_index(b, oa), 0, false};
      if (a != ob) return AgentStep{move_index(a, ob), 0, false};
      return AgentStep{6, 0, true};  // press
    };
  }
  if (base == "swap_t") {
    const int R = int(spec.obs_alphabet[4]) - 1;
    return [R](const HiddenState& s, const Observation&, int) {
      auto place = [R](int pad, int o) { return 3 + pad * R + o; };
      int la = s.f[0], lb = s.f[1];
      if (la == 0 && lb == 1) return AgentStep{0, 0, false};           // pick A
      if (la == 3) {
        if (lb == 1) return AgentStep{place(2, s.f[3]), 0, false};     // A to stage
        return AgentStep{place(1, s.f[3]), 0, true};                   // A to right
      }
      if (lb == 1) return AgentStep{1, 0, false};                      // pick B
      if (lb == 3) return AgentStep{place(0, s.f[2]), 0, false};       // B to left
      return AgentStep{2, 0, false};                                   // pick A at stage
    };
  }
  if (base == "battery_try" || base == "blocks_ranking_try") {
    const int C = spec.action_count - 1;
    return [C](const HiddenState& s, const Observation&, int) {
      for (int c = 0; c < C; ++c)
        if (!((s.f[1] >> c) & 1)) return AgentStep{c, c, true};
      return AgentStep{C, 0, false};
    };
  }
  if (base == "cover_blocks") {
    return [](const HiddenState& s, const Observation&, int) {
      if (s.f[3] < 3) return AgentStep{0, int(s.f[3]), true};  // cover_{k+1}
      for (int pos = 0; pos < 3; ++pos)
        if (s.f[std::size_t(pos)] == s.f[4] && !((s.f[7] >> pos) & 1))
          return AgentStep{1 + pos, 3 + pos, true};
      return AgentStep{4, 0, false};
    };
  }
  if (base == "press_button") {
    return [](const HiddenState& s, const Observation&, int) {
      if (s.f[2] < s.f[0]) return AgentStep{0, 0, true};
      if (s.f[3] < s.f[1]) return AgentStep{1, 1, true};
      return AgentStep{2, 2, true};
    };
  }
  throw ContractError("no expert for task: " + spec.name);
}

}  // namespace

AgentFn expert_policy(const TaskSpec& spec) { return expert_for(spec); }

DemoSet generate_demos(const TaskSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw ContractError("generate_demos: n must be >= 1");
  DemoSet set;
  set.task = spec.name;
  set.base_seed = seed;
  AgentFn expert = expert_policy(spec);
  for (int i = 0; i < n; ++i) {
    std::uint64_t s = derive_seed(seed, "demo", std::uint64_t(i));
    EpisodeTrace trace = rollout(spec, expert, s, spec.horizon);
    if (!trace.success)
      throw ContractError("expert failed on task " + spec.name + " seed " +
                          std::to_string(s));
    Demonstration d;
    d.task = spec.name;
    d.seed = s;
    d.steps = trace.steps;
    set.demos.push_back(std::move(d));
  }
  return set;
}

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

struct Reader {
  const std::string& s;
  std::size_t pos = 0;
  explicit Reader(const std::string& str) : s(str) {}
  void need(std::size_t n) const {
    if (pos + n > s.size()) throw IoError("demoset file truncated");
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = std::uint16_t(std::uint8_t(s[pos])) |
                      std::uint16_t(std::uint8_t(s[pos + 1])) << 8;
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(s[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(s[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string v = s.substr(pos, n);
    pos += n;
    return v;
  }
};

}  // namespace

void save_demoset(const DemoSet& set, const std::string& path) {
  std::string body;
  for (const Demonstration& d : set.demos) {
    json steps = json::array();
    for (const TraceStep& st : d.steps)
      steps.push_back({{"obs", st.obs.symbols},
                       {"action", st.action},
                       {"end", st.end_flag},
                       {"subtask", st.subtask}});
    json line = {{"seed", d.seed}, {"steps", steps}};
    body += line.dump();
    body += '\n';
  }
  std::string out = "RMBD";
  put_u16(out, set.version);
  put_u16(out, std::uint16_t(set.task.size()));
  out += set.task;
  put_u32(out, std::uint32_t(set.demos.size()));
  put_u64(out, set.base_seed);
  out += body;
  put_u32(out, crc32(body.data(), body.size()));
  write_file(path, out);
}

DemoSet load_demoset(const std::string& path) {
  std::string raw = read_file(path);
  Reader r(raw);
  if (r.bytes(4) != "RMBD") throw IoError("demoset file: bad magic");
  DemoSet set;
  set.version = r.u16();
  if (set.version != 1)
    throw IoError("demoset file: unsupported version " + std::to_string(set.version));
  std::size_t name_len = r.u16();
  set.task = r.bytes(name_len);
  std::uint32_t count = r.u32();
  set.base_seed = r.u64();
  if (raw.size() < r.pos + 4) throw IoError("demoset file truncated");
  std::string body = raw.substr(r.pos, raw.size() - r.pos - 4);
  Reader tail(raw);
  tail.pos = raw.size() - 4;
  std::uint32_t stored = tail.u32();
  if (stored != crc32(body.data(), body.size()))
    throw IoError("demoset file: checksum failure");
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t nl = body.find('\n', pos);
    if (nl == std::string::npos) nl = body.size();
    std::string line = body.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError(std::string("demoset file: malformed line: ") + e.what());
    }
    Demonstration d;
    d.task = set.task;
    d.seed = j["seed"].get<std::uint64_t>();
    for (const json& st : j["steps"]) {
      TraceStep step;
      step.obs.symbols = st["obs"].get<std::vector<int>>();
      step.action = st["action"].get<int>();
      step.end_flag = st["end"].get<bool>();
      step.subtask = st["subtask"].get<int>();
      d.steps.push_back(std::move(step));
    }
    set.demos.push_back(std::move(d));
  }
  if (set.demos.size() != count) throw IoError("demoset file: demo count mismatch");
  return set;
}

}  // namespace mem0
