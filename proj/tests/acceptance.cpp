// Acceptance suite: ten gated criteria, one PASS/FAIL line each, exit 0 only
// when every criterion holds. Slow work (behavior-cloning runs) executes once
// and feeds several criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <mem0/ddpm.hpp>
#include <mem0/harness.hpp>
#include <mem0/nn.hpp>
#include <mem0/policy.hpp>
#include <mem0/rng.hpp>
#include <mem0/tasks.hpp>
#include <mem0/tmc.hpp>
#include <mem0/util.hpp>

using namespace mem0;
namespace fs = std::filesystem;

namespace {

double now_s() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void progress(const std::string& msg) {
  std::fprintf(stderr, "[acceptance] %s\n", msg.c_str());
  std::fflush(stderr);
}

// ---------------------------------------------------------------------------
// Criterion 1: finite-difference gradient checks over every tape operation.

using BuildFn = std::function<Tape::Var(Tape&, ParamStore&)>;

double max_grad_err(ParamStore& store, const BuildFn& build) {
  store.zero_grads();
  Tape tape;
  Tape::Var loss = build(tape, store);
  tape.backward(loss);
  std::map<std::string, std::vector<float>> analytic;
  for (auto& [name, e] : store.entries) analytic[name] = e.grad.data;
  const float h = 1.0f / 2048.0f;
  double worst = 0.0;
  for (auto& [name, e] : store.entries) {
    for (std::size_t i = 0; i < e.value.data.size(); ++i) {
      float orig = e.value.data[i];
      float fp = orig + h, fm = orig - h;
      e.value.data[i] = fp;
      Tape tp;
      double lp = tp.value(build(tp, store))[0];
      e.value.data[i] = fm;
      Tape tm;
      double lm = tm.value(build(tm, store))[0];
      e.value.data[i] = orig;
      double num = (lp - lm) / (double(fp) - double(fm));
      double ana = analytic[name][i];
      double denom = std::max({std::abs(num), std::abs(ana), 1e-4});
      worst = std::max(worst, std::abs(num - ana) / denom);
    }
  }
  store.zero_grads();
  return worst;
}

ParamStore random_store(const std::vector<std::pair<std::string, std::vector<int>>>& spec,
                        std::uint64_t seed) {
  ParamStore s;
  SplitMix64 g(seed);
  for (const auto& [name, shape] : spec) {
    Tensor& t = s.add(name, shape);
    for (float& x : t.data) x = float(g.gaussian() * 0.7);
  }
  return s;
}

std::vector<float> random_vec(int n, std::uint64_t seed) {
  SplitMix64 g(seed);
  std::vector<float> v(std::size_t(n), 0.0f);
  for (float& x : v) x = float(g.gaussian());
  return v;
}

bool criterion_gradients(std::string& detail) {
  double t0 = now_s();
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto scal = [&](Tape& t, Tape::Var v, int n) { return t.mse(v, random_vec(n, s)); };
    {
      ParamStore p = random_store({{"W", {3, 4}}, {"b", {3}}, {"x", {4}}}, 100 + s);
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.linear(t.param(ps, "W"), t.param(ps, "b"), t.param(ps, "x")), 3);
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.linear(t.param(ps, "W"), -1, t.param(ps, "x")), 3);
      }));
    }
    {
      ParamStore p = random_store({{"A", {3, 4}}, {"B", {4, 2}}, {"x", {4}}}, 200 + s);
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.mean_rows(t.matmul(t.param(ps, "A"), t.param(ps, "B"))), 2);
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.matvec(t.param(ps, "A"), t.param(ps, "x")), 3);
      }));
    }
    {
      ParamStore p = random_store({{"x", {5}}, {"y", {5}}}, 300 + s);
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.gelu(t.param(ps, "x")), 5);
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.scale(t.add(t.param(ps, "x"), t.param(ps, "y")), -1.7), 5);
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.softmax(t.param(ps, "x")), 5);
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return t.bce_logit(t.slice(t.param(ps, "x"), 2, 1), float(s % 2));
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return t.ce_logits(t.param(ps, "x"), int(s % 5));
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return t.mse(t.param(ps, "x"), random_vec(5, s ^ 3));
      }));
    }
    {
      ParamStore p = random_store({{"M", {4, 3}}, {"a", {2}}, {"b", {3}}, {"w", {4}}},
                                  400 + s);
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.mean_rows(t.param(ps, "M")), 3);
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.row(t.param(ps, "M"), 1), 3);
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.slice(t.concat({t.param(ps, "a"), t.param(ps, "b")}), 1, 3), 3);
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.mean_rows(t.stack_rows({t.param(ps, "b"), t.param(ps, "b")})), 3);
      }));
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, t.weighted_rows(t.softmax(t.param(ps, "w")), t.param(ps, "M")), 3);
      }));
    }
    {
      SplitMix64 g(700 + s);
      ParamStore p;
      mlp_init(p, "net", {3, 5, 2}, g);
      worst = std::max(worst, max_grad_err(p, [&](Tape& t, ParamStore& ps) {
        return scal(t, mlp_apply(t, ps, "net", 2, t.leaf_vec(random_vec(3, s))), 2);
      }));
      DenoiserConfig dc;
      dc.H = 2;
      dc.d_a = 3;
      dc.cond_dim = 4;
      dc.time_dim = 4;
      dc.hidden = 6;
      dc.T = 4;
      ParamStore q;
      SplitMix64 g2(800 + s);
      denoiser_init(q, "den", dc, g2);
      worst = std::max(worst, max_grad_err(q, [&](Tape& t, ParamStore& ps) {
        Tape::Var noisy = t.leaf_vec(random_vec(dc.H * dc.d_a, s));
        Tape::Var cond = t.leaf_vec(random_vec(dc.cond_dim, s ^ 9));
        return scal(t, denoiser_forward(t, ps, "den", dc, noisy, int(s % 4), cond),
                    dc.H * dc.d_a);
      }));
    }
  }
  double elapsed = now_s() - t0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "max rel err %.3g, %.1fs", worst, elapsed);
  detail = buf;
  return worst < 1e-4 && elapsed < 120.0;
}

// ---------------------------------------------------------------------------
// Criterion 2: memory-complexity certification on the reduced catalog.

bool criterion_tmc(std::string& detail) {
  struct Case {
    const char* name;
    int want;  // expected tmc field (-1 = certified "> 1", i.e. >= 2)
  };
  const Case cases[] = {
      {"pick_fixed_block", 0},
      {"observe_and_pick_up_reduced", 1},
      {"rearrange_blocks_reduced", 1},
      {"put_back_block_reduced", 1},
      {"swap_blocks_reduced", 1},
      {"swap_t_reduced", 1},
      {"battery_try_reduced", -1},
      {"blocks_ranking_try_reduced", -1},
      {"cover_blocks_reduced", -1},
      {"press_button_reduced", -1},
  };
  double slowest = 0.0;
  for (const Case& c : cases) {
    double t0 = now_s();
    TmcResult r = compute_tmc(build_task(c.name), 1);
    double dt = now_s() - t0;
    slowest = std::max(slowest, dt);
    if (!r.certified || r.tmc != c.want || dt >= 60.0) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: tmc %d (want %d), certified %d, %.1fs",
                    c.name, r.tmc, c.want, int(r.certified), dt);
      detail = buf;
      return false;
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "10/10 certified, slowest run %.1fs", slowest);
  detail = buf;
  return true;
}

// ---------------------------------------------------------------------------
// Training runs shared by criteria 3-6.

struct VariantOutcome {
  ResultRow row;
  double train_eval_s = 0.0;
  std::string ckpt;
};

std::map<std::string, VariantOutcome> run_task_variants(
    const std::string& task, const std::vector<std::string>& variants,
    const std::string& out_dir) {
  ExperimentConfig base = default_config(task);
  base.out_dir = out_dir;
  TaskSpec spec = build_task(task, base.params);
  DemoSet demos = generate_demos(spec, base.demo_count, base.seed);
  std::map<std::string, VariantOutcome> out;
  std::string vanilla_ckpt;
  for (const std::string& v : variants) {
    double t0 = now_s();
    ExperimentConfig cfg = base;
    apply_variant(cfg, v);
    cfg.variant = v;
    Mem0Model model = Mem0Model::create(spec, cfg.policy, derive_seed(cfg.seed, "model", 0));
    std::string ckpt = out_dir + "/ckpt_" + task + "_" + v + ".mem0";
    if (v == "gt_classifier") {
      // Inference-only switch: reuse the vanilla weights.
      model = load_checkpoint(vanilla_ckpt, spec);
      model.cfg = cfg.policy;
      save_checkpoint(model, ckpt);
    } else {
      train_model(model, demos, cfg, out_dir + "/loss_" + task + "_" + v + ".csv");
      save_checkpoint(model, ckpt);
    }
    if (v == "vanilla") vanilla_ckpt = ckpt;
    VariantOutcome o;
    o.row = evaluate_model(model, spec, cfg);
    o.train_eval_s = now_s() - t0;
    o.ckpt = ckpt;
    out[v] = o;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s %s: %d/%d success, %.0fs", task.c_str(),
                  v.c_str(), o.row.successes, o.row.episodes, o.train_eval_s);
    progress(buf);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 7: termination-rule first-hit semantics.

int brute_force_first_hit(const std::vector<int>& bits, int L) {
  for (int i = 0; i < int(bits.size()); ++i) {
    if (i + 1 < L) continue;
    bool all = true;
    for (int j = i - L + 1; j <= i; ++j)
      if (!bits[std::size_t(j)]) all = false;
    if (all) return i + 1;
  }
  return 0;
}

bool criterion_termination(std::string& detail) {
  long long checked = 0;
  for (int L : {1, 3, 8}) {
    for (int len = 0; len <= 12; ++len) {
      for (int mask = 0; mask < (1 << len); ++mask) {
        std::vector<int> bits(std::size_t(len), 0);
        for (int i = 0; i < len; ++i) bits[std::size_t(i)] = (mask >> i) & 1;
        Mem0State st;
        int fired_at = 0;
        for (int i = 0; i < len; ++i) {
          st.end_bits.push_back(bits[std::size_t(i)]);
          while (int(st.end_bits.size()) > L) st.end_bits.pop_front();
          if (fired_at == 0 && check_termination(st, L)) fired_at = i + 1;
        }
        if (fired_at != brute_force_first_hit(bits, L)) {
          detail = "mismatch at L=" + std::to_string(L) + " mask=" + std::to_string(mask);
          return false;
        }
        ++checked;
      }
    }
  }
  detail = std::to_string(checked) + " bit strings checked";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 8: mechanism invariants on randomized stub models.

PolicyConfig stub_config(const TaskSpec& spec) {
  PolicyConfig cfg;
  cfg.d_z = 8;
  cfg.enc_hidden = 8;
  cfg.enc_tokens = 2;
  cfg.cls_hidden = 8;
  cfg.plan_hidden = 8;
  cfg.den_hidden = 8;
  cfg.T_d = 2;
  cfg.H = 4;
  cfg.delta = 2;
  cfg.K = 3;
  cfg.L = 2;
  cfg.decomposition = spec.decomposition;
  return cfg;
}

bool traces_equal(const EpisodeTrace& a, const EpisodeTrace& b) {
  if (a.success != b.success || a.steps.size() != b.steps.size()) return false;
  for (std::size_t j = 0; j < a.steps.size(); ++j)
    if (a.steps[j].action != b.steps[j].action ||
        a.steps[j].end_flag != b.steps[j].end_flag ||
        a.steps[j].subtask != b.steps[j].subtask)
      return false;
  return true;
}

bool criterion_mechanisms(std::string& detail) {
  const char* tasks[] = {"put_back_block", "blocks_ranking_try", "press_button",
                         "cover_blocks"};
  int episodes = 0;
  for (const char* name : tasks) {
    TaskSpec spec = build_task(name);
    PolicyConfig cfg = stub_config(spec);
    for (std::uint64_t ep = 0; ep < 250; ++ep) {
      Mem0Model model = Mem0Model::create(spec, cfg, derive_seed(ep / 50, "stub", 0));
      std::vector<float> anchor_of_segment;
      int current_segment = -1;
      bool ok = true;
      EpisodeProbe probe = [&](const Mem0State& st, int) {
        if (int(st.sliding.size()) > cfg.K) ok = false;
        if (int(st.end_bits.size()) > cfg.L) ok = false;
        if (st.planner_calls != current_segment) {
          // New segment: buffers were just reset and refilled from scratch.
          current_segment = st.planner_calls;
          anchor_of_segment = st.anchor;
        } else if (st.anchor != anchor_of_segment) {
          if (!anchor_of_segment.empty() || st.anchor.empty())
            ok = false;
          else
            anchor_of_segment = st.anchor;
        }
      };
      EpisodeTrace t = run_episode(model, spec, cfg, derive_seed(99, "mech", ep), probe);
      if (!ok || !t.diagnostic.empty() || t.planner_calls != t.completed_subtasks + 1) {
        detail = std::string(name) + ": invariant violated at episode " +
                 std::to_string(ep);
        return false;
      }
      ++episodes;
    }
  }
  // Flag ablations must be bitwise-equal to physically emptied buffers.
  for (const char* name : {"put_back_block", "press_button"}) {
    TaskSpec spec = build_task(name);
    PolicyConfig base = stub_config(spec);
    Mem0Model model = Mem0Model::create(spec, base, 7);
    auto run_with = [&](bool na, bool ns, bool fa, bool fs, std::uint64_t ep) {
      PolicyConfig cfg = base;
      cfg.no_anchor = na;
      cfg.no_sliding = ns;
      cfg.force_empty_anchor = fa;
      cfg.force_empty_sliding = fs;
      return run_episode(model, spec, cfg, derive_seed(5, "abl", ep));
    };
    for (std::uint64_t ep = 0; ep < 20; ++ep) {
      if (!traces_equal(run_with(true, false, false, false, ep),
                        run_with(false, false, true, false, ep)) ||
          !traces_equal(run_with(false, true, false, false, ep),
                        run_with(false, false, false, true, ep))) {
        detail = std::string(name) + ": ablation/forced-empty mismatch";
        return false;
      }
      episodes += 4;
    }
  }
  detail = std::to_string(episodes) + " randomized episodes";
  return episodes >= 1000;
}

// ---------------------------------------------------------------------------
// Criterion 9: byte-identical results.csv across two seeded pipeline runs.

int run_cli(std::vector<std::string> args) {
  std::vector<char*> argv;
  args.insert(args.begin(), "mem0");
  for (std::string& a : args) argv.push_back(a.data());
  return cli(int(argv.size()), argv.data());
}

bool criterion_determinism(std::string& detail, const std::string& scratch) {
  std::string cfgpath = scratch + "/det.cfg";
  write_file(cfgpath,
             "task = put_back_block\n"
             "seed = 0\n"
             "demo_count = 12\n"
             "episodes = 12\n"
             "iterations = 40\n"
             "batch = 8\n"
             "policy.d_z = 16\n"
             "policy.enc_hidden = 16\n"
             "policy.enc_tokens = 2\n"
             "policy.cls_hidden = 8\n"
             "policy.plan_hidden = 8\n"
             "policy.den_hidden = 24\n"
             "policy.T_d = 4\n"
             "policy.H = 4\n"
             "policy.delta = 4\n");
  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    std::string dir = scratch + "/det" + std::to_string(run);
    fs::create_directories(dir);
    if (run_cli({"gen", "--config", cfgpath, "--out", dir}) != 0 ||
        run_cli({"train", "--config", cfgpath, "--out", dir}) != 0 ||
        run_cli({"eval", "--config", cfgpath, "--out", dir}) != 0) {
      detail = "pipeline run " + std::to_string(run) + " failed";
      return false;
    }
    csv[run] = read_file(dir + "/results.csv");
  }
  if (csv[0] != csv[1]) {
    detail = "results.csv differs between runs";
    return false;
  }
  detail = "two gen->train->eval runs, results.csv byte-identical (" +
           std::to_string(csv[0].size()) + " bytes)";
  return true;
}

// ---------------------------------------------------------------------------
// Criterion 10: expert soundness and absorbing success.

bool criterion_experts(std::string& detail) {
  for (const std::string& name : all_task_names()) {
    TaskSpec spec = build_task(name);
    AgentFn expert = expert_policy(spec);
    for (std::uint64_t i = 0; i < 100; ++i) {
      EpisodeTrace t =
          rollout(spec, expert, derive_seed(0, "expert-check", i), spec.horizon);
      if (!t.success) {
        detail = name + ": expert failed at seed index " + std::to_string(i);
        return false;
      }
    }
  }
  const char* reduced[] = {
      "pick_fixed_block",        "observe_and_pick_up_reduced",
      "rearrange_blocks_reduced", "put_back_block_reduced",
      "swap_blocks_reduced",     "swap_t_reduced",
      "battery_try_reduced",     "blocks_ranking_try_reduced",
      "cover_blocks_reduced",    "press_button_reduced"};
  for (const char* name : reduced) {
    TaskSpec spec = build_task(name);
    std::set<HiddenState> seen;
    std::deque<HiddenState> queue;
    for (const HiddenState& s : spec.enumerate_initial())
      if (seen.insert(s).second) queue.push_back(s);
    while (!queue.empty()) {
      HiddenState s = queue.front();
      queue.pop_front();
      for (int a = 0; a < spec.action_count; ++a) {
        HiddenState n = spec.transition(s, a);
        if (spec.success(s) && !spec.success(n)) {
          detail = std::string(name) + ": success is not absorbing";
          return false;
        }
        if (seen.insert(n).second) queue.push_back(n);
      }
    }
  }
  detail = "expert 100/100 on all 10 tasks; absorbing success exhaustive";
  return true;
}

}  // namespace

int main() {
  std::string scratch = (fs::temp_directory_path() / "mem0_acceptance").string();
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  bool pass[11] = {};
  std::string detail[11];

  progress("criterion 1: gradient checks");
  pass[1] = criterion_gradients(detail[1]);
  progress("criterion 2: memory-complexity oracle");
  pass[2] = criterion_tmc(detail[2]);
  progress("criterion 7: termination semantics");
  pass[7] = criterion_termination(detail[7]);
  progress("criterion 8: mechanism invariants");
  pass[8] = criterion_mechanisms(detail[8]);
  progress("criterion 10: expert and engine soundness");
  pass[10] = criterion_experts(detail[10]);
  progress("criterion 9: pipeline determinism");
  pass[9] = criterion_determinism(detail[9], scratch);

  // Behavior-cloning runs feeding criteria 3-6.
  progress("training runs for criteria 3-6 (this is the slow part)");
  std::map<std::string, std::map<std::string, VariantOutcome>> results;
  results["put_back_block"] =
      run_task_variants("put_back_block", {"vanilla", "no_anchor", "markovian"}, scratch);
  results["rearrange_blocks"] =
      run_task_variants("rearrange_blocks", {"vanilla", "markovian"}, scratch);
  results["battery_try"] =
      run_task_variants("battery_try", {"vanilla", "gt_classifier"}, scratch);
  results["blocks_ranking_try"] = run_task_variants(
      "blocks_ranking_try", {"vanilla", "no_key", "gt_classifier"}, scratch);
  results["cover_blocks"] =
      run_task_variants("cover_blocks", {"vanilla", "gt_classifier"}, scratch);
  results["press_button"] = run_task_variants(
      "press_button", {"vanilla", "no_key", "gt_classifier"}, scratch);

  auto rate = [&](const std::string& task, const std::string& v) {
    return results.at(task).at(v).row.success_rate;
  };

  // Criterion 3: exact memoryless cap plus trained markovian ceiling.
  {
    MemSearchResult r0 = best_value_with_memory(build_task("put_back_block"), 0);
    double mark = rate("put_back_block", "markovian");
    char buf[160];
    std::snprintf(buf, sizeof buf, "memoryless oracle value %.6f (certified %d), trained markovian %.2f",
                  r0.value, int(r0.certified), mark);
    detail[3] = buf;
    pass[3] = r0.certified && r0.value == 0.25 && mark <= 0.35;
  }

  // Criterion 4: memory benefit with bounded per-task wall time.
  {
    bool ok = true;
    std::string d;
    for (const char* task : {"put_back_block", "rearrange_blocks"}) {
      double v = rate(task, "vanilla"), m = rate(task, "markovian");
      double secs = results[task].at("vanilla").train_eval_s +
                    results[task].at("markovian").train_eval_s;
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s vanilla %.2f markovian %.2f (%.0fs); ", task, v,
                    m, secs);
      d += buf;
      ok = ok && v >= 0.80 && m <= 0.35 && secs < 1800.0;
    }
    detail[4] = d;
    pass[4] = ok;
  }

  // Criterion 5: ablation directionality with paired evaluation seeds.
  {
    bool a = true, b = true, c = true;
    for (const char* task : {"blocks_ranking_try", "press_button"})
      a = a && rate(task, "no_key") <= 0.35 && rate(task, "no_key") < rate(task, "vanilla");
    for (const char* task :
         {"battery_try", "blocks_ranking_try", "cover_blocks", "press_button"})
      b = b && rate(task, "gt_classifier") >= rate(task, "vanilla");
    c = rate("put_back_block", "no_anchor") < rate("put_back_block", "vanilla");
    char buf[200];
    std::snprintf(buf, sizeof buf, "(a) no_key collapse %s, (b) gt_classifier >= vanilla %s, (c) no_anchor drop %s",
                  a ? "ok" : "FAIL", b ? "ok" : "FAIL", c ? "ok" : "FAIL");
    detail[5] = buf;
    pass[5] = a && b && c;

    // The gated report: every verdict must be present and positive.
    std::vector<ResultRow> rows;
    for (auto& [task, vs] : results)
      for (auto& [v, o] : vs) rows.push_back(o.row);
    ExperimentConfig rep = default_config("put_back_block");
    rep.out_dir = scratch;
    write_report(rows, default_orderings(), reference_table(), rep);
  }

  // Criterion 6: planner-call accounting on every evaluated episode, checked
  // directly on reloaded checkpoints.
  {
    long long episodes = 0;
    bool ok = true;
    for (auto& [task, vs] : results) {
      ExperimentConfig cfg = default_config(task);
      TaskSpec spec = build_task(task, cfg.params);
      for (auto& [v, o] : vs) {
        Mem0Model model = load_checkpoint(o.ckpt, spec);
        for (std::uint64_t i = 0; i < 20 && ok; ++i) {
          EpisodeTrace t =
              run_episode(model, spec, model.cfg, derive_seed(cfg.seed, "eval", i));
          if (t.planner_calls != t.completed_subtasks + 1) ok = false;
          ++episodes;
        }
      }
    }
    detail[6] = std::to_string(episodes) +
                " trained-policy episodes re-checked (plus every evaluation episode "
                "asserted during criteria 3-5 and every stub episode in criterion 8)";
    pass[6] = ok;
  }

  static const char* kNames[11] = {
      "",
      "gradient correctness (finite differences, 20 seeds per op)",
      "memory-complexity certification (exact oracles, reduced catalog)",
      "memoryless cap on put_back_block (oracle 0.25; markovian <= 0.35)",
      "memory benefit (vanilla >= 0.80, markovian <= 0.35, < 30 min/task)",
      "ablation directionality (no_key, gt_classifier, no_anchor)",
      "planner-call accounting (planner_calls = completed_subtasks + 1)",
      "termination first-hit semantics (exhaustive, L in {1,3,8})",
      "mechanism invariants (>= 1000 randomized episodes)",
      "pipeline determinism (byte-identical results.csv)",
      "expert and engine soundness (expert 1.0; absorbing success)",
  };
  bool all = true;
  for (int i = 1; i <= 10; ++i) {
    std::printf("%s criterion %2d: %s — %s\n", pass[i] ? "PASS" : "FAIL", i, kNames[i],
                detail[i].c_str());
    all = all && pass[i];
  }
  std::printf("%s\n", all ? "ACCEPTANCE: ALL CRITERIA PASSED"
                          : "ACCEPTANCE: FAILURES PRESENT");
  return all ? 0 : 1;
}
