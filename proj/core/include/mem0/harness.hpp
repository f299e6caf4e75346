#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mem0/policy.hpp"
#include "mem0/tasks.hpp"

namespace mem0 {

// Everything one experiment needs; mirrors the flat key=value config file
// documented in configs/example.cfg. CLI flags override file values.
struct ExperimentConfig {
  std::string task;
  TaskParams params;
  PolicyConfig policy;
  int demo_count = 50;
  int episodes = 100;
  int iterations = 5000;
  int batch = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string variant = "vanilla";

  void validate() const;
};

// Default config for a task, with per-task execution presets (chunk prefix
// length, sliding capacity, termination threshold, decomposition flag) and a
// training budget small enough for a single CPU core.
ExperimentConfig default_config(const std::string& task);

// Applies one key=value override; unknown keys raise ContractError.
void apply_config_kv(ExperimentConfig& cfg, const std::string& key,
                     const std::string& value);
// Parses a flat key=value file ('#' comments, blank lines ignored).
void load_config_file(ExperimentConfig& cfg, const std::string& path);
// Maps a variant name onto the policy flags; unknown variant raises.
void apply_variant(ExperimentConfig& cfg, const std::string& variant);

struct TrainStats {
  int iterations = 0;
  double final_diffusion_loss = 0.0;
  double final_classifier_loss = 0.0;
  double final_planner_loss = 0.0;
};

// Joint behavior cloning of the three heads on demonstration mini-batches.
// Deterministic given (demos, cfg). Writes per-iteration losses to
// loss_csv_path when nonempty. Aborts with ContractError on non-finite loss.
TrainStats train_model(Mem0Model& model, const DemoSet& demos,
                       const ExperimentConfig& cfg,
                       const std::string& loss_csv_path = "");

struct ResultRow {
  std::string task;
  std::string variant;
  int successes = 0;
  int episodes = 0;
  double success_rate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double mean_steps = 0.0;
  double mean_planner_calls = 0.0;
  std::uint64_t seed = 0;
  std::string checkpoint_sha256;
};

// Seeded rollouts with seeds derive_seed(cfg.seed, "eval", i) — disjoint
// from demo seeds by tag. Asserts planner_calls == completed_subtasks + 1
// on every episode.
ResultRow evaluate_model(Mem0Model& model, const TaskSpec& spec,
                         const ExperimentConfig& cfg);

// Trains and evaluates each variant with shared demo data and evaluation
// seeds. gt_classifier reuses the vanilla weights (inference-only change).
std::vector<ResultRow> ablate(const ExperimentConfig& base,
                              const std::vector<std::string>& variants);

// Default ablation variant set for a task's memory-complexity class.
std::vector<std::string> variant_set(const TaskSpec& spec);

std::string results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);
std::string results_json(const std::vector<ResultRow>& rows,
                         const ExperimentConfig& cfg);

// One directional expectation checked by the report.
struct ExpectedOrdering {
  std::string description;
  std::string task_a, variant_a;
  std::string relation;  // ">", ">=", "<", "<="
  // Right side: either another row (task_b, variant_b) or a constant bound.
  std::string task_b, variant_b;
  double bound = 0.0;
  bool against_bound = false;
};

// A full-scale reference number from the original study, shown side by side
// with desk-scale results but never compared numerically.
struct ReferenceEntry {
  std::string task;
  std::string variant;
  double success_rate = 0.0;  // fraction
  std::string source_label;   // e.g. "full-scale reference (original study)"
};

const std::vector<ReferenceEntry>& reference_table();

// Writes <out_dir>/results.csv, results.json, report.md. The markdown holds
// one verdict line per ordering; reference numbers appear only in a labeled
// reference column.
void write_report(const std::vector<ResultRow>& rows,
                  const std::vector<ExpectedOrdering>& orderings,
                  const std::vector<ReferenceEntry>& reference,
                  const ExperimentConfig& cfg);

std::vector<ExpectedOrdering> default_orderings();

int cli(int argc, char** argv);

}  // namespace mem0
