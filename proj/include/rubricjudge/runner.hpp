#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rubricjudge/attack.hpp"
#include "rubricjudge/dataset.hpp"
#include "rubricjudge/judge.hpp"
#include "rubricjudge/perturb.hpp"

namespace rubricjudge {

struct MissingGold : std::runtime_error {
  explicit MissingGold(const std::string& what) : std::runtime_error(what) {}
};
struct OutputDirLocked : std::runtime_error {
  explicit OutputDirLocked(const std::string& what) : std::runtime_error(what) {}
};

struct PerturbSettings {
  double rate = 0.1;
  int max_changes = 2;
  std::vector<std::string> operators;  // names; empty means all operators
  ResourcePaths resources;
};

struct AttackSettings {
  std::size_t group_size = 100;
  std::map<std::string, std::string> payload_files;  // kind name -> override file
};

struct HarnessConfig {
  std::uint64_t seed = 0;
  JudgeConfig judge;
  MockOracleConfig mock;
  PerturbSettings perturb;
  AttackSettings attack;
  std::vector<double> thresholds;  // empty means the default 0.55..0.95 grid
};

// JSON config with sections "judge", "mock", "perturb", "attack" plus
// top-level "seed" and "thresholds". Every field is optional; unknown keys
// are rejected so typos fail loudly.
HarnessConfig load_harness_config(const std::filesystem::path& path);

std::unique_ptr<JudgeBackend> make_backend(const HarnessConfig& config);

struct RunContext {
  Corpus corpus;
  HarnessConfig config;
  std::filesystem::path out_dir;
  long long max_calls = 0;  // > 0 caps backend calls; exhaustion throws CallBudgetExhausted
};

// Identity of a run: a hash of everything that shapes its responses
// (experiment, corpus fingerprint, schemes, seed, sampling-relevant judge
// fields, experiment settings). Operational knobs like parallelism, retries,
// and rate limits stay out so a resume may tune them freely. The run log and
// all reports carry this id; re-running the same inputs reuses the same log.
std::string compute_run_id(const std::string& experiment, const Corpus& corpus,
                           const HarnessConfig& config, const std::vector<SchemeId>& schemes);

struct ExperimentResult {
  std::string run_id;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> warnings;
};

// Schemes for which every item has (or can collapse to) a gold label,
// ordered 2-way, 3-way, 5-way.
std::vector<SchemeId> schemes_available(const Corpus& corpus);

// Plurality vote over each item's parsed runs, ties broken toward the
// smallest label code; items with no parsed run are absent.
std::map<std::string, Label> plurality_predictions(std::span<const JudgeResponse> responses);

// Agreement with gold across the three label schemes, one grading pass each
// (runs_per_item forced to 1). Writes complexity.csv, complexity.svg, and
// per-scheme metrics_<scheme>.json / confusion_<scheme>.txt. Throws
// MissingGold unless every item covers all three schemes.
ExperimentResult run_complexity(const RunContext& ctx);

// Coverage / effective-accuracy sweep per scheme. Empty `schemes` means all
// available ones. Writes trust_curve.csv and trust_curve.svg.
ExperimentResult run_trust_curve(const RunContext& ctx, std::vector<SchemeId> schemes = {});

// Control pass plus one pass per perturbation operator on `scheme`. Writes
// robustness.csv, robustness_flips.csv, robustness.svg. Operator failures
// become warnings; the control pass runs exactly once.
ExperimentResult run_robustness(const RunContext& ctx, SchemeId scheme);

// Control plus the three injection families on seeded samples of
// attack.group_size items each. Writes attack_defense.csv,
// attack_distribution.csv, attack_failures.csv, attack_distribution.svg.
ExperimentResult run_attack(const RunContext& ctx, SchemeId scheme);

// One grading pass with the configured runs_per_item; writes the run log,
// grade_predictions.csv, metrics_<scheme>.json, confusion_<scheme>.txt.
ExperimentResult run_grade(const RunContext& ctx, SchemeId scheme);

// Rebuilds every chart whose source CSV exists in out_dir. Running it twice
// changes nothing.
std::vector<std::filesystem::path> regenerate_reports(const std::filesystem::path& out_dir);

}  // namespace rubricjudge
