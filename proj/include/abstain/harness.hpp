#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "abstain/adversary.hpp"

namespace abstain {

enum class LearnerId {
  Baseline,
  Shattering,
  Vc1,
  Rect,
  AgnosticThresh,
  AgnosticBeyond,
};

enum class ClassKind { Thresholds, Intervals, Tree, Rectangles };

struct TreeSpec {
  std::shared_ptr<const TreeTopology> topology;  // null for random trees
  std::uint64_t target_mask = 0;
  int random_nodes = 0;  // > 0: generate a fresh tree per replication
};

struct ExperimentConfig {
  ClassKind class_kind = ClassKind::Thresholds;
  LearnerId learner = LearnerId::Baseline;
  int p = 1;  // rectangle dimension
  double threshold_a = 0.5;
  double interval_a = 0.35, interval_b = 0.65;
  Vec rect_lo, rect_hi;
  TreeSpec tree;
  KnownDistribution dist = Uniform01{};
  AdversaryStrategy adversary = NoOp{};
  NoiseChannel noise = NoiseNone{};
  long T = 1000;
  int replications = 1;
  std::uint64_t base_seed = 1;
  long mc_samples = 4096;
  int jobs = 0;  // 0: resolve from ABSTAIN_LAB_JOBS / hardware
  std::string results_csv = "results.csv";
  std::string summary_json = "summary.json";
  nlohmann::json canonical;  // normalized config used for the digest
};

// Parses and validates a config document; relative tree-file paths are
// resolved against config_dir. Throws ConfigError on any violation.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::string& config_dir = ".");

std::string config_digest(const ExperimentConfig& cfg);

struct RepResult {
  int rep = 0;
  std::uint64_t seed = 0;
  long T = 0;
  long mis = 0;
  long abstain_iid = 0;
  long rounds_injected = 0;
  bool invariants_ok = true;
  bool fstar_retained = true;
  bool aborted = false;
  std::string diagnostics;  // nested JSON document, one per replication
};

struct Summary {
  std::string digest;
  std::string learner;
  std::string class_kind;
  long T = 0;
  int replications = 0;
  double mean_mis = 0, ci_mis_lo = 0, ci_mis_hi = 0;
  double mean_abstain = 0, ci_abs_lo = 0, ci_abs_hi = 0;
  bool experimental = false;
  double mis_bound = 0, abstain_bound = 0;  // valid when !experimental
  bool mis_bound_satisfied = true, abstain_bound_satisfied = true;
  int aborted_reps = 0;
  int invariant_violations = 0;
  double wall_time_s = 0;
};

struct RepRun {
  RepResult result;
  RunResult run;  // full round logs, for replays and invariant re-checks
};

RepRun run_one_rep_full(const ExperimentConfig& cfg, int rep);
RepResult run_one_rep(const ExperimentConfig& cfg, int rep);
std::pair<Summary, std::vector<RepResult>> run_experiment(
    const ExperimentConfig& cfg);

std::string results_csv_text(const ExperimentConfig& cfg,
                             const std::vector<RepResult>& reps);
nlohmann::json summary_to_json(const Summary& s);

struct BoundParams {
  int d = 1;
  int p = 1;
  double eta = 0.1;
};

struct BoundPoint {
  long T = 0;
  double value = 0;
};

struct BoundFormula {
  std::string id;  // "misclassification" or "abstention"
  std::vector<BoundPoint> points;
};

struct BoundCurve {
  std::string learner;
  std::vector<BoundFormula> formulas;
};

// Exact bound formulas (natural log): baseline 2 ln T; shattering d^2 ln T
// and 6d; vc1 sqrt(T ln T) twice; rect p sqrt(T ln T) and
// 2p sqrt(T ln T) + 2p ln T; agnostic_thresh 1 and
// 6M ln(T/(12M) + 3/2)/ln(3/2) + 1 with M = ceil(16 ln T/(1-2 eta)^2).
BoundCurve bounds(const std::string& learner, const BoundParams& params,
                  const std::vector<long>& Ts);

int resolve_jobs(int requested);

int cli_main(int argc, char** argv);

}  // namespace abstain
