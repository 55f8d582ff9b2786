#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mvreg/attention.hpp"
#include "mvreg/diffusion.hpp"
#include "mvreg/geometry.hpp"
#include "mvreg/losses.hpp"
#include "mvreg/structured_text.hpp"

namespace mvreg {

inline constexpr const char* kToolVersion = "mvreg 0.1.0";

enum class SurrogateKind { Oracle, Kabsch };
enum class PriorKind { Perturbed, Attention, Baseline };

struct ExperimentConfig {
  SceneConfig scene;
  // When min != max, the scan count is drawn per trial from [min, max].
  int n_scans_min = 2;
  int n_scans_max = 50;
  DiffusionConfig diffusion;
  SurrogateKind surrogate = SurrogateKind::Kabsch;
  double surrogate_noise = 0.0;
  PriorKind prior = PriorKind::Perturbed;
  double prior_rot_deg = 20.0;   // gt-perturbed prior: rotation scale, degrees
  double prior_trans_m = 0.5;    // gt-perturbed prior: translation scale, meters
  LossConfig loss;
  MetricThresholds thresholds;
  AAConfig attention;
  bool attention_cov_features = false;  // add covariance eigenvalue channels to tokens
  bool run_baselines = false;
  double baseline_noise = 0.0;
  double baseline_outliers = 0.0;
  int trials = 1;
  std::uint64_t master_seed = 0;
  int jobs = 1;
  std::string out_dir = "out";
};

// Config file round trip; parse applies file values over defaults.
ExperimentConfig experiment_config_from_node(const StNode& root);
StNode experiment_config_to_node(const ExperimentConfig& cfg);

// Fixed substream layout per trial, so results do not depend on evaluation
// order or parallelism.
struct TrialStreams {
  RngStream scene, prior, denoise, baseline, scan_count, surrogate_noise;
};
TrialStreams trial_streams(std::uint64_t master_seed, int trial);

// Builds the requested prior for a scene (gt-perturbed by default).
PoseSet build_prior(const ExperimentConfig& cfg, const Scene& scene, RngStream& rng);

struct MethodResult {
  std::string method;
  EvalReport report;
};

struct TrialResult {
  int trial = 0;
  bool failed = false;
  std::string error;
  std::vector<MethodResult> methods;
};

struct ExperimentReport {
  std::vector<TrialResult> trials;  // ordered by trial index
  std::vector<std::string> methods;
};

// Runs all trials (parallel up to cfg.jobs), writes per-trial pair CSVs,
// summary.csv, ecdf.csv and run_manifest under cfg.out_dir. Throws only
// when every trial fails or the output directory is unusable.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Report emission alone (summary.csv, ecdf.csv, run_manifest); throws
// std::invalid_argument on an empty method set.
void emit_report(const ExperimentReport& results, const ExperimentConfig& cfg);

}  // namespace mvreg
