#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhh/process.hpp"
#include "bhh/torus.hpp"
#include "bhh/tsp.hpp"

namespace bhh {

inline constexpr std::uint64_t kDefaultMasterSeed = 1729;

// One Monte Carlo estimate of E[L_n]/sqrt(n).
struct EstimateRecord {
  std::int64_t n = 0;
  double mean_ratio = 0.0;
  double std_error = 0.0;
  int reps = 0;
  std::string checkpoint_kind = "plain";
  int stage_j = 0;
};

struct ExperimentConfig {
  ProcessSpec spec;
  Metric metric = Metric::Torus;
  HeuristicOptions solver;
  std::vector<std::int64_t> n_values;
  int reps = 20;
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::string out_dir;
  bool pin_shift_index = false;
  std::int64_t max_checkpoint_n = 4'000'000;
  int threads = 0;  // 0 = hardware default

  void validate() const;
};

struct RatioStat {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean of L(X^(j)[0:n-1])/sqrt(n) over `reps` independent realizations
// (fresh base seed and shift indices per rep, unless pinned). Deterministic
// in (proto, master_seed) and independent of worker count.
RatioStat mean_ratio_estimate(const ProcessSpec& proto, int stage_count,
                              std::int64_t n, int reps, std::uint64_t master_seed,
                              Metric metric, const HeuristicOptions& solver,
                              bool pin_shift_indices, int threads = 0);

// The standard ratio estimator bound to an experiment configuration, in the
// shape calibrate_schedule expects.
RatioEstimator make_ratio_estimator(const ExperimentConfig& config);

struct BetaEstimate {
  double beta_hat = 0.0;
  std::vector<EstimateRecord> records;
};

// Ratio records over config.n_values; beta_hat is the mean ratio at the
// largest n.
BetaEstimate estimate_beta(const ExperimentConfig& config);

// For every stage j of config.spec, estimates the ratio at the two
// checkpoints n = floor(N_j / j) ("recover(j)") and n = 2 j N_j ("dip(j)"),
// sampling X^(j) from index 0. Checkpoints above max_checkpoint_n are
// skipped.
std::vector<EstimateRecord> oscillation_experiment(const ExperimentConfig& config);

struct ClosenessReport {
  double empirical_distance = 0.0;
  double mc_std_error = 0.0;
  double bound = 0.0;  // m / N_j
  std::int64_t reps = 0;
  int cells = 0;
  int m = 0;
};

// Compares the law of X^(j)[0:m] against X^(j-1)[0:m] on the product cell
// partition (cells per axis and per coordinate). The statistic is the
// half-L1 distance between the two empirical histograms, debiased by the
// same statistic computed between two independent samples of the coarser
// process, batched for an honest standard error. It lower-bounds the true
// total-variation distance in expectation.
ClosenessReport closeness_diagnostic(const ProcessSpec& spec, int stage_count,
                                     int m, int cells, std::int64_t reps,
                                     std::uint64_t master_seed);

// 3 n^{3/2} sum_k 1/N_{j+k} over the known tail block lengths; when
// extrapolate_rule1 is set the tail continues past the known entries with
// N_{j+k} = (j+k)^2 N_{j+k-1}, which upper-bounds the remainder.
double limit_gap_bound(int j, std::int64_t n,
                       std::span<const std::int64_t> tail_block_lens,
                       bool extrapolate_rule1);

struct LogTspPoint {
  std::int64_t n = 0;
  double value = 0.0;
  bool defined = false;
};

using PointGenerator = std::function<std::vector<TorusPoint>(std::int64_t)>;

// log L(first n points) / log n for each n; undefined entries (n = 1 or
// L = 0) are flagged rather than emitted.
std::vector<LogTspPoint> logtsp_diagnostic(const PointGenerator& generate,
                                           std::span<const std::int64_t> n_values,
                                           Metric metric,
                                           const HeuristicOptions& solver);

}  // namespace bhh
