#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bhh/torus.hpp"

namespace bhh {

// One block/translate stage: points of the previous process are grouped
// into blocks of length 2*block_len where the second half repeats the first
// half shifted by epsilon in x, and the whole index axis is then displaced
// by shift_index.
struct Stage {
  double epsilon = 0.0;
  std::int64_t block_len = 1;
  std::int64_t shift_index = 0;

  void validate() const;
};

// Full recipe for a finite-stage process: the base seed of the iid-uniform
// stream plus the ordered list of stages (stages[0] applied first). Supports
// pure random-access evaluation at any integer index, including negatives.
struct ProcessSpec {
  std::uint64_t base_seed = 0;
  std::vector<Stage> stages;

  void validate() const;
};

// Index t of the base iid-uniform stream; deterministic in (seed, t) and
// marginally uniform on [0,1)^2.
TorusPoint base_eval(std::uint64_t seed, std::int64_t t);

struct HatIndex {
  std::int64_t base_index = 0;
  bool shifted = false;

  friend bool operator==(const HatIndex&, const HatIndex&) = default;
};

// Position u of the blocked process maps to a base index and a flag saying
// whether that occurrence is the epsilon-translated copy. Blocks are
// [2kN, 2(k+1)N) with floor-toward-minus-infinity block arithmetic so the
// doubly infinite index axis is handled uniformly.
HatIndex hat_index_map(std::int64_t u, std::int64_t n_block);

// X^(j)_t for the first `stage_count` stages of the spec (0 = iid base).
TorusPoint eval(const ProcessSpec& spec, int stage_count, std::int64_t t);

// The segment (X_a, ..., X_b); requires a <= b.
std::vector<TorusPoint> sample_segment(const ProcessSpec& spec, int stage_count,
                                       std::int64_t a, std::int64_t b);

// Draws every stage's shift index independently and uniformly on
// [0, 2*block_len), deterministically from rng_seed.
ProcessSpec draw_shift_indices(ProcessSpec spec, std::uint64_t rng_seed);

// A fresh realization of the same construction: stage parameters are kept,
// the base seed is re-derived from (master_seed, rep), and the shift indices
// are either re-drawn or pinned to zero.
ProcessSpec replicate_spec(const ProcessSpec& proto, std::uint64_t master_seed,
                           std::int64_t rep, bool pin_shift_indices);

// (t*phi1 mod 1, t*phi2 mod 1) for t = 1..n.
std::vector<TorusPoint> kronecker_sequence(double phi1, double phi2,
                                           std::int64_t n);
std::vector<TorusPoint> kronecker_sequence(std::int64_t n);

struct ScheduleEntry {
  std::int64_t block_len = 0;
  double epsilon = 0.0;
};

// Bookkeeping for the inductive parameter choice: the decreasing eta
// tolerances, the accepted (N_j, eps_j) pairs, and the n-grid each
// acceptance was verified on.
struct Schedule {
  std::vector<double> etas;
  std::vector<ScheduleEntry> chosen;
  std::vector<std::int64_t> calibration_grid;

  void validate() const;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Estimates E[L(X^(j)[0:n-1])] / sqrt(n) for the given spec prefix.
using RatioEstimator = std::function<double(
    const ProcessSpec& spec, int stage_count, std::int64_t n, int reps)>;

struct CalibrationOptions {
  int grid_factor = 4;
  int reps = 3;
  std::int64_t candidate_base = 64;
  std::int64_t max_block_len = std::int64_t{1} << 21;
};

struct CalibrationResult {
  std::int64_t block_len = 0;
  double epsilon = 0.0;
  std::vector<std::pair<std::int64_t, double>> grid_ratios;
  int rejected_candidates = 0;
};

// Searches block lengths of the form candidate_base * j * 2^i, smallest
// first, subject to N_j > j^2 * N_{j-1}. A candidate is accepted when the
// estimated ratio at every n of a log-spaced grid spanning
// [floor(N_j/j), 2*j*N_j] stays within eta_j-relative distance of beta_hat.
// epsilon_j is then the largest value that keeps eps*sqrt(j)*sqrt(N) <= eta_j
// exactly, capped at half the previous stage's epsilon. Throws
// CalibrationError when no candidate below max_block_len passes.
CalibrationResult calibrate_schedule(const ProcessSpec& spec, Schedule& schedule,
                                     int j, const RatioEstimator& estimator,
                                     double beta_hat,
                                     const CalibrationOptions& options = {});

std::int64_t floor_div(std::int64_t a, std::int64_t b);

}  // namespace bhh
