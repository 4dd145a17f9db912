#include "bhh/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "bhh/rng.hpp"

namespace bhh {

namespace {

constexpr double kFewSanityCap = 3.0 * 1.2;

// Runs fn(i) for i in [0, count) across workers; each index writes only its
// own output slot, so the result is identical for any worker count.
template <typename Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn) {
  int workers = threads > 0
      ? threads
      : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(
      std::min<std::int64_t>(workers, std::max<std::int64_t>(count, 1)));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

void ExperimentConfig::validate() const {
  spec.validate();
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (n_values.empty()) throw std::invalid_argument("n_values must be nonempty");
  for (std::size_t i = 0; i + 1 < n_values.size(); ++i)
    if (!(n_values[i] < n_values[i + 1]))
      throw std::invalid_argument("n_values must be strictly increasing");
}

RatioStat mean_ratio_estimate(const ProcessSpec& proto, int stage_count,
                              std::int64_t n, int reps, std::uint64_t master_seed,
                              Metric metric, const HeuristicOptions& solver,
                              bool pin_shift_indices, int threads) {
  if (n < 1) throw std::invalid_argument("mean_ratio_estimate requires n >= 1");
  if (reps < 1) throw std::invalid_argument("mean_ratio_estimate requires reps >= 1");

  std::vector<double> ratios(static_cast<std::size_t>(reps), 0.0);
  parallel_for(reps, threads, [&](std::int64_t rep) {
    const ProcessSpec spec_r =
        replicate_spec(proto, master_seed, rep, pin_shift_indices);
    const std::vector<TorusPoint> pts =
        sample_segment(spec_r, stage_count, 0, n - 1);
    HeuristicOptions opts = solver;
    opts.seed = rng::counter_mix(
        rng::counter_mix(master_seed, rng::kStreamRep, rng::index_of(rep)),
        rng::kStreamSolver, 1);
    const PathSolution sol = solve_heuristic(pts, metric, opts);
    ratios[static_cast<std::size_t>(rep)] =
        sol.length / std::sqrt(static_cast<double>(n));
  });

  double sum = 0.0;
  for (double r : ratios) sum += r;
  const double mean = sum / reps;
  double ss = 0.0;
  for (double r : ratios) ss += (r - mean) * (r - mean);
  const double std_error =
      reps > 1 ? std::sqrt(ss / (reps - 1) / reps) : 0.0;
  if (!(mean <= kFewSanityCap))
    throw std::logic_error("mean ratio exceeds the 3*sqrt(n) sanity cap");
  return {mean, std_error};
}

RatioEstimator make_ratio_estimator(const ExperimentConfig& config) {
  const ProcessSpec proto = config.spec;
  const Metric metric = config.metric;
  const HeuristicOptions solver = config.solver;
  const std::uint64_t master = config.master_seed;
  const bool pin = config.pin_shift_index;
  const int threads = config.threads;
  return [=](const ProcessSpec& spec, int stage_count, std::int64_t n,
             int reps) {
    (void)proto;
    const std::uint64_t sub_seed =
        rng::counter_mix(master, rng::kStreamCheckpoint, rng::index_of(n));
    return mean_ratio_estimate(spec, stage_count, n, reps, sub_seed, metric,
                               solver, pin, threads)
        .mean;
  };
}

BetaEstimate estimate_beta(const ExperimentConfig& config) {
  config.validate();
  BetaEstimate out;
  const int stage_count = static_cast<int>(config.spec.stages.size());
  const std::string kind = config.spec.stages.empty() ? "iid" : "plain";
  for (std::size_t i = 0; i < config.n_values.size(); ++i) {
    const std::int64_t n = config.n_values[i];
    const std::uint64_t sub_seed =
        rng::counter_mix(config.master_seed, rng::kStreamCheckpoint, i);
    const RatioStat stat = n == 1
        ? RatioStat{0.0, 0.0}
        : mean_ratio_estimate(config.spec, stage_count, n, config.reps, sub_seed,
                              config.metric, config.solver,
                              config.pin_shift_index, config.threads);
    out.records.push_back(
        {n, stat.mean, stat.std_error, config.reps, kind, stage_count});
  }
  out.beta_hat = out.records.back().mean_ratio;
  return out;
}

std::vector<EstimateRecord> oscillation_experiment(const ExperimentConfig& config) {
  config.spec.validate();
  if (config.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (config.spec.stages.empty())
    throw std::invalid_argument("oscillation experiment needs at least one stage");

  std::vector<EstimateRecord> records;
  const int stage_total = static_cast<int>(config.spec.stages.size());
  for (int j = 1; j <= stage_total; ++j) {
    const std::int64_t block = config.spec.stages[static_cast<std::size_t>(j - 1)].block_len;
    const std::int64_t n_recover = block / j;
    const std::int64_t n_dip = 2ll * j * block;
    const std::pair<std::int64_t, std::string> checkpoints[2] = {
        {n_recover, "recover(" + std::to_string(j) + ")"},
        {n_dip, "dip(" + std::to_string(j) + ")"},
    };
    for (const auto& [n, kind] : checkpoints) {
      if (n < 1 || n > config.max_checkpoint_n) continue;
      const std::uint64_t sub_seed = rng::counter_mix(
          config.master_seed, rng::kStreamCheckpoint,
          rng::index_of(2ll * j + (kind.starts_with("dip") ? 1 : 0)));
      const RatioStat stat = mean_ratio_estimate(
          config.spec, j, n, config.reps, sub_seed, config.metric, config.solver,
          config.pin_shift_index, config.threads);
      records.push_back({n, stat.mean, stat.std_error, config.reps, kind, j});
    }
  }
  return records;
}

namespace {

// Half-L1 distance between two normalized histograms.
double half_l1(const std::vector<std::int64_t>& a,
               const std::vector<std::int64_t>& b, double count_a,
               double count_b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    total += std::fabs(static_cast<double>(a[i]) / count_a -
                       static_cast<double>(b[i]) / count_b);
  return 0.5 * total;
}

}  // namespace

ClosenessReport closeness_diagnostic(const ProcessSpec& spec, int stage_count,
                                     int m, int cells, std::int64_t reps,
                                     std::uint64_t master_seed) {
  if (stage_count < 1 || stage_count > static_cast<int>(spec.stages.size()))
    throw std::out_of_range("closeness diagnostic: stage index out of range");
  if (m < 0) throw std::invalid_argument("closeness diagnostic requires m >= 0");
  if (cells < 2) throw std::invalid_argument("closeness diagnostic: cells >= 2");
  constexpr std::int64_t kBatches = 10;
  if (reps < 10 * kBatches)
    throw std::invalid_argument("closeness diagnostic needs reps >= 100");

  double total_cells = 1.0;
  for (int i = 0; i < 2 * (m + 1); ++i) {
    total_cells *= cells;
    if (total_cells > static_cast<double>(1 << 24))
      throw std::invalid_argument("closeness diagnostic: histogram too large");
  }
  const auto n_cells = static_cast<std::size_t>(total_cells);

  auto cell_index = [&](const std::vector<TorusPoint>& triple) {
    std::size_t idx = 0;
    for (const TorusPoint& p : triple) {
      const int ix = std::clamp(static_cast<int>(p.x * cells), 0, cells - 1);
      const int iy = std::clamp(static_cast<int>(p.y * cells), 0, cells - 1);
      idx = idx * static_cast<std::size_t>(cells) * cells +
            static_cast<std::size_t>(ix) * cells + iy;
    }
    return idx;
  };

  const std::int64_t per_batch = reps / kBatches;
  const std::int64_t n_block =
      spec.stages[static_cast<std::size_t>(stage_count - 1)].block_len;

  std::vector<double> deltas;
  std::int64_t used = 0;
  std::vector<std::int64_t> h_fine(n_cells), h_coarse(n_cells), h_null(n_cells);
  for (std::int64_t b = 0; b < kBatches; ++b) {
    std::fill(h_fine.begin(), h_fine.end(), 0);
    std::fill(h_coarse.begin(), h_coarse.end(), 0);
    std::fill(h_null.begin(), h_null.end(), 0);
    for (std::int64_t r = 0; r < per_batch; ++r) {
      const std::int64_t rep = b * per_batch + r;
      const ProcessSpec fine = replicate_spec(spec, master_seed, 3 * rep, false);
      const ProcessSpec coarse = replicate_spec(spec, master_seed, 3 * rep + 1, false);
      const ProcessSpec nul = replicate_spec(spec, master_seed, 3 * rep + 2, false);
      ++h_fine[cell_index(sample_segment(fine, stage_count, 0, m))];
      ++h_coarse[cell_index(sample_segment(coarse, stage_count - 1, 0, m))];
      ++h_null[cell_index(sample_segment(nul, stage_count - 1, 0, m))];
    }
    const auto cnt = static_cast<double>(per_batch);
    deltas.push_back(half_l1(h_fine, h_coarse, cnt, cnt) -
                     half_l1(h_null, h_coarse, cnt, cnt));
    used += per_batch;
  }

  double mean = 0.0;
  for (double d : deltas) mean += d;
  mean /= static_cast<double>(deltas.size());
  double ss = 0.0;
  for (double d : deltas) ss += (d - mean) * (d - mean);
  const double se = std::sqrt(ss / (deltas.size() - 1) /
                              static_cast<double>(deltas.size()));

  ClosenessReport report;
  report.empirical_distance = std::max(0.0, mean);
  report.mc_std_error = se;
  report.bound = static_cast<double>(m) / static_cast<double>(n_block);
  report.reps = used;
  report.cells = cells;
  report.m = m;
  return report;
}

double limit_gap_bound(int j, std::int64_t n,
                       std::span<const std::int64_t> tail_block_lens,
                       bool extrapolate_rule1) {
  if (j < 0 || n < 1) throw std::invalid_argument("limit gap: bad arguments");
  double sum = 0.0;
  double last = 0.0;
  int k = 0;
  for (std::int64_t block : tail_block_lens) {
    ++k;
    last = static_cast<double>(block);
    sum += 1.0 / last;
  }
  if (extrapolate_rule1 && k > 0) {
    double block = last;
    for (int step = k + 1; step < k + 200; ++step) {
      const double factor = static_cast<double>(j + step) * (j + step);
      block *= factor;
      const double term = 1.0 / block;
      sum += term;
      if (term < 1e-18 * sum) break;
    }
  }
  return 3.0 * std::pow(static_cast<double>(n), 1.5) * sum;
}

std::vector<LogTspPoint> logtsp_diagnostic(const PointGenerator& generate,
                                           std::span<const std::int64_t> n_values,
                                           Metric metric,
                                           const HeuristicOptions& solver) {
  std::vector<LogTspPoint> out;
  for (std::int64_t n : n_values) {
    const std::vector<TorusPoint> pts = generate(n);
    if (static_cast<std::int64_t>(pts.size()) != n)
      throw std::invalid_argument("generator returned wrong point count");
    LogTspPoint entry;
    entry.n = n;
    if (n <= 1) {
      out.push_back(entry);
      continue;
    }
    const PathSolution sol = solve_heuristic(pts, metric, solver);
    if (sol.length <= 0.0) {
      out.push_back(entry);
      continue;
    }
    entry.value = std::log(sol.length) / std::log(static_cast<double>(n));
    entry.defined = true;
    out.push_back(entry);
  }
  return out;
}

}  // namespace bhh
