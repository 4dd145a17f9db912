#include "bhh/process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bhh/rng.hpp"

namespace bhh {

void Stage::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("stage epsilon must lie in (0,1)");
  if (block_len < 1) throw std::invalid_argument("stage block_len must be >= 1");
  if (shift_index < 0 || shift_index >= 2 * block_len)
    throw std::invalid_argument("stage shift_index must lie in [0, 2*block_len)");
}

void ProcessSpec::validate() const {
  for (const Stage& s : stages) s.validate();
}

void Schedule::validate() const {
  for (std::size_t i = 0; i + 1 < etas.size(); ++i)
    if (!(etas[i] > etas[i + 1]))
      throw std::invalid_argument("etas must be strictly decreasing");
  for (double e : etas)
    if (!(e > 0.0 && e < 1.0))
      throw std::invalid_argument("etas must lie in (0,1)");
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

TorusPoint base_eval(std::uint64_t seed, std::int64_t t) {
  const std::uint64_t u = rng::index_of(t);
  const double x = rng::to_unit(rng::counter_mix(seed, rng::kStreamBaseX, u));
  const double y = rng::to_unit(rng::counter_mix(seed, rng::kStreamBaseY, u));
  return TorusPoint(x, y);
}

HatIndex hat_index_map(std::int64_t u, std::int64_t n_block) {
  const std::int64_t k = floor_div(u, 2 * n_block);
  const std::int64_t r = u - 2 * n_block * k;
  if (r < n_block) return {k * n_block + r, false};
  return {k * n_block + (r - n_block), true};
}

TorusPoint eval(const ProcessSpec& spec, int stage_count, std::int64_t t) {
  if (stage_count < 0 || stage_count > static_cast<int>(spec.stages.size()))
    throw std::out_of_range("stage index out of range");
  if (stage_count == 0) return base_eval(spec.base_seed, t);
  const Stage& s = spec.stages[static_cast<std::size_t>(stage_count - 1)];
  const HatIndex h = hat_index_map(t + s.shift_index, s.block_len);
  const TorusPoint p = eval(spec, stage_count - 1, h.base_index);
  return translate(p, h.shifted ? s.epsilon : 0.0);
}

std::vector<TorusPoint> sample_segment(const ProcessSpec& spec, int stage_count,
                                       std::int64_t a, std::int64_t b) {
  if (a > b) throw std::invalid_argument("sample_segment requires a <= b");
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(b - a + 1));
  for (std::int64_t t = a; t <= b; ++t) out.push_back(eval(spec, stage_count, t));
  return out;
}

ProcessSpec draw_shift_indices(ProcessSpec spec, std::uint64_t rng_seed) {
  for (std::size_t i = 0; i < spec.stages.size(); ++i) {
    Stage& s = spec.stages[i];
    const std::uint64_t h = rng::counter_mix(rng_seed, rng::kStreamShift, i);
    s.shift_index = static_cast<std::int64_t>(
        rng::bounded(h, static_cast<std::uint64_t>(2 * s.block_len)));
  }
  return spec;
}

ProcessSpec replicate_spec(const ProcessSpec& proto, std::uint64_t master_seed,
                           std::int64_t rep, bool pin_shift_indices) {
  const std::uint64_t rep_seed =
      rng::counter_mix(master_seed, rng::kStreamRep, rng::index_of(rep));
  ProcessSpec spec = proto;
  spec.base_seed = rng::counter_mix(rep_seed, rng::kStreamRepBase, 0);
  if (pin_shift_indices) {
    for (Stage& s : spec.stages) s.shift_index = 0;
    return spec;
  }
  return draw_shift_indices(std::move(spec),
                            rng::counter_mix(rep_seed, rng::kStreamRepShift, 0));
}

std::vector<TorusPoint> kronecker_sequence(double phi1, double phi2,
                                           std::int64_t n) {
  if (n < 1) throw std::invalid_argument("kronecker_sequence requires n >= 1");
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t t = 1; t <= n; ++t) {
    const double td = static_cast<double>(t);
    out.emplace_back(std::fmod(td * phi1, 1.0), std::fmod(td * phi2, 1.0));
  }
  return out;
}

std::vector<TorusPoint> kronecker_sequence(std::int64_t n) {
  return kronecker_sequence(std::numbers::sqrt2, std::numbers::sqrt3, n);
}

namespace {

// Log-spaced integer grid over [lo, hi], ascending, deduplicated, endpoints
// always included.
std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi, int count) {
  std::vector<std::int64_t> grid;
  if (count < 2 || lo >= hi) {
    grid.push_back(lo);
    if (hi != lo) grid.push_back(hi);
    return grid;
  }
  const double llo = std::log(static_cast<double>(lo));
  const double lhi = std::log(static_cast<double>(hi));
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    auto v = static_cast<std::int64_t>(std::llround(std::exp(llo + f * (lhi - llo))));
    grid.push_back(std::clamp(v, lo, hi));
  }
  grid.front() = lo;
  grid.back() = hi;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

CalibrationResult calibrate_schedule(const ProcessSpec& spec, Schedule& schedule,
                                     int j, const RatioEstimator& estimator,
                                     double beta_hat,
                                     const CalibrationOptions& options) {
  if (j < 1) throw std::invalid_argument("calibrate_schedule requires j >= 1");
  if (!(beta_hat > 0.0))
    throw std::invalid_argument("calibrate_schedule requires beta_hat > 0");
  if (static_cast<int>(spec.stages.size()) < j - 1)
    throw std::invalid_argument("stage j-1 must be fully specified");
  if (static_cast<int>(schedule.etas.size()) < j)
    throw std::invalid_argument("schedule is missing eta_j");
  schedule.validate();

  const double eta = schedule.etas[static_cast<std::size_t>(j - 1)];
  const std::int64_t prev_block = j >= 2
      ? spec.stages[static_cast<std::size_t>(j - 2)].block_len
      : 1;
  const double prev_eps = j >= 2
      ? spec.stages[static_cast<std::size_t>(j - 2)].epsilon
      : 1.0;

  CalibrationResult result;
  for (std::int64_t n_block = options.candidate_base * j;
       n_block <= options.max_block_len; n_block *= 2) {
    if (n_block <= static_cast<std::int64_t>(j) * j * prev_block) continue;

    const std::int64_t lo = n_block / j;
    const std::int64_t hi = 2 * j * n_block;
    const std::vector<std::int64_t> grid = log_grid(lo, hi, options.grid_factor);

    bool ok = true;
    std::vector<std::pair<std::int64_t, double>> ratios;
    for (std::int64_t n : grid) {
      const double r = estimator(spec, j - 1, n, options.reps);
      ratios.emplace_back(n, r);
      if (std::fabs(r - beta_hat) > eta * beta_hat) {
        ok = false;
        break;  // smallest n first, so failures are cheap
      }
    }
    if (!ok) {
      ++result.rejected_candidates;
      continue;
    }

    // eps_j = min(eps_{j-1}/2, eta_j * j^(-1/2) * N_j^(-1/2)), nudged down
    // until eps*sqrt(j)*sqrt(N) <= eta_j holds exactly in floating point.
    const double scale = std::sqrt(static_cast<double>(j)) *
                         std::sqrt(static_cast<double>(n_block));
    double eps = std::min(prev_eps / 2.0, eta / scale);
    while (eps * scale > eta) eps = std::nextafter(eps, 0.0);

    result.block_len = n_block;
    result.epsilon = eps;
    result.grid_ratios = std::move(ratios);
    schedule.chosen.push_back({n_block, eps});
    schedule.calibration_grid = grid;
    return result;
  }
  throw CalibrationError(
      "no block length below the cap passed the ratio band; "
      "increase reps/grid or the cap");
}

}  // namespace bhh
