#include "bhh/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

#include "bhh/rng.hpp"

namespace bhh {

void RegionQuery::validate() const {
  if (!(width > 0.0 && width <= 1.0) || !(height > 0.0 && height <= 1.0))
    throw std::invalid_argument("region width/height must lie in (0,1]");
  if (!(container_side > 0.0 && container_side <= 1.0))
    throw std::invalid_argument("container_side must lie in (0,1]");
  if (width > container_side || height > container_side)
    throw std::invalid_argument("region must fit its container square");
}

LocalUniformityParams hat_transform_update(const LocalUniformityParams& p,
                                           double eps, std::int64_t n_block) {
  if (!(eps > 0.0 && eps < p.alpha))
    throw std::invalid_argument("hat update requires 0 < eps < alpha");
  if (n_block < 1) throw std::invalid_argument("hat update requires N >= 1");
  return {0.5 * std::min(eps, p.alpha - eps), p.exception_bound + 4 * n_block};
}

LocalUniformityParams index_shift_update(const LocalUniformityParams& p,
                                         std::int64_t k) {
  if (k < 0) throw std::invalid_argument("index shift requires K >= 0");
  return {p.alpha, p.exception_bound + k};
}

LocalUniformityParams t_transform_update(const LocalUniformityParams& p,
                                         double eps, std::int64_t n_block) {
  return index_shift_update(hat_transform_update(p, eps, n_block), 2 * n_block);
}

namespace {

inline double wrap_delta(double v) {
  double r = v - std::floor(v);
  return r < 1.0 ? r : 0.0;
}

inline bool in_region(const TorusPoint& p, const RegionQuery& r) {
  return wrap_delta(p.x - r.x0) < r.width && wrap_delta(p.y - r.y0) < r.height;
}

}  // namespace

std::int64_t count_in_region(std::span<const TorusPoint> points,
                             const RegionQuery& region) {
  region.validate();
  std::int64_t count = 0;
  for (const TorusPoint& p : points)
    if (in_region(p, region)) ++count;
  return count;
}

VarianceFitReport variance_condition_fit(const ProcessSpec& spec, int stage_count,
                                         const RegionQuery& region,
                                         std::span<const std::int64_t> window_lengths,
                                         int reps, std::uint64_t master_seed) {
  if (reps < 2) throw std::invalid_argument("variance fit requires reps >= 2");
  region.validate();
  VarianceFitReport report;
  for (std::int64_t w : window_lengths) {
    double sum = 0.0, sum_sq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      const ProcessSpec spec_r = replicate_spec(spec, master_seed, rep, false);
      const std::vector<TorusPoint> seg = sample_segment(spec_r, stage_count, 0, w - 1);
      const auto c = static_cast<double>(count_in_region(seg, region));
      sum += c;
      sum_sq += c * c;
    }
    const double mean = sum / reps;
    const double var = (sum_sq - reps * mean * mean) / (reps - 1);
    report.window_variance.emplace_back(w, var);
    report.fitted_c = std::max(report.fitted_c, var / static_cast<double>(w));
  }
  return report;
}

double chi_square_p_value(double statistic, double dof) {
  const boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double chi_square_quantile(double probability, double dof) {
  const boost::math::chi_squared dist(dof);
  return boost::math::quantile(dist, probability);
}

namespace {

UniformityTest chi_square_on_cells(const std::vector<std::int64_t>& counts,
                                   std::int64_t n, int g) {
  const double expected = static_cast<double>(n) / (static_cast<double>(g) * g);
  double stat = 0.0;
  for (std::int64_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  UniformityTest t;
  t.statistic = stat;
  t.p_value = chi_square_p_value(stat, static_cast<double>(g) * g - 1);
  t.n = n;
  t.grid = g;
  return t;
}

}  // namespace

UniformityTest uniformity_chi_square(std::span<const TorusPoint> points, int g) {
  if (g < 2) throw std::invalid_argument("uniformity test requires g >= 2");
  const auto n = static_cast<std::int64_t>(points.size());
  if (n < 5ll * g * g)
    throw std::invalid_argument("uniformity test requires n >= 5*g^2");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(g) * g, 0);
  for (const TorusPoint& p : points) {
    const int ix = std::clamp(static_cast<int>(p.x * g), 0, g - 1);
    const int iy = std::clamp(static_cast<int>(p.y * g), 0, g - 1);
    ++counts[static_cast<std::size_t>(ix) * g + iy];
  }
  return chi_square_on_cells(counts, n, g);
}

UniformityTest uniformity_chi_square_region(std::span<const TorusPoint> points,
                                            const RegionQuery& region, int g) {
  if (g < 2) throw std::invalid_argument("uniformity test requires g >= 2");
  region.validate();
  const auto n = static_cast<std::int64_t>(points.size());
  if (n < 5ll * g * g)
    throw std::invalid_argument("uniformity test requires n >= 5*g^2");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(g) * g, 0);
  for (const TorusPoint& p : points) {
    const double u = wrap_delta(p.x - region.x0) / region.width;
    const double v = wrap_delta(p.y - region.y0) / region.height;
    const int ix = std::clamp(static_cast<int>(u * g), 0, g - 1);
    const int iy = std::clamp(static_cast<int>(v * g), 0, g - 1);
    ++counts[static_cast<std::size_t>(ix) * g + iy];
  }
  return chi_square_on_cells(counts, n, g);
}

TwinShiftReport twin_shift_uniformity_check(const ProcessSpec& spec,
                                            int stage_index,
                                            const RegionQuery& region,
                                            int window_blocks, int reps,
                                            std::uint64_t master_seed,
                                            bool allow_overlap) {
  if (stage_index < 1 || stage_index > static_cast<int>(spec.stages.size()))
    throw std::out_of_range("twin shift check: stage index out of range");
  region.validate();
  const Stage& stage = spec.stages[static_cast<std::size_t>(stage_index - 1)];
  const double eps = stage.epsilon;
  if (!allow_overlap) {
    if (!(eps > region.width))
      throw std::invalid_argument(
          "twin shift check: translate overlaps the region (eps <= width)");
    if (!(region.width + eps <= region.container_side))
      throw std::invalid_argument(
          "twin shift check: region plus translate exceeds the container");
  }

  std::vector<TorusPoint> collected;
  for (int rep = 0; rep < reps; ++rep) {
    const ProcessSpec spec_r = replicate_spec(spec, master_seed, rep, false);
    const std::int64_t n_base =
        static_cast<std::int64_t>(window_blocks) * stage.block_len;
    for (std::int64_t t = 0; t < n_base; ++t) {
      const TorusPoint p = eval(spec_r, stage_index - 1, t);
      if (in_region(p, region)) {
        collected.push_back(p);
        continue;
      }
      const TorusPoint shifted = translate(p, eps);
      if (in_region(shifted, region)) collected.push_back(shifted);
    }
  }

  const auto count = static_cast<std::int64_t>(collected.size());
  const int g = std::clamp(
      static_cast<int>(std::sqrt(static_cast<double>(count) / 5.0)), 2, 16);
  const UniformityTest t = uniformity_chi_square_region(collected, region, g);
  return {t.statistic, t.p_value, count, g};
}

namespace {

DiscrepancyResult discrepancy_grid(std::span<const TorusPoint> points, int m) {
  const auto n = static_cast<std::int64_t>(points.size());
  const std::size_t side = static_cast<std::size_t>(m) + 1;
  std::vector<std::int64_t> prefix(side * side, 0);
  for (const TorusPoint& p : points) {
    const int ix = std::clamp(static_cast<int>(p.x * m), 0, m - 1);
    const int iy = std::clamp(static_cast<int>(p.y * m), 0, m - 1);
    ++prefix[static_cast<std::size_t>(ix + 1) * side + (iy + 1)];
  }
  for (std::size_t i = 1; i < side; ++i)
    for (std::size_t j = 1; j < side; ++j)
      prefix[i * side + j] += prefix[(i - 1) * side + j] +
                              prefix[i * side + (j - 1)] -
                              prefix[(i - 1) * side + (j - 1)];

  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_m2 = 1.0 / (static_cast<double>(m) * m);
  double best = 0.0;
  for (int i1 = 0; i1 <= m; ++i1) {
    for (int i2 = i1 + 1; i2 <= m; ++i2) {
      const std::int64_t* row2 = &prefix[static_cast<std::size_t>(i2) * side];
      const std::int64_t* row1 = &prefix[static_cast<std::size_t>(i1) * side];
      const double wx = static_cast<double>(i2 - i1);
      for (int j1 = 0; j1 <= m; ++j1) {
        for (int j2 = j1 + 1; j2 <= m; ++j2) {
          const auto c = static_cast<double>(row2[j2] - row2[j1] - row1[j2] + row1[j1]);
          const double dev = std::fabs(c * inv_n - wx * (j2 - j1) * inv_m2);
          if (dev > best) best = dev;
        }
      }
    }
  }
  return {best, n, DiscrepancyMode::GridApprox, m};
}

// Exact supremum over closed rectangles of empirical - area: edges anchored
// at the data coordinates.
double discrepancy_exact_plus(const std::vector<double>& xs,
                              const std::vector<std::vector<double>>& ys_at_x,
                              std::int64_t n) {
  const double inv_n = 1.0 / static_cast<double>(n);
  double best = 0.0;
  std::vector<double> active;
  for (std::size_t ia = 0; ia < xs.size(); ++ia) {
    active.clear();
    for (std::size_t ib = ia; ib < xs.size(); ++ib) {
      for (double y : ys_at_x[ib])
        active.insert(std::upper_bound(active.begin(), active.end(), y), y);
      if (active.empty()) continue;
      const double w = xs[ib] - xs[ia];
      // max over i <= j of (j - i + 1)/n - w (z_j - z_i)
      double best_start = -1e300;
      for (std::size_t j = 0; j < active.size(); ++j) {
        best_start = std::max(best_start, w * active[j] - static_cast<double>(j) * inv_n);
        const double v = static_cast<double>(j + 1) * inv_n - w * active[j] + best_start;
        if (v > best) best = v;
      }
    }
  }
  return best;
}

// Exact supremum over open rectangles of area - empirical: edges at data
// coordinates or at the square boundary.
double discrepancy_exact_minus(const std::vector<double>& xs,
                               const std::vector<std::vector<double>>& ys_at_x,
                               const std::vector<double>& ys_critical,
                               std::int64_t n) {
  const double inv_n = 1.0 / static_cast<double>(n);
  double best = 0.0;
  std::vector<double> active;
  for (std::size_t ia = 0; ia < xs.size(); ++ia) {
    active.clear();
    for (std::size_t ib = ia + 1; ib < xs.size(); ++ib) {
      if (ib >= 2 && ib - 1 > ia) {
        // points on the previous right edge become interior
        for (double y : ys_at_x[ib - 1])
          active.insert(std::upper_bound(active.begin(), active.end(), y), y);
      }
      const double w = xs[ib] - xs[ia];
      // max over critical pairs yc_i < yc_j of w (c_j - c_i) - strict_count/n
      double best_start = -1e300;
      std::size_t below = 0;   // # active strictly below c
      std::size_t at_most = 0; // # active at or below c
      for (double c : ys_critical) {
        while (below < active.size() && active[below] < c) ++below;
        const double v = w * c - static_cast<double>(below) * inv_n + best_start;
        if (v > best) best = v;
        while (at_most < active.size() && active[at_most] <= c) ++at_most;
        best_start = std::max(best_start,
                              static_cast<double>(at_most) * inv_n - w * c);
      }
    }
  }
  return best;
}

DiscrepancyResult discrepancy_exact(std::span<const TorusPoint> points) {
  const auto n = static_cast<std::int64_t>(points.size());
  std::vector<double> xs{0.0, 1.0};
  std::vector<double> ys_critical{0.0, 1.0};
  for (const TorusPoint& p : points) {
    xs.push_back(p.x);
    ys_critical.push_back(p.y);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys_critical.begin(), ys_critical.end());
  ys_critical.erase(std::unique(ys_critical.begin(), ys_critical.end()),
                    ys_critical.end());

  std::vector<std::vector<double>> ys_at_x(xs.size());
  for (const TorusPoint& p : points) {
    const auto it = std::lower_bound(xs.begin(), xs.end(), p.x);
    ys_at_x[static_cast<std::size_t>(it - xs.begin())].push_back(p.y);
  }

  const double plus = discrepancy_exact_plus(xs, ys_at_x, n);
  const double minus = discrepancy_exact_minus(xs, ys_at_x, ys_critical, n);
  return {std::max(plus, minus), n, DiscrepancyMode::ExactAnchoredGrid, 0};
}

}  // namespace

DiscrepancyResult rectangle_discrepancy(std::span<const TorusPoint> points,
                                        DiscrepancyMode mode, int resolution) {
  if (points.empty())
    throw std::invalid_argument("discrepancy of an empty point set");
  if (mode == DiscrepancyMode::GridApprox) {
    if (resolution < 2)
      throw std::invalid_argument("grid discrepancy requires resolution >= 2");
    return discrepancy_grid(points, resolution);
  }
  if (points.size() > 500)
    throw std::invalid_argument("exact discrepancy capped at n <= 500");
  return discrepancy_exact(points);
}

}  // namespace bhh
