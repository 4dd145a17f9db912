#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bhh/process.hpp"
#include "bhh/torus.hpp"

namespace bhh {

// Axis-aligned rectangle on the torus, anchored at (x0, y0) with torus-wrapped
// membership. container_side is the side of a subsquare known to contain it.
struct RegionQuery {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 1.0;
  double height = 1.0;
  double container_side = 1.0;

  void validate() const;
};

// Scale/exception-count pair of the local-uniformity property.
struct LocalUniformityParams {
  double alpha = 1.0;
  std::int64_t exception_bound = 0;
};

// Parameter arithmetic for the block/translate transformation: the admissible
// scale shrinks below min(eps, alpha - eps) and the exception bound grows by
// 4N; an independent index shift by K grows it by K more.
LocalUniformityParams hat_transform_update(const LocalUniformityParams& p,
                                           double eps, std::int64_t n_block);
LocalUniformityParams index_shift_update(const LocalUniformityParams& p,
                                         std::int64_t k);
LocalUniformityParams t_transform_update(const LocalUniformityParams& p,
                                         double eps, std::int64_t n_block);

std::int64_t count_in_region(std::span<const TorusPoint> points,
                             const RegionQuery& region);

struct VarianceFitReport {
  std::vector<std::pair<std::int64_t, double>> window_variance;
  double fitted_c = 0.0;
};

// Estimates Var[count in region over windows [0:w-1]] across independent
// realizations; fitted_c is the largest variance-to-window ratio seen.
VarianceFitReport variance_condition_fit(const ProcessSpec& spec, int stage_count,
                                         const RegionQuery& region,
                                         std::span<const std::int64_t> window_lengths,
                                         int reps, std::uint64_t master_seed);

struct UniformityTest {
  double statistic = 0.0;
  double p_value = 1.0;
  std::int64_t n = 0;
  int grid = 0;
};

// Chi-square test of points against the uniform law on the unit square over a
// g x g cell grid; requires n >= 5 g^2.
UniformityTest uniformity_chi_square(std::span<const TorusPoint> points, int g);

// Same test against the uniform law on a rectangle.
UniformityTest uniformity_chi_square_region(std::span<const TorusPoint> points,
                                            const RegionQuery& region, int g);

struct TwinShiftReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::int64_t points_used = 0;
  int grid = 0;
};

// Collects, over complete blocks of the given stage, points of the region
// together with right-shifted points of the region's left translate, and
// tests the union for uniformity on the region. The geometry preconditions
// (translate disjoint from the region, both inside one container square) are
// enforced unless allow_overlap is set, which exists as a negative control:
// an overlapping translate doubles the mass on the overlap image.
TwinShiftReport twin_shift_uniformity_check(const ProcessSpec& spec,
                                            int stage_index,
                                            const RegionQuery& region,
                                            int window_blocks, int reps,
                                            std::uint64_t master_seed,
                                            bool allow_overlap = false);

enum class DiscrepancyMode { ExactAnchoredGrid, GridApprox };

struct DiscrepancyResult {
  double value = 0.0;
  std::int64_t n = 0;
  DiscrepancyMode mode = DiscrepancyMode::GridApprox;
  int resolution = 0;
};

// Largest deviation |empirical - area| over axis-aligned rectangles of the
// unit square (no wraparound). GridApprox restricts corners to an m x m
// lattice and lower-bounds the supremum; ExactAnchoredGrid scans the critical
// grid induced by the data coordinates and is exact (n <= 500).
DiscrepancyResult rectangle_discrepancy(std::span<const TorusPoint> points,
                                        DiscrepancyMode mode, int resolution);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_p_value(double statistic, double dof);
double chi_square_quantile(double probability, double dof);

}  // namespace bhh
