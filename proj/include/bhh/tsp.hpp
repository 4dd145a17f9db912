#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bhh/torus.hpp"

namespace bhh {

enum class SolveMethod { Brute, Exact, Heuristic, Partition, LoopAugmented };

// A shortest-path solution: visiting order, its length under `metric`, and
// how it was obtained. `optimal` is true only for the Brute/Exact solvers.
struct PathSolution {
  std::vector<int> order;
  double length = 0.0;
  SolveMethod method = SolveMethod::Heuristic;
  Metric metric = Metric::Torus;
  bool optimal = false;
};

// Sum of the n-1 consecutive distances of `order`; 0 for n <= 1.
// Throws if order is not a permutation of [0, points.size()).
double path_length(std::span<const TorusPoint> points, std::span<const int> order,
                   Metric metric);

inline constexpr int kBruteCap = 9;
inline constexpr int kExactCap = 18;

// Global minimum over all undirected visiting orders; n <= kBruteCap.
PathSolution solve_brute(std::span<const TorusPoint> points, Metric metric);

// Held-Karp subset dynamic program for the shortest Hamiltonian path with
// free endpoints; n <= cap.
PathSolution solve_exact(std::span<const TorusPoint> points, Metric metric,
                         int cap = kExactCap);

struct HeuristicOptions {
  int candidate_k = 10;
  int max_passes = 60;
  std::uint64_t seed = 1;
};

// Nearest-neighbor start from a seeded random vertex followed by 2-opt
// restricted to grid-bucketed candidate lists. Always returns a valid path;
// never claims optimality.
PathSolution solve_heuristic(std::span<const TorusPoint> points, Metric metric,
                             const HeuristicOptions& options = {});

struct PartitionOptions {
  int subsolver_cap = 12;  // cells at most this large are solved exactly
  HeuristicOptions heuristic;
};

struct PartitionDetail {
  PathSolution solution;
  double cell_length_sum = 0.0;
  double stitch_length = 0.0;
  int nonempty_cells = 0;
};

// Solves each cell of a k x k dissection independently and stitches the cell
// paths in plowman's (boustrophedon) order. The stitching cost is below 3k
// by construction, which the implementation asserts on every invocation.
PartitionDetail solve_partition_detail(std::span<const TorusPoint> points, int k,
                                       Metric metric,
                                       const PartitionOptions& options = {});
PathSolution solve_partition(std::span<const TorusPoint> points, int k,
                             Metric metric, const PartitionOptions& options = {});

struct PartitionLowerReport {
  double sum_cells = 0.0;
  double implied_c0 = 0.0;
  bool used_heuristic = false;
};

// Reports the per-cell optimal path total and the constant implied by
// comparing it against a reference length; diagnostic only.
PartitionLowerReport partition_lower_diagnostic(std::span<const TorusPoint> points,
                                                int k, Metric metric,
                                                double reference_length,
                                                int exact_cap = kExactCap);

struct TwinPair {
  int index = 0;       // index into the base point set
  TorusPoint twin;     // the translated companion of that point
};

// Extends a path over `base_points` to one over the union of base points and
// twins: each twin is visited immediately after its base point. The union
// indexes base points first, then twins in pair order. The resulting length
// never exceeds base.length + 2 * sum of pair distances.
PathSolution loop_augmented_path(const PathSolution& base,
                                 std::span<const TorusPoint> base_points,
                                 std::span<const TwinPair> pairs, Metric metric);

}  // namespace bhh
