#include "bhh/tsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bhh/rng.hpp"

namespace bhh {

namespace {

constexpr double kGainEps = 1e-12;

void check_permutation(std::size_t n, std::span<const int> order) {
  if (order.size() != n)
    throw std::invalid_argument("order is not a permutation: wrong size");
  std::vector<char> seen(n, 0);
  for (int id : order) {
    if (id < 0 || static_cast<std::size_t>(id) >= n || seen[id])
      throw std::invalid_argument("order is not a permutation");
    seen[id] = 1;
  }
}

std::vector<double> distance_matrix(std::span<const TorusPoint> points,
                                    Metric metric) {
  const std::size_t n = points.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d[i * n + j] = d[j * n + i] = distance(points[i], points[j], metric);
  return d;
}

// Uniform bucket grid over the unit square; `wrap` selects toroidal
// neighborhoods.
struct Grid {
  int g = 1;
  bool wrap = false;
  std::vector<std::vector<std::int32_t>> cells;

  Grid(std::span<const TorusPoint> points, bool wrap_mode) : wrap(wrap_mode) {
    const std::size_t n = points.size();
    g = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n) / 2.0)));
    cells.assign(static_cast<std::size_t>(g) * g, {});
    for (std::size_t i = 0; i < n; ++i)
      cells[cell_of(points[i])].push_back(static_cast<std::int32_t>(i));
  }

  int clamp_axis(double v) const {
    int c = static_cast<int>(v * g);
    return std::clamp(c, 0, g - 1);
  }

  std::size_t cell_of(const TorusPoint& p) const {
    return static_cast<std::size_t>(clamp_axis(p.x)) * g + clamp_axis(p.y);
  }

  // Applies fn to every cell of the Chebyshev ring of radius r around
  // (cx, cy); returns false when the ring is entirely out of range.
  template <typename Fn>
  bool for_ring(int cx, int cy, int r, Fn&& fn) const {
    auto visit = [&](int ix, int iy) {
      if (wrap) {
        ix = ((ix % g) + g) % g;
        iy = ((iy % g) + g) % g;
      } else if (ix < 0 || ix >= g || iy < 0 || iy >= g) {
        return;
      }
      fn(cells[static_cast<std::size_t>(ix) * g + iy]);
    };
    if (r == 0) {
      visit(cx, cy);
      return true;
    }
    if (!wrap && (cx + r < 0 || cx - r >= g) && (cy + r < 0 || cy - r >= g))
      return false;
    for (int dx = -r; dx <= r; ++dx) {
      visit(cx + dx, cy - r);
      visit(cx + dx, cy + r);
    }
    for (int dy = -r + 1; dy <= r - 1; ++dy) {
      visit(cx - r, cy + dy);
      visit(cx + r, cy + dy);
    }
    return true;
  }
};

// k nearest candidate neighbors per point under the metric, gathered from
// expanding grid rings. Flat row-major layout, rows sorted by distance.
std::vector<std::int32_t> build_candidates(std::span<const TorusPoint> points,
                                           Metric metric, const Grid& grid,
                                           int k) {
  const std::size_t n = points.size();
  const int kk = std::min<int>(k, static_cast<int>(n) - 1);
  std::vector<std::int32_t> cand(n * static_cast<std::size_t>(kk));
  std::vector<std::pair<double, std::int32_t>> scratch;
  const int ring_cap = grid.wrap ? grid.g / 2 + 1 : grid.g;
  for (std::size_t i = 0; i < n; ++i) {
    scratch.clear();
    const int cx = grid.clamp_axis(points[i].x);
    const int cy = grid.clamp_axis(points[i].y);
    int gathered_rings = 0;
    for (int r = 0; r <= ring_cap; ++r) {
      bool any = grid.for_ring(cx, cy, r, [&](const std::vector<std::int32_t>& cell) {
        for (std::int32_t id : cell) {
          if (static_cast<std::size_t>(id) == i) continue;
          scratch.emplace_back(distance(points[i], points[id], metric), id);
        }
      });
      ++gathered_rings;
      // one extra ring after enough candidates so near-boundary points of
      // the current ring cannot beat unseen cells
      if (static_cast<int>(scratch.size()) >= kk + 4 && gathered_rings >= 2 &&
          r >= 1)
        break;
      if (!any && !grid.wrap && r > 2 * grid.g) break;
    }
    if (static_cast<int>(scratch.size()) < kk) {
      // sparse fallback: scan everything
      scratch.clear();
      for (std::size_t id = 0; id < n; ++id)
        if (id != i)
          scratch.emplace_back(distance(points[i], points[id], metric),
                               static_cast<std::int32_t>(id));
    }
    std::partial_sort(scratch.begin(), scratch.begin() + kk, scratch.end());
    for (int c = 0; c < kk; ++c) cand[i * kk + c] = scratch[c].second;
  }
  return cand;
}

// Nearest-neighbor chain using a consumable copy of the grid.
std::vector<std::int32_t> nearest_neighbor_order(
    std::span<const TorusPoint> points, Metric metric, const Grid& grid,
    std::int32_t start) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::int32_t>> pool = grid.cells;
  std::vector<char> visited(n, 0);
  auto remove_from_pool = [&](std::int32_t id) {
    auto& cell = pool[grid.cell_of(points[id])];
    cell.erase(std::find(cell.begin(), cell.end(), id));
  };

  std::vector<std::int32_t> order;
  order.reserve(n);
  std::int32_t current = start;
  order.push_back(current);
  visited[current] = 1;
  remove_from_pool(current);

  const double cell_side = 1.0 / grid.g;
  for (std::size_t step = 1; step < n; ++step) {
    const int cx = grid.clamp_axis(points[current].x);
    const int cy = grid.clamp_axis(points[current].y);
    double best_d = std::numeric_limits<double>::infinity();
    std::int32_t best_id = -1;
    const int ring_cap = grid.wrap ? grid.g / 2 + 1 : grid.g;
    for (int r = 0; r <= ring_cap; ++r) {
      if (best_id >= 0 && (r - 1) * cell_side > best_d) break;
      grid.for_ring(cx, cy, r, [&](const std::vector<std::int32_t>& cell) {
        for (std::int32_t id : cell) {
          const double d = distance(points[current], points[id], metric);
          if (d < best_d || (d == best_d && id < best_id)) {
            best_d = d;
            best_id = id;
          }
        }
      });
    }
    if (best_id < 0) {
      // everything indexed by rings is consumed; scan the leftovers
      for (std::size_t id = 0; id < n; ++id) {
        if (visited[id]) continue;
        const double d = distance(points[current], points[id], metric);
        if (d < best_d || (d == best_d && static_cast<std::int32_t>(id) < best_id)) {
          best_d = d;
          best_id = static_cast<std::int32_t>(id);
        }
      }
    }
    order.push_back(best_id);
    visited[best_id] = 1;
    remove_from_pool(best_id);
    current = best_id;
  }
  return order;
}

// 2-opt over the tour formed by the points plus a virtual depot whose edges
// cost zero; the depot realizes free path endpoints and keeps every segment
// reversal valid for the open path.
class TwoOpt {
 public:
  TwoOpt(std::span<const TorusPoint> points, Metric metric,
         std::span<const std::int32_t> cand, int k)
      : points_(points),
        metric_(metric),
        cand_(cand),
        k_(k),
        n_(static_cast<std::int32_t>(points.size())),
        m_(n_ + 1) {}

  double dist(std::int32_t a, std::int32_t b) const {
    if (a == n_ || b == n_) return 0.0;
    return distance(points_[a], points_[b], metric_);
  }

  void run(std::vector<std::int32_t>& tour, int max_passes) {
    pos_.assign(m_, 0);
    for (std::int32_t p = 0; p < m_; ++p) pos_[tour[p]] = p;
    dont_look_.assign(n_, 0);
    tour_ = &tour;

    bool improved = true;
    for (int pass = 0; pass < max_passes && improved; ++pass) {
      improved = false;
      for (std::int32_t a = 0; a < n_; ++a) {
        if (dont_look_[a]) continue;
        if (improve_node(a))
          improved = true;
        else
          dont_look_[a] = 1;
      }
    }
  }

 private:
  bool improve_node(std::int32_t a) {
    bool any = false;
    bool progress = true;
    while (progress) {
      progress = false;
      for (int dir = 0; dir < 2; ++dir) {
        const std::int32_t pa = pos_[a];
        const std::int32_t pb = dir == 0 ? succ(pa) : pred(pa);
        const std::int32_t b = (*tour_)[pb];
        const double d_ab = dist(a, b);
        for (int ci = 0; ci < k_; ++ci) {
          const std::int32_t c = cand_[static_cast<std::size_t>(a) * k_ + ci];
          if (c == b) continue;
          const double d_ac = dist(a, c);
          if (d_ac >= d_ab) break;  // rows sorted by distance
          const std::int32_t pc = pos_[c];
          const std::int32_t pd = dir == 0 ? succ(pc) : pred(pc);
          const std::int32_t d = (*tour_)[pd];
          if (d == a) continue;
          const double gain = d_ab + dist(c, d) - d_ac - dist(b, d);
          if (gain > kGainEps) {
            if (dir == 0)
              reverse_segment(pb, pc);
            else
              reverse_segment(pc, pred(pa));
            dont_look_[a] = 0;
            if (b != n_) dont_look_[b] = 0;
            if (c != n_) dont_look_[c] = 0;
            if (d != n_) dont_look_[d] = 0;
            any = true;
            progress = true;
            break;
          }
        }
        if (progress) break;
      }
    }
    return any;
  }

  std::int32_t succ(std::int32_t p) const { return p + 1 == m_ ? 0 : p + 1; }
  std::int32_t pred(std::int32_t p) const { return p == 0 ? m_ - 1 : p - 1; }

  // Reverses the forward cyclic segment [i..j]; flips the complement instead
  // when that is shorter, which leaves the undirected tour identical.
  void reverse_segment(std::int32_t i, std::int32_t j) {
    std::int32_t len = j - i;
    if (len < 0) len += m_;
    ++len;
    if (2 * len > m_) {
      const std::int32_t ni = succ(j);
      const std::int32_t nj = pred(i);
      i = ni;
      j = nj;
      len = m_ - len;
    }
    auto& tour = *tour_;
    for (std::int32_t s = 0; s < len / 2; ++s) {
      std::swap(tour[i], tour[j]);
      pos_[tour[i]] = i;
      pos_[tour[j]] = j;
      i = succ(i);
      j = pred(j);
    }
    if (len & 1) pos_[tour[i]] = i;
  }

  std::span<const TorusPoint> points_;
  Metric metric_;
  std::span<const std::int32_t> cand_;
  int k_;
  std::int32_t n_;
  std::int32_t m_;
  std::vector<std::int32_t> pos_;
  std::vector<char> dont_look_;
  std::vector<std::int32_t>* tour_ = nullptr;
};

}  // namespace

double path_length(std::span<const TorusPoint> points, std::span<const int> order,
                   Metric metric) {
  check_permutation(points.size(), order);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    total += distance(points[order[i]], points[order[i + 1]], metric);
  return total;
}

PathSolution solve_brute(std::span<const TorusPoint> points, Metric metric) {
  const std::size_t n = points.size();
  if (n > kBruteCap)
    throw std::invalid_argument("solve_brute: instance too large");
  PathSolution sol;
  sol.method = SolveMethod::Brute;
  sol.metric = metric;
  sol.optimal = true;
  sol.order.resize(n);
  std::iota(sol.order.begin(), sol.order.end(), 0);
  if (n <= 2) {
    sol.length = path_length(points, sol.order, metric);
    return sol;
  }

  const std::vector<double> d = distance_matrix(points, metric);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_perm = perm;
  do {
    if (perm.front() > perm.back()) continue;  // undirected paths once
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) len += d[perm[i] * n + perm[i + 1]];
    if (len < best) {
      best = len;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  sol.order = best_perm;
  sol.length = path_length(points, sol.order, metric);
  return sol;
}

PathSolution solve_exact(std::span<const TorusPoint> points, Metric metric,
                         int cap) {
  const std::size_t n = points.size();
  if (static_cast<int>(n) > cap)
    throw std::invalid_argument("solve_exact: instance exceeds cap");
  PathSolution sol;
  sol.method = SolveMethod::Exact;
  sol.metric = metric;
  sol.optimal = true;
  if (n <= 1) {
    if (n == 1) sol.order = {0};
    sol.length = 0.0;
    return sol;
  }

  const std::vector<double> d = distance_matrix(points, metric);
  const std::size_t full = (std::size_t{1} << n) - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp((full + 1) * n, inf);
  std::vector<std::int8_t> parent((full + 1) * n, -1);
  for (std::size_t v = 0; v < n; ++v) dp[(std::size_t{1} << v) * n + v] = 0.0;

  for (std::size_t mask = 1; mask <= full; ++mask) {
    for (std::size_t v = 0; v < n; ++v) {
      if (!(mask & (std::size_t{1} << v))) continue;
      const double cur = dp[mask * n + v];
      if (cur == inf) continue;
      for (std::size_t w = 0; w < n; ++w) {
        if (mask & (std::size_t{1} << w)) continue;
        const std::size_t next = mask | (std::size_t{1} << w);
        const double cand = cur + d[v * n + w];
        if (cand < dp[next * n + w]) {
          dp[next * n + w] = cand;
          parent[next * n + w] = static_cast<std::int8_t>(v);
        }
      }
    }
  }

  std::size_t end = 0;
  double best = inf;
  for (std::size_t v = 0; v < n; ++v) {
    if (dp[full * n + v] < best) {
      best = dp[full * n + v];
      end = v;
    }
  }
  std::vector<int> order;
  order.reserve(n);
  std::size_t mask = full;
  std::size_t v = end;
  while (true) {
    order.push_back(static_cast<int>(v));
    const std::int8_t p = parent[mask * n + v];
    if (p < 0) break;
    mask ^= std::size_t{1} << v;
    v = static_cast<std::size_t>(p);
  }
  std::reverse(order.begin(), order.end());
  sol.order = std::move(order);
  sol.length = path_length(points, sol.order, metric);
  return sol;
}

PathSolution solve_heuristic(std::span<const TorusPoint> points, Metric metric,
                             const HeuristicOptions& options) {
  const std::size_t n = points.size();
  PathSolution sol;
  sol.method = SolveMethod::Heuristic;
  sol.metric = metric;
  sol.optimal = false;
  if (n == 0) return sol;
  if (n == 1) {
    sol.order = {0};
    return sol;
  }

  const Grid grid(points, metric == Metric::Torus);
  const int k = std::min<int>(options.candidate_k, static_cast<int>(n) - 1);
  const std::vector<std::int32_t> cand = build_candidates(points, metric, grid, k);

  const auto start = static_cast<std::int32_t>(
      rng::bounded(rng::counter_mix(options.seed, rng::kStreamSolver, 0),
                   static_cast<std::uint64_t>(n)));
  std::vector<std::int32_t> order = nearest_neighbor_order(points, metric, grid, start);

  // tour = depot followed by the nearest-neighbor chain
  std::vector<std::int32_t> tour;
  tour.reserve(n + 1);
  tour.push_back(static_cast<std::int32_t>(n));
  tour.insert(tour.end(), order.begin(), order.end());

  TwoOpt opt(points, metric, cand, k);
  opt.run(tour, options.max_passes);

  const auto depot_pos = static_cast<std::size_t>(
      std::find(tour.begin(), tour.end(), static_cast<std::int32_t>(n)) -
      tour.begin());
  sol.order.reserve(n);
  for (std::size_t s = 1; s <= n; ++s)
    sol.order.push_back(static_cast<int>(tour[(depot_pos + s) % (n + 1)]));
  sol.length = path_length(points, sol.order, metric);
  return sol;
}

PartitionDetail solve_partition_detail(std::span<const TorusPoint> points, int k,
                                       Metric metric,
                                       const PartitionOptions& options) {
  if (k < 1) throw std::invalid_argument("solve_partition requires k >= 1");
  const std::size_t n = points.size();

  std::vector<std::vector<int>> cells(static_cast<std::size_t>(k) * k);
  for (std::size_t i = 0; i < n; ++i) {
    const int cx = std::clamp(static_cast<int>(points[i].x * k), 0, k - 1);
    const int cy = std::clamp(static_cast<int>(points[i].y * k), 0, k - 1);
    cells[static_cast<std::size_t>(cy) * k + cx].push_back(static_cast<int>(i));
  }

  PartitionDetail detail;
  PathSolution& sol = detail.solution;
  sol.method = SolveMethod::Partition;
  sol.metric = metric;
  sol.optimal = false;
  sol.order.reserve(n);

  std::vector<TorusPoint> sub;
  std::size_t cell_counter = 0;
  for (int row = 0; row < k; ++row) {
    for (int step = 0; step < k; ++step) {
      const int col = (row % 2 == 0) ? step : k - 1 - step;
      const std::vector<int>& ids = cells[static_cast<std::size_t>(row) * k + col];
      ++cell_counter;
      if (ids.empty()) continue;
      ++detail.nonempty_cells;

      sub.clear();
      for (int id : ids) sub.push_back(points[id]);
      PathSolution cell_sol;
      if (static_cast<int>(sub.size()) <= options.subsolver_cap) {
        cell_sol = solve_exact(sub, metric,
                               std::max(options.subsolver_cap, kExactCap));
      } else {
        HeuristicOptions h = options.heuristic;
        h.seed = rng::counter_mix(options.heuristic.seed, rng::kStreamSolver,
                                  cell_counter);
        cell_sol = solve_heuristic(sub, metric, h);
      }
      detail.cell_length_sum += cell_sol.length;

      // join with the nearer endpoint of the cell path
      if (!sol.order.empty()) {
        const TorusPoint& prev = points[sol.order.back()];
        const TorusPoint& front = sub[cell_sol.order.front()];
        const TorusPoint& back = sub[cell_sol.order.back()];
        if (distance(prev, back, metric) < distance(prev, front, metric))
          std::reverse(cell_sol.order.begin(), cell_sol.order.end());
        detail.stitch_length +=
            distance(prev, sub[cell_sol.order.front()], metric);
      }
      for (int local : cell_sol.order) sol.order.push_back(ids[local]);
    }
  }

  sol.length = path_length(points, sol.order, metric);
  if (sol.length > detail.cell_length_sum + 3.0 * k + 1e-9)
    throw std::logic_error("partition stitch bound violated");
  return detail;
}

PathSolution solve_partition(std::span<const TorusPoint> points, int k,
                             Metric metric, const PartitionOptions& options) {
  return solve_partition_detail(points, k, metric, options).solution;
}

PartitionLowerReport partition_lower_diagnostic(std::span<const TorusPoint> points,
                                                int k, Metric metric,
                                                double reference_length,
                                                int exact_cap) {
  if (k < 1) throw std::invalid_argument("partition_lower_diagnostic: k >= 1");
  std::vector<std::vector<TorusPoint>> cells(static_cast<std::size_t>(k) * k);
  for (const TorusPoint& p : points) {
    const int cx = std::clamp(static_cast<int>(p.x * k), 0, k - 1);
    const int cy = std::clamp(static_cast<int>(p.y * k), 0, k - 1);
    cells[static_cast<std::size_t>(cy) * k + cx].push_back(p);
  }
  PartitionLowerReport report;
  for (const auto& cell : cells) {
    if (cell.empty()) continue;
    if (static_cast<int>(cell.size()) <= exact_cap) {
      report.sum_cells += solve_exact(cell, metric, exact_cap).length;
    } else {
      report.sum_cells += solve_heuristic(cell, metric).length;
      report.used_heuristic = true;
    }
  }
  report.implied_c0 =
      std::max(0.0, (report.sum_cells - reference_length) / static_cast<double>(k));
  return report;
}

PathSolution loop_augmented_path(const PathSolution& base,
                                 std::span<const TorusPoint> base_points,
                                 std::span<const TwinPair> pairs, Metric metric) {
  const std::size_t n = base_points.size();
  check_permutation(n, base.order);
  for (const TwinPair& p : pairs)
    if (p.index < 0 || static_cast<std::size_t>(p.index) >= n)
      throw std::out_of_range("twin index out of range");

  std::vector<TorusPoint> all(base_points.begin(), base_points.end());
  std::vector<std::vector<int>> twins_of(n);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    all.push_back(pairs[i].twin);
    twins_of[pairs[i].index].push_back(static_cast<int>(n + i));
  }

  PathSolution sol;
  sol.method = SolveMethod::LoopAugmented;
  sol.metric = metric;
  sol.optimal = false;
  sol.order.reserve(all.size());
  for (int id : base.order) {
    sol.order.push_back(id);
    for (int t : twins_of[id]) sol.order.push_back(t);
  }
  sol.length = path_length(all, sol.order, metric);
  return sol;
}

}  // namespace bhh
