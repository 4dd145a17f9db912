#pragma once

#include <cmath>
#include <string>

namespace bhh {

// A point of the flat torus [0,1)^2. Coordinates are stored canonically in
// [0,1); any constructor input is wrapped mod 1, so equality and hashing are
// well defined.
struct TorusPoint {
  double x = 0.0;
  double y = 0.0;

  TorusPoint() = default;
  TorusPoint(double px, double py) : x(wrap01(px)), y(wrap01(py)) {}

  static double wrap01(double v) noexcept {
    double r = v - std::floor(v);
    return r < 1.0 ? r : 0.0;
  }

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

// The three path metrics on the unit square / flat torus.
enum class Metric { Euclidean, Torus, FreeBoundary };

double euclidean_distance(const TorusPoint& a, const TorusPoint& b) noexcept;
double torus_distance(const TorusPoint& a, const TorusPoint& b) noexcept;

// Distance from p to the boundary of the closed unit square.
double boundary_distance(const TorusPoint& p) noexcept;

// Travel along the boundary is free and the four corners connect the edges,
// so the whole boundary acts as a single zero-cost network: the free-boundary
// distance is min(direct, to-boundary(a) + to-boundary(b)).
double free_boundary_distance(const TorusPoint& a, const TorusPoint& b) noexcept;

double distance(const TorusPoint& a, const TorusPoint& b, Metric m) noexcept;

// Shift by eps in the first coordinate only, mod 1.
inline TorusPoint translate(const TorusPoint& p, double eps) noexcept {
  return TorusPoint(p.x + eps, p.y);
}

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

}  // namespace bhh
