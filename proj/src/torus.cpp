#include "bhh/torus.hpp"

#include <algorithm>
#include <stdexcept>

namespace bhh {

double euclidean_distance(const TorusPoint& a, const TorusPoint& b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) noexcept {
  double dx = std::fabs(a.x - b.x);
  double dy = std::fabs(a.y - b.y);
  dx = std::min(dx, 1.0 - dx);
  dy = std::min(dy, 1.0 - dy);
  return std::sqrt(dx * dx + dy * dy);
}

double boundary_distance(const TorusPoint& p) noexcept {
  return std::min(std::min(p.x, 1.0 - p.x), std::min(p.y, 1.0 - p.y));
}

double free_boundary_distance(const TorusPoint& a, const TorusPoint& b) noexcept {
  const double direct = euclidean_distance(a, b);
  const double via_boundary = boundary_distance(a) + boundary_distance(b);
  return std::min(direct, via_boundary);
}

double distance(const TorusPoint& a, const TorusPoint& b, Metric m) noexcept {
  switch (m) {
    case Metric::Euclidean:
      return euclidean_distance(a, b);
    case Metric::Torus:
      return torus_distance(a, b);
    case Metric::FreeBoundary:
      return free_boundary_distance(a, b);
  }
  return 0.0;
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Euclidean:
      return "euclidean";
    case Metric::Torus:
      return "torus";
    case Metric::FreeBoundary:
      return "free";
  }
  return "?";
}

Metric metric_from_string(const std::string& s) {
  if (s == "euclidean") return Metric::Euclidean;
  if (s == "torus") return Metric::Torus;
  if (s == "free" || s == "free_boundary") return Metric::FreeBoundary;
  throw std::invalid_argument("unknown metric: " + s);
}

}  // namespace bhh
