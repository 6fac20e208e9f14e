#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stratevo/tasks.hpp"
#include "stratevo/templates.hpp"

namespace stratevo {

namespace {

Verdict reject(std::string constraint, std::vector<std::size_t> indices, double margin, std::string message) {
  Verdict v;
  v.violation = Violation{std::move(constraint), std::move(indices), margin, std::move(message)};
  return v;
}

/// Shared checks for circles in the box [0,width]x[0,height].
Verdict verify_circles_in_box(const std::vector<Circle>& circles, std::size_t n, double width, double height,
                              double tol) {
  if (circles.size() != n) {
    return reject("count", {}, 0.0,
                  "expected " + std::to_string(n) + " circles, got " + std::to_string(circles.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = circles[i];
    if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.r)) {
      return reject("finite", {i}, 0.0, "circle " + std::to_string(i) + " has a non-finite coordinate");
    }
    if (!(c.r > 0.0)) {
      return reject("radius", {i}, -c.r, "circle " + std::to_string(i) + " has non-positive radius");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = circles[i];
    const double slack = std::min({c.x, c.y, width - c.x, height - c.y});
    if (c.r > slack + tol) {
      return reject("containment", {i}, c.r - slack,
                    "circle " + std::to_string(i) + " crosses the container boundary by " + format_number(c.r - slack));
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = circles[i].x - circles[j].x;
      const double dy = circles[i].y - circles[j].y;
      const double dist = std::sqrt(dx * dx + dy * dy);
      const double need = circles[i].r + circles[j].r;
      if (dist < need - tol) {
        return reject("overlap", {i, j}, need - dist,
                      "circles " + std::to_string(i) + " and " + std::to_string(j) + " overlap: distance " +
                          format_number(dist) + ", required " + format_number(need));
      }
    }
    total += circles[i].r;
  }
  Verdict v;
  v.fitness = total;
  return v;
}

}  // namespace

Verdict verify_square_packing(const Placement& placement, std::size_t n, double tol) {
  return verify_circles_in_box(placement.circles, n, 1.0, 1.0, tol);
}

Verdict verify_rect_packing(const Placement& placement, std::size_t n, double tol) {
  if (!placement.width) return reject("width", {}, 0.0, "rectangle width is missing");
  const double w = *placement.width;
  if (!std::isfinite(w) || !(w > 0.0) || !(w < 2.0)) {
    return reject("width", {}, 0.0, "rectangle width " + format_number(w) + " is outside (0, 2)");
  }
  return verify_circles_in_box(placement.circles, n, w, 2.0 - w, tol);
}

Verdict verify_minmax(std::span<const Point> points, std::size_t n, bool check_container, double tol) {
  if (points.size() != n) {
    return reject("count", {}, 0.0, "expected " + std::to_string(n) + " points, got " + std::to_string(points.size()));
  }
  if (n < 2) return reject("count", {}, 0.0, "at least two points are required");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      return reject("finite", {i}, 0.0, "point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  if (check_container) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = points[i];
      const double outside = std::max({-p.x, -p.y, p.x - 1.0, p.y - 1.0});
      if (outside > tol) {
        return reject("container", {i}, outside,
                      "point " + std::to_string(i) + " lies outside the unit square by " + format_number(outside));
      }
    }
  }
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::hypot(points[i].x - points[j].x, points[i].y - points[j].y);
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  }
  Verdict v;
  v.fitness = dmax > 0.0 ? dmin / dmax : 0.0;
  return v;
}

}  // namespace stratevo
