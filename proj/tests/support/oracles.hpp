#pragma once

// Independent reference implementations used to check the production code.

#include <cmath>
#include <deque>
#include <set>
#include <vector>

#include "support/generators.hpp"
#include "tod/core/types.hpp"

namespace tod::testing {

/// Breadth-first search over the full pairwise graph; components keep the
/// order of their first point. Returns member index lists.
inline std::vector<std::vector<std::size_t>> brute_force_components(const std::vector<Point2>& pts, double d) {
  const std::size_t n = pts.size();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp;
    std::deque<std::size_t> q{s};
    seen[s] = true;
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop_front();
      comp.push_back(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (seen[j]) continue;
        const double ex = pts[i].x - pts[j].x, ey = pts[i].y - pts[j].y;
        if (ex * ex + ey * ey <= d * d) {
          seen[j] = true;
          q.push_back(j);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

/// Scan with clumps of returns at random positions, some no-return beams and
/// occasional points placed near the clustering distance from a neighbour.
inline LaserScan random_clustered_scan(Gen& g, std::size_t max_beams = 1081) {
  LaserScan s;
  s.frame_id = "laser";
  const std::size_t n = static_cast<std::size_t>(g.integer(1, static_cast<int>(max_beams)));
  s.angle_min = -g.real(0.1, 3.1);
  s.angle_increment = (-2.0 * s.angle_min) / static_cast<double>(std::max<std::size_t>(n - 1, 1));
  s.range_min = 0.05;
  s.range_max = 30.0;
  s.ranges.assign(n, kNoReturn);
  std::size_t i = 0;
  while (i < n) {
    const std::size_t run = static_cast<std::size_t>(g.integer(1, 40));
    const int mode = g.integer(0, 3);
    double r = g.real(0.5, 29.0);
    for (std::size_t k = 0; k < run && i < n; ++k, ++i) {
      if (mode == 0) continue;  // gap
      r = std::clamp(r + g.real(-0.3, 0.3), 0.06, 29.9);
      s.ranges[i] = r;
      if (g.integer(0, 20) == 0) s.ranges[i] = g.real(0.0, 40.0);  // stray, may be out of range
    }
  }
  return s;
}

/// Rear-axle bicycle at unit speed, classical RK4 with 1 ms steps; returns
/// the body point (L, offset) after each `sample_every` steps, starting at
/// step 0.
inline std::vector<Point2> lane_edge_ode(double delta, double L, double offset, std::size_t samples,
                                         std::size_t sample_every) {
  const double h = 1e-3;
  const double k_yaw = std::tan(delta) / L;
  double x = 0, y = 0, th = 0;
  auto edge = [&] { return Point2{x + L * std::cos(th) - offset * std::sin(th), y + L * std::sin(th) + offset * std::cos(th)}; };
  std::vector<Point2> out{edge()};
  for (std::size_t s = 1; s < samples; ++s) {
    for (std::size_t k = 0; k < sample_every; ++k) {
      auto f = [&](double t) { return std::array<double, 3>{std::cos(t), std::sin(t), k_yaw}; };
      const auto k1 = f(th);
      const auto k2 = f(th + 0.5 * h * k1[2]);
      const auto k3 = f(th + 0.5 * h * k2[2]);
      const auto k4 = f(th + h * k3[2]);
      x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      y += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
      th += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
    }
    out.push_back(edge());
  }
  return out;
}

}  // namespace tod::testing
