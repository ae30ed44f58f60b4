#include "tod/perception/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "tod/core/error.hpp"

namespace tod::perception {

namespace {

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::uint64_t cell_key(std::int64_t ix, std::int64_t iy) {
  return (static_cast<std::uint64_t>(ix) << 32) ^ static_cast<std::uint32_t>(iy);
}

}  // namespace

ScanPoints scan_to_points(const LaserScan& scan) {
  ScanPoints sp;
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    if (!scan.valid_beam(i)) continue;
    const double a = scan.beam_angle(i);
    sp.points.push_back({scan.ranges[i] * std::cos(a), scan.ranges[i] * std::sin(a)});
    sp.beams.push_back(i);
  }
  return sp;
}

std::vector<int> label_components(const std::vector<Point2>& points, double distance) {
  if (!(distance > 0.0)) throw Error(ErrorCode::InvalidArgument, "cluster distance must be > 0");
  const std::size_t n = points.size();
  // Slightly oversized cells so any pair within `distance` is in adjacent cells.
  const double cell = distance * (1.0 + 1e-9);
  const double d2 = distance * distance;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
  std::vector<std::pair<std::int64_t, std::int64_t>> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    cells[i] = {static_cast<std::int64_t>(std::floor(points[i].x / cell)),
                static_cast<std::int64_t>(std::floor(points[i].y / cell))};
    grid[cell_key(cells[i].first, cells[i].second)].push_back(i);
  }
  DisjointSet ds(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(cell_key(cells[i].first + dx, cells[i].second + dy));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          if (j <= i) continue;
          const double ex = points[i].x - points[j].x, ey = points[i].y - points[j].y;
          if (ex * ex + ey * ey <= d2) ds.unite(i, j);
        }
      }
    }
  }
  std::vector<int> labels(n, -1);
  std::unordered_map<std::size_t, int> root_label;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = root_label.try_emplace(ds.find(i), static_cast<int>(root_label.size()));
    labels[i] = it->second;
  }
  return labels;
}

ObjectList cluster_scan(const LaserScan& scan, const ClusterParams& params) {
  if (params.min_points < 1) throw Error(ErrorCode::InvalidArgument, "cluster min_points must be >= 1");
  const ScanPoints sp = scan_to_points(scan);
  const auto labels = label_components(sp.points, params.distance);
  const int count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

  std::vector<DetectedObject> acc(static_cast<std::size_t>(count));
  std::vector<double> sx(acc.size(), 0.0), sy(acc.size(), 0.0);
  for (auto& o : acc) {
    o.min_x = o.min_y = std::numeric_limits<double>::infinity();
    o.max_x = o.max_y = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t i = 0; i < sp.points.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    const auto& p = sp.points[i];
    auto& o = acc[c];
    ++o.point_count;
    sx[c] += p.x;
    sy[c] += p.y;
    o.min_x = std::min(o.min_x, p.x);
    o.min_y = std::min(o.min_y, p.y);
    o.max_x = std::max(o.max_x, p.x);
    o.max_y = std::max(o.max_y, p.y);
  }

  ObjectList out;
  out.frame_id = scan.frame_id;
  out.stamp_ns = scan.stamp_ns;
  for (std::size_t c = 0; c < acc.size(); ++c) {
    if (acc[c].point_count < params.min_points) continue;
    auto o = acc[c];
    o.centroid_x = std::clamp(sx[c] / o.point_count, o.min_x, o.max_x);
    o.centroid_y = std::clamp(sy[c] / o.point_count, o.min_y, o.max_y);
    out.objects.push_back(o);
  }
  return out;
}

}  // namespace tod::perception
