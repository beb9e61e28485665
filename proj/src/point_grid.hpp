#pragma once

// Uniform hash grid over a point cloud for radius and nearest-neighbour
// queries. Results are ordered by (squared distance, index) so ties break
// towards the lowest index.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "surfspec/mesh.hpp"

namespace surfspec::detail {

struct Neighbor {
  int index;
  double dist2;

  bool operator<(const Neighbor& o) const { return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index); }
};

class PointGrid {
public:
  PointGrid(const std::vector<Vec3>& points, double cell) : points_(&points), cell_(cell) {
    if (!(cell_ > 0.0)) cell_ = 1.0;
    lo_.setConstant(0);
    hi_.setConstant(0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Eigen::Vector3i c = cell_of(points[i]);
      if (i == 0) {
        lo_ = hi_ = c;
      } else {
        lo_ = lo_.cwiseMin(c);
        hi_ = hi_.cwiseMax(c);
      }
      cells_[key(c)].push_back(static_cast<int>(i));
    }
  }

  /// Calls f(index, dist2) for every point with distance <= radius, in
  /// unspecified order.
  template <typename F>
  void for_each_within(const Vec3& q, double radius, F&& f) const {
    const double r2 = radius * radius;
    const Eigen::Vector3i a = cell_of(q - Vec3::Constant(radius));
    const Eigen::Vector3i b = cell_of(q + Vec3::Constant(radius));
    for (int x = std::max(a.x(), lo_.x()); x <= std::min(b.x(), hi_.x()); ++x)
      for (int y = std::max(a.y(), lo_.y()); y <= std::min(b.y(), hi_.y()); ++y)
        for (int z = std::max(a.z(), lo_.z()); z <= std::min(b.z(), hi_.z()); ++z) {
          const auto it = cells_.find(key({x, y, z}));
          if (it == cells_.end()) continue;
          for (int i : it->second) {
            const double d2 = ((*points_)[i] - q).squaredNorm();
            if (d2 <= r2) f(i, d2);
          }
        }
  }

  std::vector<Neighbor> within(const Vec3& q, double radius) const {
    std::vector<Neighbor> out;
    for_each_within(q, radius, [&](int i, double d2) { out.push_back({i, d2}); });
    std::sort(out.begin(), out.end());
    return out;
  }

  /// The k closest points (fewer if the cloud is smaller), sorted.
  std::vector<Neighbor> nearest(const Vec3& q, std::size_t k) const {
    std::vector<Neighbor> best;
    if (k == 0 || points_->empty()) return best;
    const Eigen::Vector3i c = cell_of(q);
    const int max_ring = std::max({std::abs(c.x() - lo_.x()), std::abs(c.x() - hi_.x()), std::abs(c.y() - lo_.y()),
                                   std::abs(c.y() - hi_.y()), std::abs(c.z() - lo_.z()), std::abs(c.z() - hi_.z())});
    for (int ring = 0; ring <= max_ring; ++ring) {
      visit_shell(c, ring, [&](int i) {
        best.push_back({i, ((*points_)[i] - q).squaredNorm()});
      });
      std::sort(best.begin(), best.end());
      if (best.size() > k) best.resize(k);
      // Unvisited cells lie at least ring * cell away.
      const double reach = ring * cell_;
      if (best.size() == k && best.back().dist2 <= reach * reach) break;
    }
    return best;
  }

private:
  Eigen::Vector3i cell_of(const Vec3& p) const {
    return Eigen::Vector3i(static_cast<int>(std::floor(p.x() / cell_)), static_cast<int>(std::floor(p.y() / cell_)),
                           static_cast<int>(std::floor(p.z() / cell_)));
  }

  static std::uint64_t key(const Eigen::Vector3i& c) {
    auto part = [](int v) { return static_cast<std::uint64_t>(static_cast<std::uint32_t>(v + (1 << 20)) & 0x1FFFFFu); };
    return (part(c.x()) << 42) | (part(c.y()) << 21) | part(c.z());
  }

  template <typename F>
  void visit_shell(const Eigen::Vector3i& c, int ring, F&& f) const {
    for (int x = std::max(c.x() - ring, lo_.x()); x <= std::min(c.x() + ring, hi_.x()); ++x)
      for (int y = std::max(c.y() - ring, lo_.y()); y <= std::min(c.y() + ring, hi_.y()); ++y)
        for (int z = std::max(c.z() - ring, lo_.z()); z <= std::min(c.z() + ring, hi_.z()); ++z) {
          if (std::max({std::abs(x - c.x()), std::abs(y - c.y()), std::abs(z - c.z())}) != ring) continue;
          const auto it = cells_.find(key({x, y, z}));
          if (it == cells_.end()) continue;
          for (int i : it->second) f(i);
        }
  }

  const std::vector<Vec3>* points_;
  double cell_;
  Eigen::Vector3i lo_, hi_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace surfspec::detail
