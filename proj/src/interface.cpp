#include <cmath>

#include "point_grid.hpp"
#include "surfspec/correspondence.hpp"
#include "surfspec/error.hpp"

namespace surfspec {

PointMatrix to_points(const std::vector<Vec3>& points) {
  PointMatrix out(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  return out;
}

namespace {

std::vector<char> near_mask(const std::vector<Vec3>& from, const detail::PointGrid& other, double threshold) {
  std::vector<char> mask(from.size(), 0);
  for (std::size_t i = 0; i < from.size(); ++i) {
    bool hit = false;
    other.for_each_within(from[i], threshold, [&](int, double) { hit = true; });
    mask[i] = hit ? 1 : 0;
  }
  return mask;
}

// Nearest member of `to` for each member of `from`, as indices into the
// original meshes.
std::vector<int> nearest_members(const std::vector<Vec3>& from_pts, const std::vector<int>& from,
                                 const std::vector<Vec3>& to_pts, const std::vector<int>& to, double cell) {
  std::vector<Vec3> sub;
  sub.reserve(to.size());
  for (int v : to) sub.push_back(to_pts[v]);
  const detail::PointGrid grid(sub, cell);
  std::vector<int> out(from.size(), -1);
  for (std::size_t i = 0; i < from.size(); ++i) {
    const auto nb = grid.nearest(from_pts[from[i]], 1);
    if (!nb.empty()) out[i] = to[nb.front().index];
  }
  return out;
}

}  // namespace

Interface extract_interface(const TriangleMesh& first, const TriangleMesh& second, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw ConfigError("interface threshold must be positive");
  Interface out;
  const detail::PointGrid grid_first(first.vertices(), threshold);
  const detail::PointGrid grid_second(second.vertices(), threshold);
  out.mask_first = near_mask(first.vertices(), grid_second, threshold);
  out.mask_second = near_mask(second.vertices(), grid_first, threshold);
  for (std::size_t i = 0; i < out.mask_first.size(); ++i)
    if (out.mask_first[i]) out.vertices_first.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < out.mask_second.size(); ++i)
    if (out.mask_second[i]) out.vertices_second.push_back(static_cast<int>(i));
  if (out.vertices_first.empty() || out.vertices_second.empty()) return out;

  const std::vector<int> fwd =
      nearest_members(first.vertices(), out.vertices_first, second.vertices(), out.vertices_second, threshold);
  const std::vector<int> back =
      nearest_members(second.vertices(), out.vertices_second, first.vertices(), out.vertices_first, threshold);
  std::vector<int> back_of(second.vertex_count(), -1);
  for (std::size_t j = 0; j < out.vertices_second.size(); ++j) back_of[out.vertices_second[j]] = back[j];
  for (std::size_t i = 0; i < out.vertices_first.size(); ++i) {
    const int v = out.vertices_first[i];
    if (fwd[i] >= 0 && back_of[fwd[i]] == v) out.pairs.emplace_back(v, fwd[i]);
  }
  return out;
}

}  // namespace surfspec
