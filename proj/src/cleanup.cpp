#include "surfspec/cleanup.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "point_grid.hpp"
#include "surfspec/error.hpp"

namespace surfspec {

bool CleanupReport::empty() const {
  return merged_vertices == 0 && degenerate_faces_removed == 0 && zero_area_faces_removed == 0 &&
         duplicate_faces_removed == 0 && components_dropped == 0 && unreferenced_vertices_removed == 0;
}

std::string CleanupReport::summary() const {
  if (empty()) return "clean";
  std::string out;
  auto add = [&](std::size_t n, const std::string& what) {
    if (n == 0) return;
    if (!out.empty()) out += ", ";
    out += std::to_string(n) + " " + what;
  };
  add(merged_vertices, "vertices merged");
  add(degenerate_faces_removed, "degenerate faces removed");
  add(zero_area_faces_removed, "zero-area faces removed");
  add(duplicate_faces_removed, "duplicate faces removed");
  if (components_dropped > 0) {
    add(components_dropped, (components_dropped == 1 ? "component dropped (" : "components dropped (") +
                                std::to_string(faces_in_dropped_components) +
                                (faces_in_dropped_components == 1 ? " face)" : " faces)"));
  }
  add(unreferenced_vertices_removed, "unreferenced vertices removed");
  return out;
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

CleanupResult cleanup_mesh(const TriangleMesh& mesh, double merge_eps) {
  CleanupResult result;
  CleanupReport& report = result.report;
  const auto& verts = mesh.vertices();
  const std::size_t nv = verts.size();

  // Greedy merge: each vertex maps onto the earliest representative within
  // merge_eps, so representatives are pairwise farther apart than merge_eps.
  std::vector<int> rep(nv, -1);
  {
    detail::PointGrid grid(verts, merge_eps > 0.0 ? merge_eps : 1.0);
    std::vector<char> is_rep(nv, 0);
    for (std::size_t i = 0; i < nv; ++i) {
      int found = -1;
      if (merge_eps > 0.0) {
        grid.for_each_within(verts[i], merge_eps, [&](int j, double) {
          if (static_cast<std::size_t>(j) < i && is_rep[j] && (found < 0 || j < found)) found = j;
        });
      }
      if (found >= 0) {
        rep[i] = found;
        ++report.merged_vertices;
      } else {
        rep[i] = static_cast<int>(i);
        is_rep[i] = 1;
      }
    }
  }

  // Face filtering.
  double extent2 = 0.0;
  if (nv > 0) {
    Vec3 lo = verts[0], hi = verts[0];
    for (const Vec3& v : verts) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    extent2 = (hi - lo).squaredNorm();
  }
  const double zero_area = 1e-14 * extent2;

  std::vector<Face> faces;
  std::set<std::array<int, 3>> seen;
  for (const Face& f : mesh.faces()) {
    const Face t{rep[f[0]], rep[f[1]], rep[f[2]]};
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      ++report.degenerate_faces_removed;
      continue;
    }
    if (!(triangle_area(verts[t[0]], verts[t[1]], verts[t[2]]) > zero_area)) {
      ++report.zero_area_faces_removed;
      continue;
    }
    std::array<int, 3> sorted = t;
    std::sort(sorted.begin(), sorted.end());
    if (!seen.insert(sorted).second) {
      ++report.duplicate_faces_removed;
      continue;
    }
    faces.push_back(t);
  }
  if (faces.empty()) throw GeometryError("cleanup removed every face");

  // Components by shared vertices.
  DisjointSets sets(nv);
  for (const Face& t : faces) {
    sets.unite(t[0], t[1]);
    sets.unite(t[1], t[2]);
  }
  std::map<int, std::pair<std::size_t, double>> components;  // root -> (faces, area)
  for (const Face& t : faces) {
    auto& c = components[sets.find(t[0])];
    ++c.first;
    c.second += triangle_area(verts[t[0]], verts[t[1]], verts[t[2]]);
  }
  int keep = -1;
  std::pair<std::size_t, double> best{0, -1.0};
  for (const auto& [root, stats] : components) {
    if (stats.first > best.first || (stats.first == best.first && stats.second > best.second)) {
      best = stats;
      keep = root;
    }
  }
  {
    std::vector<char> referenced(nv, 0);
    for (const Face& t : faces)
      for (int v : t) referenced[v] = 1;
    std::size_t reps_total = 0;
    std::size_t reps_referenced = 0;
    for (std::size_t i = 0; i < nv; ++i) {
      if (rep[i] != static_cast<int>(i)) continue;
      ++reps_total;
      reps_referenced += referenced[i];
    }
    report.unreferenced_vertices_removed = reps_total - reps_referenced;
  }
  report.components_dropped = components.size() - 1;
  report.faces_in_dropped_components = faces.size() - best.first;
  std::erase_if(faces, [&](const Face& t) { return sets.find(t[0]) != keep; });

  // Stable compaction of referenced vertices.
  std::vector<int> new_index(nv, -1);
  std::vector<char> used(nv, 0);
  for (const Face& t : faces)
    for (int v : t) used[v] = 1;
  std::vector<Vec3> out_verts;
  for (std::size_t i = 0; i < nv; ++i) {
    if (!used[i]) continue;
    new_index[i] = static_cast<int>(out_verts.size());
    out_verts.push_back(verts[i]);
    result.source_vertex.push_back(static_cast<int>(i));
  }

  for (Face& t : faces)
    for (int& v : t) v = new_index[v];
  result.mesh = TriangleMesh(std::move(out_verts), std::move(faces));
  return result;
}

CleanupResult extract_submesh(const TriangleMesh& mesh, const std::vector<char>& vertex_mask, double merge_eps) {
  if (vertex_mask.size() != mesh.vertex_count()) throw GeometryError("vertex mask length differs from vertex count");
  std::vector<Face> faces;
  for (const Face& t : mesh.faces()) {
    if (vertex_mask[t[0]] && vertex_mask[t[1]] && vertex_mask[t[2]]) faces.push_back(t);
  }
  if (faces.empty()) throw GeometryError("no face has all three vertices selected");
  CleanupResult result = cleanup_mesh(TriangleMesh(mesh.vertices(), std::move(faces)), merge_eps);
  // Unselected vertices are dropped by construction; do not report them.
  result.report.unreferenced_vertices_removed = 0;
  return result;
}

}  // namespace surfspec
