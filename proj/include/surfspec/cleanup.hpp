#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "surfspec/mesh.hpp"

namespace surfspec {

struct CleanupReport {
  std::size_t merged_vertices = 0;
  std::size_t degenerate_faces_removed = 0;
  std::size_t zero_area_faces_removed = 0;
  std::size_t duplicate_faces_removed = 0;
  std::size_t components_dropped = 0;
  std::size_t faces_in_dropped_components = 0;
  std::size_t unreferenced_vertices_removed = 0;

  bool empty() const;
  std::string summary() const;
};

struct CleanupResult {
  TriangleMesh mesh;
  CleanupReport report;
  /// For every surviving vertex, its index in the input mesh.
  std::vector<int> source_vertex;
};

inline constexpr double kDefaultMergeEps = 1e-6;

/// Merges vertices closer than `merge_eps`, removes index-degenerate,
/// zero-area and duplicate faces, and keeps only the largest connected
/// component (most faces, ties broken by area). Survivors keep their
/// relative order. Throws GeometryError when nothing remains.
CleanupResult cleanup_mesh(const TriangleMesh& mesh, double merge_eps = kDefaultMergeEps);

/// Faces whose three vertices are all selected, followed by cleanup.
CleanupResult extract_submesh(const TriangleMesh& mesh, const std::vector<char>& vertex_mask,
                              double merge_eps = kDefaultMergeEps);

}  // namespace surfspec
