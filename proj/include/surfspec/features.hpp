#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surfspec/atoms.hpp"
#include "surfspec/harmonics.hpp"
#include "surfspec/mesh.hpp"
#include "surfspec/spectral.hpp"

namespace surfspec {

/// Fixed-length descriptor per element or residue key. Keys that are not in
/// the table resolve to the row named by `fallback_key()` ("other").
class AtomDescriptorTable {
public:
  /// Throws ConfigError if a row has the wrong width or the fallback row is
  /// missing.
  AtomDescriptorTable(std::vector<std::string> columns, std::map<std::string, std::vector<double>> rows);

  /// One-hot over {C, N, O, S, H, P, other}.
  static AtomDescriptorTable default_elements();

  /// CSV: header "key,<column>,...", then one row per key. Keys are matched
  /// exactly (element symbols are normalized before lookup). Blank lines and
  /// lines starting with '#' are skipped.
  static AtomDescriptorTable from_csv(std::string_view text);
  static AtomDescriptorTable load(const std::filesystem::path& path);

  static constexpr std::string_view fallback_key() { return "other"; }

  /// Row for the element if present, else for the residue name, else the
  /// fallback row.
  const std::vector<double>& lookup(const std::string& element, const std::string& residue = {}) const;

  std::size_t width() const { return columns_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::map<std::string, std::vector<double>>& rows() const { return rows_; }

private:
  std::vector<std::string> columns_;
  std::map<std::string, std::vector<double>> rows_;
};

/// Default neighbourhood radius for atom-to-vertex projection, Angstrom.
inline constexpr double kDefaultAtomRadius = 6.0;

struct ProjectionOptions {
  double radius = kDefaultAtomRadius;
  /// When set, use the k nearest atoms regardless of distance instead of the
  /// radius ball.
  std::optional<std::size_t> k_nearest;
};

struct AtomFeatures {
  /// Table columns followed by "inv_dist".
  SurfaceField field;
  /// Vertices with no neighbouring atom; their row is zero.
  std::size_t empty_vertices = 0;
  double mean_neighbors = 0.0;
};

/// Per vertex, the average over neighbouring atoms a of [u_a, 1/|x - a|].
/// Distances below 1e-6 are clamped so an atom sitting on a vertex stays
/// finite. Throws GeometryError for an empty atom set.
AtomFeatures project_atom_features(const AtomSet& atoms, const TriangleMesh& mesh, const AtomDescriptorTable& table,
                                   const ProjectionOptions& options = {});

struct AssembledFeatures {
  SurfaceField field;
  /// Channels that were constant and were therefore set to zero instead of
  /// being standardized.
  std::vector<std::string> constant_channels;
};

/// Concatenates the channels as "geom:<name>" then "chem:<name>". With a mass
/// matrix, every channel is shifted and scaled to B-weighted mean 0 and
/// variance 1. Throws GeometryError on a vertex-count mismatch.
AssembledFeatures assemble_input_features(const SurfaceField& geom, const SurfaceField& chem,
                                          const SparseSymMatrix* standardize_with = nullptr);

/// Gaussian and mean curvature followed by the heat kernel signature at
/// `hks_times`, as one field named "gaussian", "mean", "hks_t...".
SurfaceField geometric_features(const TriangleMesh& mesh, const SpectralBasis& basis,
                                std::span<const double> hks_times);

}  // namespace surfspec
