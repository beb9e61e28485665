#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surfspec/mesh.hpp"

namespace surfspec {

/// Atom positions (Angstrom) and species. `charges` is either empty or one
/// value per atom; the residue columns are filled only by the PDB reader.
struct AtomSet {
  std::vector<Vec3> positions;
  std::vector<std::string> elements;
  std::vector<double> charges;
  std::vector<std::string> atom_names;
  std::vector<std::string> residue_names;
  std::vector<std::string> chain_ids;
  std::vector<int> residue_numbers;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }

  /// Throws ParseError if the parallel arrays disagree or a symbol is empty.
  void validate() const;

  AtomSet transformed(const Eigen::Matrix3d& linear, const Vec3& translation) const;
};

enum class AtomFormat { xyz, pdb };

struct AtomParseReport {
  /// PDB rows dropped because their alternate-location flag was not ' ' or 'A'.
  std::size_t skipped_altloc = 0;
};

struct ParsedAtoms {
  AtomSet atoms;
  AtomParseReport report;
};

/// XYZ: count line, comment line, then "element x y z [charge]" rows.
/// PDB: fixed-column ATOM/HETATM records of the first model.
ParsedAtoms parse_atoms(std::string_view text, AtomFormat format);

ParsedAtoms load_atoms(const std::filesystem::path& path, std::optional<AtomFormat> format = {});

/// Canonical capitalization, e.g. "FE" -> "Fe", "c" -> "C".
std::string normalize_element(std::string_view symbol);

}  // namespace surfspec
