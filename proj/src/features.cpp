#include "surfspec/features.hpp"

#include <algorithm>
#include <cmath>

#include "point_grid.hpp"
#include "surfspec/error.hpp"
#include "surfspec/geometry.hpp"
#include "surfspec/mesh_io.hpp"
#include "text_util.hpp"

namespace surfspec {

AtomDescriptorTable::AtomDescriptorTable(std::vector<std::string> columns,
                                         std::map<std::string, std::vector<double>> rows)
    : columns_(std::move(columns)), rows_(std::move(rows)) {
  if (columns_.empty()) throw ConfigError("descriptor table has no columns");
  for (const auto& [key, row] : rows_) {
    if (row.size() != columns_.size()) {
      throw ConfigError("descriptor row '" + key + "' has " + std::to_string(row.size()) + " values, expected " +
                        std::to_string(columns_.size()));
    }
    for (double v : row) {
      if (!std::isfinite(v)) throw ConfigError("descriptor row '" + key + "' has a non-finite value");
    }
  }
  if (!rows_.count(std::string(fallback_key()))) {
    throw ConfigError("descriptor table needs a '" + std::string(fallback_key()) + "' row");
  }
}

AtomDescriptorTable AtomDescriptorTable::default_elements() {
  const std::vector<std::string> keys = {"C", "N", "O", "S", "H", "P", "other"};
  std::vector<std::string> columns;
  std::map<std::string, std::vector<double>> rows;
  for (const std::string& k : keys) columns.push_back("is_" + k);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::vector<double> row(keys.size(), 0.0);
    row[i] = 1.0;
    rows.emplace(keys[i], std::move(row));
  }
  return AtomDescriptorTable(std::move(columns), std::move(rows));
}

AtomDescriptorTable AtomDescriptorTable::from_csv(std::string_view text) {
  detail::LineCursor cursor(text);
  std::string_view line;
  std::vector<std::string> columns;
  std::map<std::string, std::vector<double>> rows;
  bool header = false;
  while (cursor.next(line)) {
    const std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = detail::split_char(t, ',');
    if (!header) {
      if (detail::trim(cells[0]) != "key") throw ParseError(cursor.line_no(), "descriptor header must start with 'key'");
      for (std::size_t c = 1; c < cells.size(); ++c) columns.emplace_back(detail::trim(cells[c]));
      header = true;
      continue;
    }
    if (cells.size() != columns.size() + 1) {
      throw ParseError(cursor.line_no(), "expected " + std::to_string(columns.size() + 1) + " columns, got " +
                                             std::to_string(cells.size()));
    }
    const std::string key(detail::trim(cells[0]));
    if (key.empty()) throw ParseError(cursor.line_no(), "empty descriptor key");
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = detail::to_double(cells[c]);
      if (!v) throw ParseError(cursor.line_no(), "malformed number '" + std::string(detail::trim(cells[c])) + "'");
      row.push_back(*v);
    }
    if (!rows.emplace(key, std::move(row)).second) throw ParseError(cursor.line_no(), "duplicate key '" + key + "'");
  }
  if (!header) throw ParseError(0, "empty descriptor table");
  return AtomDescriptorTable(std::move(columns), std::move(rows));
}

AtomDescriptorTable AtomDescriptorTable::load(const std::filesystem::path& path) {
  return from_csv(read_text_file(path));
}

const std::vector<double>& AtomDescriptorTable::lookup(const std::string& element, const std::string& residue) const {
  if (auto it = rows_.find(element); it != rows_.end()) return it->second;
  if (!residue.empty()) {
    if (auto it = rows_.find(residue); it != rows_.end()) return it->second;
  }
  return rows_.find(std::string(fallback_key()))->second;
}

AtomFeatures project_atom_features(const AtomSet& atoms, const TriangleMesh& mesh, const AtomDescriptorTable& table,
                                   const ProjectionOptions& options) {
  if (atoms.empty()) throw GeometryError("atom set is empty");
  if (!options.k_nearest && !(options.radius > 0.0 && std::isfinite(options.radius))) {
    throw ConfigError("projection radius must be positive and finite");
  }
  if (options.k_nearest && *options.k_nearest == 0) throw ConfigError("k_nearest must be positive");

  const std::size_t w = table.width();
  std::vector<const std::vector<double>*> desc(atoms.size());
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const std::string residue = a < atoms.residue_names.size() ? atoms.residue_names[a] : std::string();
    desc[a] = &table.lookup(atoms.elements[a], residue);
  }

  const double cell = options.k_nearest ? 4.0 : options.radius;
  const detail::PointGrid grid(atoms.positions, cell);

  AtomFeatures out;
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  out.field.values = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(w + 1));
  out.field.names = table.columns();
  out.field.names.push_back("inv_dist");
  out.field.mesh_hash = mesh.hash();

  std::size_t total_neighbors = 0;
  for (Eigen::Index v = 0; v < n; ++v) {
    const Vec3& x = mesh.vertices()[v];
    // Sorted by (distance, index), so the sum order does not depend on the
    // input atom order.
    const std::vector<detail::Neighbor> nbrs =
        options.k_nearest ? grid.nearest(x, *options.k_nearest) : grid.within(x, options.radius);
    if (nbrs.empty()) {
      ++out.empty_vertices;
      continue;
    }
    total_neighbors += nbrs.size();
    auto row = out.field.values.row(v);
    for (const detail::Neighbor& nb : nbrs) {
      const std::vector<double>& u = *desc[nb.index];
      for (std::size_t c = 0; c < w; ++c) row[static_cast<Eigen::Index>(c)] += u[c];
      row[static_cast<Eigen::Index>(w)] += 1.0 / std::max(std::sqrt(nb.dist2), 1e-6);
    }
    row /= static_cast<double>(nbrs.size());
  }
  out.mean_neighbors = n > 0 ? static_cast<double>(total_neighbors) / static_cast<double>(n) : 0.0;
  return out;
}

AssembledFeatures assemble_input_features(const SurfaceField& geom, const SurfaceField& chem,
                                          const SparseSymMatrix* standardize_with) {
  if (geom.vertex_count() != chem.vertex_count()) {
    throw GeometryError("geometric field has " + std::to_string(geom.vertex_count()) + " vertices, chemical field " +
                        std::to_string(chem.vertex_count()));
  }
  AssembledFeatures out;
  out.field.values.resize(geom.vertex_count(), geom.channels() + chem.channels());
  out.field.values << geom.values, chem.values;
  for (const std::string& name : geom.names) out.field.names.push_back("geom:" + name);
  for (const std::string& name : chem.names) out.field.names.push_back("chem:" + name);
  out.field.mesh_hash = geom.mesh_hash;
  if (!standardize_with) return out;

  const SparseSymMatrix& B = *standardize_with;
  if (B.dimension() != out.field.vertex_count()) throw GeometryError("mass matrix does not match the field");
  const Eigen::VectorXd w = B.matrix() * Eigen::VectorXd::Ones(B.dimension());
  const double total = w.sum();
  for (Eigen::Index c = 0; c < out.field.channels(); ++c) {
    auto col = out.field.values.col(c);
    const double mean = col.dot(w) / total;
    const Eigen::VectorXd centered = col.array() - mean;
    const double var = centered.dot(B.matrix() * centered) / total;
    const double sd = std::sqrt(std::max(var, 0.0));
    const double magnitude = col.cwiseAbs().maxCoeff();
    if (!(sd > 1e-10 * magnitude) || magnitude == 0.0) {
      col.setZero();
      out.constant_channels.push_back(out.field.names[static_cast<std::size_t>(c)]);
      continue;
    }
    col = centered / sd;
  }
  return out;
}

SurfaceField geometric_features(const TriangleMesh& mesh, const SpectralBasis& basis,
                                std::span<const double> hks_times) {
  if (mesh.hash() != basis.mesh_hash()) throw GeometryError("basis was not computed on this mesh");
  const SurfaceField hks = heat_kernel_signature(basis, hks_times);
  SurfaceField out;
  out.values.resize(static_cast<Eigen::Index>(mesh.vertex_count()), 2 + hks.channels());
  out.values.col(0) = gaussian_curvature(mesh);
  out.values.col(1) = mean_curvature(mesh).values;
  out.values.rightCols(hks.channels()) = hks.values;
  out.names = {"gaussian", "mean"};
  out.names.insert(out.names.end(), hks.names.begin(), hks.names.end());
  out.mesh_hash = mesh.hash();
  return out;
}

}  // namespace surfspec
