#include <chrono>
#include <cmath>
#include <future>
#include <limits>

#include "surfspec/cleanup.hpp"
#include "surfspec/correspondence.hpp"
#include "surfspec/error.hpp"

namespace surfspec {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double na = da.norm();
  const double nb = db.norm();
  if (!(na > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()) * std::sqrt(static_cast<double>(a.size()))) ||
      !(nb > 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()) * std::sqrt(static_cast<double>(b.size())))) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return da.dot(db) / (na * nb);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Side {
  CleanupResult sub;
  SurfaceField fields;
};

Side restrict_side(const TriangleMesh& mesh, const SurfaceField& fields, const std::vector<char>& mask,
                   std::size_t min_size, const char* name) {
  if (mask.size() != mesh.vertex_count()) {
    throw GeometryError(std::string(name) + " interface mask has " + std::to_string(mask.size()) +
                        " entries for " + std::to_string(mesh.vertex_count()) + " vertices");
  }
  if (fields.vertex_count() != static_cast<Eigen::Index>(mesh.vertex_count())) {
    throw GeometryError(std::string(name) + " descriptor field does not match its mesh");
  }
  std::size_t members = 0;
  for (char m : mask) members += m ? 1 : 0;
  if (members < min_size) {
    throw EmptyInterfaceError(std::string(name) + " interface has " + std::to_string(members) + " vertices (need " +
                              std::to_string(min_size) + ")");
  }
  Side side;
  try {
    side.sub = extract_submesh(mesh, mask);
  } catch (const GeometryError& e) {
    throw EmptyInterfaceError(std::string(name) + " interface has no complete faces: " + e.what());
  }
  if (side.sub.mesh.vertex_count() < min_size) {
    throw EmptyInterfaceError(std::string(name) + " interface submesh has " +
                              std::to_string(side.sub.mesh.vertex_count()) + " vertices (need " +
                              std::to_string(min_size) + ")");
  }
  const auto n = static_cast<Eigen::Index>(side.sub.mesh.vertex_count());
  side.fields.values.resize(n, fields.channels());
  for (Eigen::Index i = 0; i < n; ++i) side.fields.values.row(i) = fields.values.row(side.sub.source_vertex[i]);
  side.fields.names = fields.names;
  side.fields.mesh_hash = side.sub.mesh.hash();
  return side;
}

SpectralBasis sub_basis(const TriangleMesh& mesh, const DockOptions& options, const char* name) {
  try {
    return compute_basis(mesh, options.spectrum, options.solver);
  } catch (const Error& e) {
    throw SolveError(std::string(name) + " interface spectrum: " + e.what());
  }
}

}  // namespace

DockReport rigid_dock(const TriangleMesh& ligand, const TriangleMesh& receptor, const SurfaceField& ligand_fields,
                      const SurfaceField& receptor_fields, const std::vector<char>& ligand_mask,
                      const std::vector<char>& receptor_mask, const DockOptions& options) {
  auto stage = [&](std::string_view s) {
    if (options.on_stage) options.on_stage(s);
  };
  if (ligand_fields.channels() != receptor_fields.channels() || ligand_fields.channels() < 1) {
    throw ConfigError("ligand and receptor need the same positive number of descriptor channels");
  }
  DockReport report;
  const auto total_start = Clock::now();

  stage("interface");
  auto t0 = Clock::now();
  const Side lig = restrict_side(ligand, ligand_fields, ligand_mask, options.min_interface, "ligand");
  const Side rec = restrict_side(receptor, receptor_fields, receptor_mask, options.min_interface, "receptor");
  report.interface_ligand = lig.sub.mesh.vertex_count();
  report.interface_receptor = rec.sub.mesh.vertex_count();
  report.timing["interface"] = seconds_since(t0);

  stage("spectra");
  t0 = Clock::now();
  SpectralBasis basis_l, basis_r;
  if (options.parallel) {
    auto fut = std::async(std::launch::async, [&] { return sub_basis(lig.sub.mesh, options, "ligand"); });
    basis_r = sub_basis(rec.sub.mesh, options, "receptor");
    basis_l = fut.get();
  } else {
    basis_l = sub_basis(lig.sub.mesh, options, "ligand");
    basis_r = sub_basis(rec.sub.mesh, options, "receptor");
  }
  report.k_ligand = basis_l.size();
  report.k_receptor = basis_r.size();
  report.timing["spectra"] = seconds_since(t0);

  stage("fmap");
  t0 = Clock::now();
  const FunctionalMap map = fmap_from_fields(rec.fields, basis_r, lig.fields, basis_l, options.fmap);
  report.fmap_residual = map.residual;
  report.timing["fmap"] = seconds_since(t0);

  stage("p2p");
  t0 = Clock::now();
  const VertexCorrespondence corr = fmap_to_p2p(map, basis_r, basis_l, options.p2p);
  report.timing["p2p"] = seconds_since(t0);

  stage("kabsch");
  t0 = Clock::now();
  const auto n = static_cast<Eigen::Index>(lig.sub.mesh.vertex_count());
  PointMatrix P(n, 3), Q(n, 3);
  for (Eigen::Index y = 0; y < n; ++y) {
    P.row(y) = lig.sub.mesh.vertices()[y].transpose();
    Q.row(y) = rec.sub.mesh.vertices()[corr.source_of_target[y]].transpose();
  }
  report.transform = kabsch(P, Q);
  report.alignment_rmsd = std::sqrt((report.transform.apply(P) - Q).squaredNorm() / static_cast<double>(n));
  report.timing["kabsch"] = seconds_since(t0);

  report.channels = lig.fields.names;
  for (Eigen::Index c = 0; c < lig.fields.channels(); ++c) {
    Eigen::VectorXd mapped(n);
    for (Eigen::Index y = 0; y < n; ++y) mapped[y] = rec.fields.values(corr.source_of_target[y], c);
    report.correlations.push_back(pearson(lig.fields.values.col(c), mapped));
  }
  report.timing["total"] = seconds_since(total_start);
  return report;
}

}  // namespace surfspec
