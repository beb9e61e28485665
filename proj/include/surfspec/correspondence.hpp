#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "surfspec/harmonics.hpp"
#include "surfspec/mesh.hpp"
#include "surfspec/spectral.hpp"

namespace surfspec {

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

PointMatrix to_points(const std::vector<Vec3>& points);

/// Default contact distance for interface vertices, Angstrom.
inline constexpr double kDefaultInterfaceThreshold = 3.0;
/// Default contact distance for interface points in interface_rmsd, Angstrom.
inline constexpr double kDefaultRmsdInterfaceThreshold = 8.0;

struct Interface {
  /// Per-vertex membership on each mesh.
  std::vector<char> mask_first;
  std::vector<char> mask_second;
  /// Sorted member indices.
  std::vector<int> vertices_first;
  std::vector<int> vertices_second;
  /// Mutual nearest neighbours among the members, sorted by first index.
  std::vector<std::pair<int, int>> pairs;

  bool empty() const { return vertices_first.empty() && vertices_second.empty(); }
};

/// Vertices of each mesh within `threshold` of some vertex of the other. An
/// empty result is returned, not thrown; rigid_dock rejects it.
Interface extract_interface(const TriangleMesh& first, const TriangleMesh& second,
                            double threshold = kDefaultInterfaceThreshold);

/// Maps source spectral coefficients to target ones: C is k_target x k_source.
struct FunctionalMap {
  Eigen::MatrixXd C;
  std::uint64_t source_hash = 0;
  std::uint64_t target_hash = 0;
  double alpha = 0.0;
  double ridge = 0.0;
  /// ||C A - B||_F at the solution.
  double residual = 0.0;
};

struct FmapOptions {
  /// Weight of the eigenvalue-commutativity penalty.
  double alpha = 1e-3;
  /// rho = ridge_factor * trace(A A') / k_source.
  double ridge_factor = 1e-10;
};

/// Row i of C minimizes ||c A - b_i||^2 + alpha sum_j (lm_j - ln_i)^2 c_j^2
/// + rho ||c||^2, solved in closed form. A is k_source x n, B is k_target x n.
/// Throws SolveError if either coefficient matrix is all zero.
FunctionalMap solve_fmap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& eigs_source,
                         const Eigen::VectorXd& eigs_target, const FmapOptions& options = {});

/// solve_fmap on the harmonic coefficients of two fields with matching
/// channels. Each channel is scaled by the inverse norm of its source
/// coefficients (the same factor on both sides) so no channel dominates by
/// magnitude alone.
FunctionalMap fmap_from_fields(const SurfaceField& source_field, const SpectralBasis& source,
                               const SurfaceField& target_field, const SpectralBasis& target,
                               const FmapOptions& options = {});

struct VertexCorrespondence {
  /// For every target vertex, the matched source vertex.
  std::vector<int> source_of_target;
  /// Spectral-embedding distance of each match.
  std::vector<double> distance;
};

enum class P2PMode {
  /// Compare C z_source(x) with z_target(y) in the target's spectral space.
  push,
  /// Compare z_source(x) with C' z_target(y) in the source's spectral space.
  pull,
};

/// Exact nearest neighbour per target vertex; ties go to the lowest source
/// index. With C = 0 every push distance is equal, so all targets map to
/// source vertex 0; in pull mode they map to the smallest-norm source row.
VertexCorrespondence fmap_to_p2p(const FunctionalMap& map, const SpectralBasis& source, const SpectralBasis& target,
                                 P2PMode mode = P2PMode::push);

struct RigidTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return R * p + t; }
  PointMatrix apply(const PointMatrix& P) const;
  RigidTransform inverse() const;
  /// (*this) after `first`.
  RigidTransform compose(const RigidTransform& first) const;
  double rotation_angle_degrees() const;
  Eigen::Matrix4d homogeneous() const;
};

/// R, t minimizing sum_i w_i ||R p_i + t - q_i||^2 with det R = +1. Throws
/// GeometryError for fewer than 3 points, mismatched sizes, bad weights or
/// a covariance of rank < 2.
RigidTransform kabsch(const PointMatrix& P, const PointMatrix& Q, const Eigen::VectorXd& weights = {});

/// sqrt(mean ||z*_i - z_i||^2) after superimposing Z onto Z_star.
double complex_rmsd(const PointMatrix& Z_star, const PointMatrix& Z);

/// Points of the first `n_first` rows within `threshold` of any of the
/// remaining rows, and vice versa, measured on Z_star.
std::vector<char> rmsd_interface_mask(const PointMatrix& Z_star, Eigen::Index n_first,
                                      double threshold = kDefaultRmsdInterfaceThreshold);

/// complex_rmsd restricted to rmsd_interface_mask(Z_star). Throws
/// EmptyInterfaceError when fewer than 3 points qualify.
double interface_rmsd(const PointMatrix& Z_star, const PointMatrix& Z, Eigen::Index n_first,
                      double threshold = kDefaultRmsdInterfaceThreshold);

struct DockOptions {
  SpectrumRequest spectrum = SpectrumRequest::cutoff(kDefaultLambdaMax);
  EigenSolverOptions solver;
  FmapOptions fmap;
  P2PMode p2p = P2PMode::push;
  std::size_t min_interface = 10;
  /// Solve the two submesh spectra concurrently.
  bool parallel = true;
  /// Called with the name of each stage as it starts.
  std::function<void(std::string_view)> on_stage;
};

struct DockReport {
  /// Moves the ligand onto the receptor.
  RigidTransform transform;
  std::vector<std::string> channels;
  /// Pearson r between ligand interface values and the receptor values at the
  /// matched vertices; NaN for a channel that is constant on either side.
  std::vector<double> correlations;
  double fmap_residual = 0.0;
  std::size_t interface_ligand = 0;
  std::size_t interface_receptor = 0;
  Eigen::Index k_ligand = 0;
  Eigen::Index k_receptor = 0;
  /// RMS distance between the moved ligand interface vertices and their
  /// matched receptor vertices.
  double alignment_rmsd = 0.0;
  std::map<std::string, double> timing;
};

/// Restricts both meshes and fields to the masked interface submeshes,
/// recomputes their spectra, maps receptor coefficients to ligand ones, and
/// fits the ligand-to-receptor transform with Kabsch on the matched vertices.
/// Throws EmptyInterfaceError when a submesh has fewer than min_interface
/// vertices and SolveError when a submesh spectrum fails.
DockReport rigid_dock(const TriangleMesh& ligand, const TriangleMesh& receptor, const SurfaceField& ligand_fields,
                      const SurfaceField& receptor_fields, const std::vector<char>& ligand_mask,
                      const std::vector<char>& receptor_mask, const DockOptions& options = {});

/// Pearson correlation; NaN when either input is constant.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace surfspec
