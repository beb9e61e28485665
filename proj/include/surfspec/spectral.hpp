#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "surfspec/mesh.hpp"

namespace surfspec {

/// Symmetric sparse matrix in compressed storage. Entries are assembled
/// symmetrically, so (i, j) and (j, i) are bit-identical.
class SparseSymMatrix {
public:
  using Storage = Eigen::SparseMatrix<double>;

  SparseSymMatrix() = default;
  explicit SparseSymMatrix(Storage m);

  const Storage& matrix() const { return m_; }
  Eigen::Index dimension() const { return m_.rows(); }
  double trace() const { return m_.diagonal().sum(); }
  /// Sum of every stored entry.
  double total() const;

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const { return m_ * x; }
  Eigen::MatrixXd operator*(const Eigen::MatrixXd& x) const { return m_ * x; }

private:
  Storage m_;
};

/// Positive semi-definite cotangent Laplacian L: off-diagonal (i, j) is
/// -(cot a_ij + cot b_ij) / 2 over the faces sharing the edge and the diagonal
/// is minus the sum of its row's off-diagonals, so L * 1 = 0 and x'Lx is the
/// Dirichlet energy. This is the negation of the textbook A_cot table; the
/// weak form of Delta f = -div(grad f) is L f = lambda B f.
/// Throws GeometryError naming the face when a cotangent is not finite.
SparseSymMatrix assemble_stiffness(const TriangleMesh& mesh);

/// Consistent linear-FEM mass matrix: |t|/6 per incident face on the
/// diagonal, (|t1| + |t2|)/12 on edges.
SparseSymMatrix assemble_mass(const TriangleMesh& mesh);

/// Row sums of the mass matrix: one third of the incident face areas.
Eigen::VectorXd lumped_mass(const TriangleMesh& mesh);

/// Either a fixed number of eigenpairs or every pair below an eigenvalue cap.
struct SpectrumRequest {
  std::optional<int> k;
  std::optional<double> lambda_max;

  static SpectrumRequest count(int k) { return {k, std::nullopt}; }
  static SpectrumRequest cutoff(double lambda_max) { return {std::nullopt, lambda_max}; }
};

/// Default eigenvalue cap for protein-scale surfaces, in 1/Angstrom^2.
inline constexpr double kDefaultLambdaMax = 0.3;

struct EigenSolverOptions {
  /// Convergence threshold on ||L z - lambda B z|| / (||B z|| * lambda_scale),
  /// lambda_scale being the largest wanted eigenvalue, floored at
  /// 1e-8 * trace(L) / trace(B) so a kernel-only request is well posed.
  double tolerance = 1e-9;
  /// The Krylov space may grow to iteration_factor * k vectors.
  int iteration_factor = 10;
  /// Floor on the Krylov space size; small k that cuts through a cluster of
  /// near-equal eigenvalues needs room to separate it.
  int min_krylov = 200;
  int block_size = 8;
  std::uint64_t seed = 0x5eed5eedULL;
  /// Problems this small (or asking for more than half the spectrum) are
  /// solved densely.
  int dense_threshold = 400;
};

struct SolveDiagnostics {
  bool dense = false;
  int krylov_dimension = 0;
  int operator_applications = 0;
  double shift = 0.0;
  /// Per eigenpair ||L z - lambda B z||_2 / ||B z||_2.
  std::vector<double> residuals;
  double max_relative_residual = 0.0;
  int expansions = 0;
};

/// Truncated generalized eigenbasis: eigenvalues ascending, columns of
/// `vectors` B-orthonormal. The mass matrix is shared, not copied.
class SpectralBasis {
public:
  SpectralBasis() = default;
  SpectralBasis(Eigen::VectorXd eigenvalues, Eigen::MatrixXd vectors, std::shared_ptr<const SparseSymMatrix> mass,
                std::uint64_t mesh_hash, SpectrumRequest request, SolveDiagnostics diagnostics);

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  const SparseSymMatrix& mass() const { return *mass_; }
  std::shared_ptr<const SparseSymMatrix> mass_ptr() const { return mass_; }
  std::uint64_t mesh_hash() const { return mesh_hash_; }
  const SpectrumRequest& request() const { return request_; }
  const SolveDiagnostics& diagnostics() const { return diagnostics_; }

  Eigen::Index size() const { return eigenvalues_.size(); }
  Eigen::Index vertex_count() const { return vectors_.rows(); }

  /// First `k` pairs (same mass matrix and hash).
  SpectralBasis truncated(Eigen::Index k) const;

private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd vectors_;
  std::shared_ptr<const SparseSymMatrix> mass_;
  std::uint64_t mesh_hash_ = 0;
  SpectrumRequest request_;
  SolveDiagnostics diagnostics_;
};

/// Smallest eigenpairs of L z = lambda B z by block shift-invert Lanczos with
/// full B-reorthogonalization on (L + eps B)^-1 B, eps = 1e-8 trace(L) / N.
/// In lambda_max mode k grows geometrically until the cap is exceeded, then
/// the basis is truncated to eigenvalues <= lambda_max.
/// Throws SolveError if the matrix graph is disconnected, the factorization
/// fails or the iteration cap is reached.
SpectralBasis solve_spectrum(const SparseSymMatrix& stiffness, std::shared_ptr<const SparseSymMatrix> mass,
                             const SpectrumRequest& request, const EigenSolverOptions& options = {},
                             std::uint64_t mesh_hash = 0);

/// Assemble both matrices for `mesh` and solve.
SpectralBasis compute_basis(const TriangleMesh& mesh, const SpectrumRequest& request,
                            const EigenSolverOptions& options = {});

struct WeylFit {
  double slope = 0.0;
  /// 4 pi / area.
  double predicted = 0.0;
  double ratio = 0.0;
};

/// Least-squares slope of lambda_i against i over i in [k/4, k). Needs k >= 30.
WeylFit weyl_slope(const SpectralBasis& basis, double area);

}  // namespace surfspec
