#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "surfspec/correspondence.hpp"
#include "surfspec/error.hpp"

namespace surfspec {

FunctionalMap solve_fmap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& eigs_source,
                         const Eigen::VectorXd& eigs_target, const FmapOptions& options) {
  const Eigen::Index k1 = A.rows();
  const Eigen::Index k2 = B.rows();
  if (A.cols() < 1 || A.cols() != B.cols()) {
    throw SolveError("coefficient matrices need the same positive number of channels (" + std::to_string(A.cols()) +
                     " vs " + std::to_string(B.cols()) + ")");
  }
  if (eigs_source.size() != k1 || eigs_target.size() != k2) throw SolveError("eigenvalue counts do not match the coefficients");
  if (!(options.alpha >= 0.0) || !std::isfinite(options.alpha)) throw ConfigError("fmap alpha must be >= 0");
  if (!(options.ridge_factor >= 0.0)) throw ConfigError("fmap ridge factor must be >= 0");
  if (!A.allFinite() || !B.allFinite()) throw SolveError("coefficient matrices contain non-finite values");
  if (A.isZero(0.0) || B.isZero(0.0)) throw SolveError("coefficient matrix is all zero");

  const Eigen::MatrixXd AAt = A * A.transpose();
  const double ridge = options.ridge_factor * AAt.trace() / static_cast<double>(k1);
  const Eigen::MatrixXd BAt = B * A.transpose();

  FunctionalMap out;
  out.C.resize(k2, k1);
  out.alpha = options.alpha;
  out.ridge = ridge;
  for (Eigen::Index i = 0; i < k2; ++i) {
    Eigen::MatrixXd M = AAt;
    for (Eigen::Index j = 0; j < k1; ++j) {
      const double d = eigs_source[j] - eigs_target[i];
      M(j, j) += options.alpha * d * d + ridge;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success) throw SolveError("fmap row system is singular; add ridge or alpha");
    // M is symmetric, so c_i' = M^-1 (b_i A')'.
    out.C.row(i) = ldlt.solve(BAt.row(i).transpose()).transpose();
  }
  if (!out.C.allFinite()) throw SolveError("fmap solution is not finite");
  out.residual = (out.C * A - B).norm();
  return out;
}

FunctionalMap fmap_from_fields(const SurfaceField& source_field, const SpectralBasis& source,
                               const SurfaceField& target_field, const SpectralBasis& target,
                               const FmapOptions& options) {
  if (source_field.channels() != target_field.channels()) {
    throw SolveError("descriptor channel counts differ (" + std::to_string(source_field.channels()) + " vs " +
                     std::to_string(target_field.channels()) + ")");
  }
  Eigen::MatrixXd A = to_spectral(source_field, source).coeffs;
  Eigen::MatrixXd B = to_spectral(target_field, target).coeffs;
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    const double norm = A.col(c).norm();
    if (norm > 0.0) {
      A.col(c) /= norm;
      B.col(c) /= norm;
    }
  }
  FunctionalMap out = solve_fmap(A, B, source.eigenvalues(), target.eigenvalues(), options);
  out.source_hash = source.mesh_hash();
  out.target_hash = target.mesh_hash();
  return out;
}

namespace {

// Index of the row of E closest to q; the lowest index wins ties.
std::pair<int, double> nearest_row(const Eigen::MatrixXd& E, const Eigen::RowVectorXd& q) {
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < E.rows(); ++r) {
    const double d2 = (E.row(r) - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(r);
    }
  }
  return {best, std::sqrt(best_d2)};
}

}  // namespace

VertexCorrespondence fmap_to_p2p(const FunctionalMap& map, const SpectralBasis& source, const SpectralBasis& target,
                                 P2PMode mode) {
  const Eigen::Index k1 = map.C.cols();
  const Eigen::Index k2 = map.C.rows();
  if (k1 > source.size() || k2 > target.size()) {
    throw SolveError("functional map is " + std::to_string(k2) + "x" + std::to_string(k1) + " but the bases have " +
                     std::to_string(target.size()) + " and " + std::to_string(source.size()) + " vectors");
  }
  const auto Zs = source.vectors().leftCols(k1);
  const auto Zt = target.vectors().leftCols(k2);
  Eigen::MatrixXd E;
  Eigen::MatrixXd Qs;
  if (mode == P2PMode::push) {
    E = Zs * map.C.transpose();
    Qs = Zt;
  } else {
    E = Zs;
    Qs = Zt * map.C;
  }
  VertexCorrespondence out;
  out.source_of_target.resize(static_cast<std::size_t>(Qs.rows()));
  out.distance.resize(static_cast<std::size_t>(Qs.rows()));
  for (Eigen::Index y = 0; y < Qs.rows(); ++y) {
    const auto [x, d] = nearest_row(E, Qs.row(y));
    out.source_of_target[static_cast<std::size_t>(y)] = x;
    out.distance[static_cast<std::size_t>(y)] = d;
  }
  return out;
}

}  // namespace surfspec
