#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "surfspec/error.hpp"
#include "surfspec/fixtures.hpp"
#include "surfspec/spectral.hpp"

namespace surfspec {

SpectralBasis::SpectralBasis(Eigen::VectorXd eigenvalues, Eigen::MatrixXd vectors,
                             std::shared_ptr<const SparseSymMatrix> mass, std::uint64_t mesh_hash,
                             SpectrumRequest request, SolveDiagnostics diagnostics)
    : eigenvalues_(std::move(eigenvalues)),
      vectors_(std::move(vectors)),
      mass_(std::move(mass)),
      mesh_hash_(mesh_hash),
      request_(request),
      diagnostics_(std::move(diagnostics)) {}

SpectralBasis SpectralBasis::truncated(Eigen::Index k) const {
  k = std::min(k, size());
  SolveDiagnostics diag = diagnostics_;
  if (diag.residuals.size() > static_cast<std::size_t>(k)) diag.residuals.resize(k);
  return SpectralBasis(eigenvalues_.head(k), vectors_.leftCols(k), mass_, mesh_hash_, request_, std::move(diag));
}

namespace {

using SpMat = SparseSymMatrix::Storage;

struct Eigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  SolveDiagnostics diagnostics;
};

void require_connected(const SpMat& L) {
  const Eigen::Index n = L.rows();
  if (n == 0) throw SolveError("empty matrix");
  std::vector<char> seen(n, 0);
  std::queue<Eigen::Index> todo;
  todo.push(0);
  seen[0] = 1;
  Eigen::Index reached = 1;
  while (!todo.empty()) {
    const Eigen::Index v = todo.front();
    todo.pop();
    for (SpMat::InnerIterator it(L, v); it; ++it) {
      if (it.value() == 0.0 || seen[it.row()]) continue;
      seen[it.row()] = 1;
      ++reached;
      todo.push(it.row());
    }
  }
  if (reached != n) {
    throw SolveError("mesh is disconnected (" + std::to_string(reached) + " of " + std::to_string(n) +
                     " vertices reachable); run cleanup first");
  }
}

// Deterministic sign: the entry of largest magnitude (first one on ties) is positive.
void fix_signs(Eigen::MatrixXd& Z) {
  for (Eigen::Index c = 0; c < Z.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < Z.rows(); ++r) {
      if (std::abs(Z(r, c)) > best) {
        best = std::abs(Z(r, c));
        arg = r;
      }
    }
    if (Z(arg, c) < 0.0) Z.col(c) = -Z.col(c);
  }
}

// Rayleigh quotients, ordering, sign convention and residuals on the final
// B-normalized vectors.
void finalize(const SpMat& L, const SpMat& B, Eigen::MatrixXd& Z, Eigen::VectorXd& lambda, SolveDiagnostics& diag) {
  const Eigen::Index k = Z.cols();
  lambda.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double bnorm = std::sqrt(Z.col(i).dot(B * Z.col(i)));
    Z.col(i) /= bnorm;
    lambda[i] = Z.col(i).dot(L * Z.col(i));
  }
  std::vector<Eigen::Index> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return lambda[a] < lambda[b]; });
  Eigen::MatrixXd Zs(Z.rows(), k);
  Eigen::VectorXd ls(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    Zs.col(i) = Z.col(order[i]);
    ls[i] = lambda[order[i]];
  }
  // A request for the kernel alone has lambda_{k-1} = 0; fall back to a tiny
  // fraction of the operator's diagonal scale.
  const double diag_ratio = L.diagonal().sum() / B.diagonal().sum();
  const double scale = std::max({std::abs(ls[k - 1]), 1e-8 * diag_ratio, 1e-300});
  for (Eigen::Index i = 0; i < k; ++i) {
    if (ls[i] < 0.0 && std::abs(ls[i]) <= 1e-12 * std::max(scale, diag_ratio)) ls[i] = 0.0;
  }
  fix_signs(Zs);
  diag.residuals.assign(k, 0.0);
  diag.max_relative_residual = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::VectorXd Bz = B * Zs.col(i);
    const double r = (L * Zs.col(i) - ls[i] * Bz).norm() / Bz.norm();
    diag.residuals[i] = r;
    diag.max_relative_residual = std::max(diag.max_relative_residual, r / scale);
  }
  Z = std::move(Zs);
  lambda = std::move(ls);
}

Eigenpairs solve_dense(const SpMat& L, const SpMat& B, Eigen::Index k) {
  const Eigen::MatrixXd Ld(L);
  const Eigen::MatrixXd Bd(B);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Ld, Bd, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success) throw SolveError("dense generalized eigensolver failed");
  Eigenpairs out;
  out.vectors = ges.eigenvectors().leftCols(k);
  out.diagnostics.dense = true;
  out.diagnostics.krylov_dimension = static_cast<int>(L.rows());
  finalize(L, B, out.vectors, out.values, out.diagnostics);
  return out;
}

class ShiftInvertOperator {
public:
  ShiftInvertOperator(const SpMat& L, const SpMat& B, double shift) : B_(B) {
    ldlt_.compute(SpMat(L + shift * B));
    if (ldlt_.info() != Eigen::Success || !(ldlt_.vectorD().minCoeff() > 0.0)) {
      throw SolveError("sparse factorization of L + eps B failed (degenerate or broken mesh)");
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return ldlt_.solve(B_ * x); }

private:
  const SpMat& B_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

Eigenpairs solve_lanczos(const SpMat& L, const SpMat& B, Eigen::Index k, const EigenSolverOptions& opt) {
  const Eigen::Index n = L.rows();
  const double shift = 1e-8 * L.diagonal().sum() / static_cast<double>(n);
  const ShiftInvertOperator op(L, B, shift);

  const Eigen::Index block = std::clamp<Eigen::Index>(opt.block_size, 1, k);
  const Eigen::Index cap = std::min<Eigen::Index>(n, std::max<Eigen::Index>({opt.iteration_factor * k, k + 2 * block, opt.min_krylov}));

  Eigen::MatrixXd Q(n, cap);   // B-orthonormal Krylov basis
  Eigen::MatrixXd BQ(n, cap);  // B * Q
  Eigen::MatrixXd LQ(n, cap);  // L * Q
  Eigen::Index filled = 0;
  Eigen::Index processed = 0;
  FixtureRng rng(opt.seed);

  // Classical Gram-Schmidt in the B inner product, repeated while a pass
  // cancels most of the vector (DGKS criterion, at most four passes).
  auto append = [&](Eigen::VectorXd w) -> bool {
    if (filled >= cap) return false;
    Eigen::VectorXd Bw = B * w;
    const double before = std::sqrt(std::max(w.dot(Bw), 0.0));
    double norm = before;
    for (int pass = 0; pass < 4 && filled > 0; ++pass) {
      const Eigen::VectorXd h = BQ.leftCols(filled).transpose() * w;
      w.noalias() -= Q.leftCols(filled) * h;
      Bw = B * w;
      const double next = std::sqrt(std::max(w.dot(Bw), 0.0));
      const bool settled = next > 0.7071 * norm;
      norm = next;
      if (settled) break;
    }
    if (!(norm > 1e-10 * before) || !(norm > 0.0)) return false;
    Q.col(filled) = w / norm;
    BQ.col(filled) = Bw / norm;
    LQ.col(filled) = L * Q.col(filled);
    ++filled;
    return true;
  };
  auto random_vector = [&]() {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
  };

  // The kernel of L on a connected mesh is exactly the constants. Seeding the
  // basis with them keeps later vectors B-orthogonal to the 1/eps direction;
  // a Krylov approximation of it would leak ~1e-8 error into every pair.
  append(Eigen::VectorXd::Ones(n));
  for (Eigen::Index b = 1; b < block; ++b) append(random_vector());

  SolveDiagnostics diag;
  diag.shift = shift;
  Eigen::Index last_check = 0;
  while (true) {
    if (processed == filled) {
      // Invariant subspace reached before convergence: restart with fresh directions.
      if (filled >= cap || !append(random_vector())) break;
    }
    const Eigen::VectorXd w = op.apply(Q.col(processed));
    ++diag.operator_applications;
    ++processed;
    append(w);

    const bool exhausted = processed == filled && filled >= cap;
    if (processed < k || (processed - last_check < std::max<Eigen::Index>(block, processed / 10) && !exhausted &&
                          processed != cap)) {
      continue;
    }
    last_check = processed;

    // Rayleigh-Ritz on L itself. Extracting from the inverse operator would let
    // its 1/eps eigenvalue (the constant mode) swamp the small gaps higher up.
    Eigen::MatrixXd T = Q.leftCols(filled).transpose() * LQ.leftCols(filled);
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::MatrixXd Y = es.eigenvectors().leftCols(k);
    Eigen::MatrixXd Z = Q.leftCols(filled) * Y;
    Eigen::VectorXd lambda;
    SolveDiagnostics trial = diag;
    trial.krylov_dimension = static_cast<int>(filled);
    finalize(L, B, Z, lambda, trial);
    if (trial.max_relative_residual <= opt.tolerance || processed >= cap) {
      if (trial.max_relative_residual > opt.tolerance) {
        throw SolveError("Lanczos did not converge within " + std::to_string(cap) +
                         " Krylov vectors (max relative residual " + std::to_string(trial.max_relative_residual) + ")");
      }
      return Eigenpairs{std::move(lambda), std::move(Z), std::move(trial)};
    }
  }
  throw SolveError("Lanczos broke down before converging");
}

Eigenpairs solve_count(const SpMat& L, const SpMat& B, Eigen::Index k, const EigenSolverOptions& opt) {
  const Eigen::Index n = L.rows();
  k = std::clamp<Eigen::Index>(k, 1, n);
  if (n <= opt.dense_threshold || (2 * k >= n && n <= 3000)) return solve_dense(L, B, k);
  if (k == 1) {
    // Connected mesh: the kernel is the constants.
    Eigenpairs out;
    out.vectors = Eigen::MatrixXd::Ones(n, 1);
    out.diagnostics.krylov_dimension = 1;
    finalize(L, B, out.vectors, out.values, out.diagnostics);
    return out;
  }
  return solve_lanczos(L, B, k, opt);
}

}  // namespace

SpectralBasis solve_spectrum(const SparseSymMatrix& stiffness, std::shared_ptr<const SparseSymMatrix> mass,
                             const SpectrumRequest& request, const EigenSolverOptions& options,
                             std::uint64_t mesh_hash) {
  if (!mass) throw SolveError("mass matrix missing");
  const SpMat& L = stiffness.matrix();
  const SpMat& B = mass->matrix();
  if (L.rows() != B.rows() || L.rows() != L.cols() || B.rows() != B.cols()) {
    throw SolveError("stiffness and mass dimensions differ");
  }
  if (request.k.has_value() == request.lambda_max.has_value()) {
    throw SolveError("spectrum request needs exactly one of k or lambda_max");
  }
  require_connected(L);
  const Eigen::Index n = L.rows();

  if (request.k) {
    if (*request.k < 1) throw SolveError("k must be positive");
    Eigenpairs pairs = solve_count(L, B, *request.k, options);
    return SpectralBasis(std::move(pairs.values), std::move(pairs.vectors), std::move(mass), mesh_hash, request,
                         std::move(pairs.diagnostics));
  }

  const double cap = *request.lambda_max;
  if (!(cap > 0.0) || !std::isfinite(cap)) throw SolveError("lambda_max must be positive and finite");
  // Weyl estimate of the count below the cap, with margin.
  const double area = mass->total();
  Eigen::Index k = static_cast<Eigen::Index>(std::ceil(1.2 * area * cap / (4.0 * std::numbers::pi))) + 10;
  k = std::clamp<Eigen::Index>(k, 16, n);
  int expansions = 0;
  while (true) {
    Eigenpairs pairs = solve_count(L, B, k, options);
    if (pairs.values[pairs.values.size() - 1] > cap || k >= n) {
      Eigen::Index keep = 0;
      while (keep < pairs.values.size() && pairs.values[keep] <= cap) ++keep;
      keep = std::max<Eigen::Index>(keep, 1);
      pairs.diagnostics.expansions = expansions;
      pairs.diagnostics.residuals.resize(keep);
      return SpectralBasis(pairs.values.head(keep), pairs.vectors.leftCols(keep), std::move(mass), mesh_hash, request,
                           std::move(pairs.diagnostics));
    }
    k = std::min(2 * k, n);
    ++expansions;
  }
}

SpectralBasis compute_basis(const TriangleMesh& mesh, const SpectrumRequest& request,
                            const EigenSolverOptions& options) {
  mesh.validate_manifold();
  const SparseSymMatrix L = assemble_stiffness(mesh);
  auto B = std::make_shared<const SparseSymMatrix>(assemble_mass(mesh));
  return solve_spectrum(L, std::move(B), request, options, mesh.hash());
}

WeylFit weyl_slope(const SpectralBasis& basis, double area) {
  const Eigen::Index k = basis.size();
  if (k < 30) throw SolveError("Weyl fit needs at least 30 eigenvalues, got " + std::to_string(k));
  const Eigen::Index first = k / 4;
  const auto m = static_cast<double>(k - first);
  double mean_i = 0.0, mean_l = 0.0;
  for (Eigen::Index i = first; i < k; ++i) {
    mean_i += static_cast<double>(i);
    mean_l += basis.eigenvalues()[i];
  }
  mean_i /= m;
  mean_l /= m;
  double sxy = 0.0, sxx = 0.0;
  for (Eigen::Index i = first; i < k; ++i) {
    const double dx = static_cast<double>(i) - mean_i;
    sxy += dx * (basis.eigenvalues()[i] - mean_l);
    sxx += dx * dx;
  }
  WeylFit fit;
  fit.slope = sxy / sxx;
  fit.predicted = 4.0 * std::numbers::pi / area;
  fit.ratio = fit.slope / fit.predicted;
  return fit;
}

}  // namespace surfspec
