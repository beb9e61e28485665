#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "surfspec/mesh.hpp"
#include "surfspec/spectral.hpp"

namespace surfspec {

/// Per-vertex real functions, one column per channel, tied to a mesh by its
/// hash.
struct SurfaceField {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
  std::uint64_t mesh_hash = 0;

  static SurfaceField from_vector(const Eigen::VectorXd& v, std::string name, std::uint64_t mesh_hash);

  Eigen::Index vertex_count() const { return values.rows(); }
  Eigen::Index channels() const { return values.cols(); }

  /// Throws GeometryError on a name-count mismatch or non-finite values.
  void validate() const;
};

/// Spectral coefficients, k rows by channel columns.
struct SpectralCoeffs {
  Eigen::MatrixXd coeffs;
  std::uint64_t mesh_hash = 0;
};

/// Spectral response exp(-(lambda - mu)^2 / sigma^2) * exp(-lambda t). The
/// Gaussian factor is not normalized, so it does not preserve the mean; the
/// heat-only mode drops it entirely.
struct FilterParams {
  double mu = 0.0;
  double sigma = 1.0;
  double t = 0.0;
  bool heat_only = false;

  static FilterParams heat(double t) { return {0.0, 1.0, t, true}; }

  double response(double lambda) const;
  /// Throws GeometryError unless sigma > 0, t >= 0 and all values finite.
  void validate() const;
};

/// coeffs = Z' B f. Throws GeometryError if the field belongs to another mesh.
SpectralCoeffs to_spectral(const SurfaceField& field, const SpectralBasis& basis);

/// values = Z coeffs.
SurfaceField from_spectral(const SpectralCoeffs& coeffs, const SpectralBasis& basis,
                           std::vector<std::string> names = {});

/// from_spectral(to_spectral(field)).
SurfaceField project(const SurfaceField& field, const SpectralBasis& basis);

/// B-weighted mean of each channel.
Eigen::VectorXd weighted_mean(const SurfaceField& field, const SparseSymMatrix& mass);

/// Per channel: analyze, scale coefficient i by response(lambda_i),
/// synthesize. `params` has one entry per channel, or a single entry that
/// applies to all of them.
SurfaceField apply_filter(const SurfaceField& field, const SpectralBasis& basis, std::span<const FilterParams> params);

/// apply_filter with the heat-only response exp(-lambda t).
SurfaceField heat_diffuse(const SurfaceField& field, const SpectralBasis& basis, double t);

struct FilterGradients {
  SurfaceField d_mu;
  SurfaceField d_sigma;
  SurfaceField d_t;
};

/// Derivatives of apply_filter's output with respect to each channel's
/// (mu, sigma, t). Heat-only channels have zero mu and sigma derivatives.
FilterGradients filter_gradients(const SurfaceField& field, const SpectralBasis& basis,
                                 std::span<const FilterParams> params);

struct FilterFit {
  FilterParams params;
  /// Loss after each step, starting with the initial loss.
  std::vector<double> loss;
  int accepted_steps = 0;
};

/// Gradient descent on 0.5 ||apply_filter(input) - target||_B^2 over a
/// single channel. mu and sigma are scaled by the largest eigenvalue and t by
/// its inverse; each step backtracks by halving until the loss does not
/// increase. Throws SolveError if the loss becomes non-finite.
FilterFit fit_filter(const SurfaceField& input, const SurfaceField& target, const SpectralBasis& basis,
                     const FilterParams& init, int steps, double learning_rate);

/// sum_i exp(-lambda_i t) z_i(x)^2 per vertex, one channel per time.
/// With `normalize`, each channel is divided by sum_i exp(-lambda_i t).
SurfaceField heat_kernel_signature(const SpectralBasis& basis, std::span<const double> times, bool normalize = false);

/// `count` log-spaced times over [4 ln 10 / lambda_max, 4 ln 10 / lambda_1].
std::vector<double> default_hks_times(const SpectralBasis& basis, int count = 16);

/// Vertex coordinates projected onto the first `k_keep` basis vectors.
TriangleMesh smooth_coordinates(const TriangleMesh& mesh, const SpectralBasis& basis, Eigen::Index k_keep);

}  // namespace surfspec
