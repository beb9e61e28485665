#include "surfspec/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "surfspec/error.hpp"

namespace surfspec {

SurfaceField SurfaceField::from_vector(const Eigen::VectorXd& v, std::string name, std::uint64_t mesh_hash) {
  SurfaceField f;
  f.values = v;
  f.names = {std::move(name)};
  f.mesh_hash = mesh_hash;
  return f;
}

void SurfaceField::validate() const {
  if (static_cast<Eigen::Index>(names.size()) != values.cols()) {
    throw GeometryError("field has " + std::to_string(values.cols()) + " channels but " +
                        std::to_string(names.size()) + " names");
  }
  if (!values.allFinite()) throw GeometryError("field contains non-finite values");
}

double FilterParams::response(double lambda) const {
  const double heat = std::exp(-lambda * t);
  if (heat_only) return heat;
  const double d = lambda - mu;
  return std::exp(-(d * d) / (sigma * sigma)) * heat;
}

void FilterParams::validate() const {
  if (!std::isfinite(t) || t < 0.0) throw GeometryError("filter time t must be finite and >= 0");
  if (heat_only) return;
  if (!std::isfinite(mu)) throw GeometryError("filter mu must be finite");
  if (!std::isfinite(sigma) || !(sigma > 0.0)) throw GeometryError("filter sigma must be finite and > 0");
}

namespace {

void require_match(const SurfaceField& field, const SpectralBasis& basis) {
  if (field.mesh_hash != basis.mesh_hash()) throw GeometryError("field and basis belong to different meshes");
  if (field.vertex_count() != basis.vertex_count()) throw GeometryError("field and basis vertex counts differ");
}

std::vector<std::string> default_names(Eigen::Index n) {
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < n; ++c) names.push_back("c" + std::to_string(c));
  return names;
}

const FilterParams& params_for(std::span<const FilterParams> params, Eigen::Index channel) {
  return params.size() == 1 ? params[0] : params[static_cast<std::size_t>(channel)];
}

void check_params(std::span<const FilterParams> params, Eigen::Index channels) {
  if (params.size() != 1 && static_cast<Eigen::Index>(params.size()) != channels) {
    throw GeometryError("expected one filter per channel (" + std::to_string(channels) + "), got " +
                        std::to_string(params.size()));
  }
  for (const FilterParams& p : params) p.validate();
}

}  // namespace

SpectralCoeffs to_spectral(const SurfaceField& field, const SpectralBasis& basis) {
  require_match(field, basis);
  const Eigen::MatrixXd Bf = basis.mass().matrix() * field.values;
  return SpectralCoeffs{basis.vectors().transpose() * Bf, basis.mesh_hash()};
}

SurfaceField from_spectral(const SpectralCoeffs& coeffs, const SpectralBasis& basis, std::vector<std::string> names) {
  if (coeffs.coeffs.rows() != basis.size()) {
    throw GeometryError("coefficient rows (" + std::to_string(coeffs.coeffs.rows()) + ") differ from basis size (" +
                        std::to_string(basis.size()) + ")");
  }
  SurfaceField out;
  out.values = basis.vectors() * coeffs.coeffs;
  out.names = names.empty() ? default_names(out.values.cols()) : std::move(names);
  out.mesh_hash = basis.mesh_hash();
  return out;
}

SurfaceField project(const SurfaceField& field, const SpectralBasis& basis) {
  return from_spectral(to_spectral(field, basis), basis, field.names);
}

Eigen::VectorXd weighted_mean(const SurfaceField& field, const SparseSymMatrix& mass) {
  const Eigen::VectorXd w = mass.matrix() * Eigen::VectorXd::Ones(mass.dimension());
  return (field.values.transpose() * w) / w.sum();
}

SurfaceField apply_filter(const SurfaceField& field, const SpectralBasis& basis, std::span<const FilterParams> params) {
  check_params(params, field.channels());
  SpectralCoeffs c = to_spectral(field, basis);
  const Eigen::VectorXd& lambda = basis.eigenvalues();
  for (Eigen::Index ch = 0; ch < c.coeffs.cols(); ++ch) {
    const FilterParams& p = params_for(params, ch);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) c.coeffs(i, ch) *= p.response(lambda[i]);
  }
  return from_spectral(c, basis, field.names);
}

SurfaceField heat_diffuse(const SurfaceField& field, const SpectralBasis& basis, double t) {
  const FilterParams p = FilterParams::heat(t);
  return apply_filter(field, basis, std::span<const FilterParams>(&p, 1));
}

FilterGradients filter_gradients(const SurfaceField& field, const SpectralBasis& basis,
                                 std::span<const FilterParams> params) {
  check_params(params, field.channels());
  const SpectralCoeffs c = to_spectral(field, basis);
  const Eigen::VectorXd& lambda = basis.eigenvalues();
  SpectralCoeffs dmu{Eigen::MatrixXd::Zero(c.coeffs.rows(), c.coeffs.cols()), c.mesh_hash};
  SpectralCoeffs dsigma = dmu;
  SpectralCoeffs dt = dmu;
  for (Eigen::Index ch = 0; ch < c.coeffs.cols(); ++ch) {
    const FilterParams& p = params_for(params, ch);
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const double F = p.response(lambda[i]) * c.coeffs(i, ch);
      const double d = lambda[i] - p.mu;
      if (!p.heat_only) {
        dmu.coeffs(i, ch) = F * 2.0 * d / (p.sigma * p.sigma);
        dsigma.coeffs(i, ch) = F * 2.0 * d * d / (p.sigma * p.sigma * p.sigma);
      }
      dt.coeffs(i, ch) = -lambda[i] * F;
    }
  }
  return FilterGradients{from_spectral(dmu, basis, field.names), from_spectral(dsigma, basis, field.names),
                         from_spectral(dt, basis, field.names)};
}

namespace {

double b_norm2(const Eigen::VectorXd& v, const SparseSymMatrix& B) { return v.dot(B.matrix() * v); }

}  // namespace

FilterFit fit_filter(const SurfaceField& input, const SurfaceField& target, const SpectralBasis& basis,
                     const FilterParams& init, int steps, double learning_rate) {
  if (input.channels() != 1 || target.channels() != 1) throw GeometryError("fit_filter works on a single channel");
  if (steps < 1) throw GeometryError("fit_filter needs at least one step");
  if (!(learning_rate > 0.0)) throw GeometryError("learning rate must be positive");
  require_match(target, basis);
  init.validate();

  const SparseSymMatrix& B = basis.mass();
  const double scale = std::max(basis.eigenvalues()[basis.size() - 1], 1e-300);

  auto loss_of = [&](const FilterParams& p) {
    const SurfaceField out = apply_filter(input, basis, std::span<const FilterParams>(&p, 1));
    const Eigen::VectorXd r = out.values.col(0) - target.values.col(0);
    return 0.5 * b_norm2(r, B);
  };

  FilterFit fit;
  fit.params = init;
  double loss = loss_of(init);
  if (!std::isfinite(loss)) throw SolveError("filter fit loss is not finite");
  fit.loss.push_back(loss);
  double step = learning_rate;

  for (int s = 0; s < steps; ++s) {
    const FilterParams& p = fit.params;
    const SurfaceField out = apply_filter(input, basis, std::span<const FilterParams>(&p, 1));
    const Eigen::VectorXd residual = out.values.col(0) - target.values.col(0);
    const Eigen::VectorXd Br = B.matrix() * residual;
    const FilterGradients g = filter_gradients(input, basis, std::span<const FilterParams>(&p, 1));
    // Gradient in scaled coordinates (mu / scale, sigma / scale, t * scale).
    const Eigen::Vector3d grad(Br.dot(g.d_mu.values.col(0)) * scale, Br.dot(g.d_sigma.values.col(0)) * scale,
                               Br.dot(g.d_t.values.col(0)) / scale);
    if (!grad.allFinite()) throw SolveError("filter fit gradient is not finite");
    if (grad.squaredNorm() == 0.0) {
      fit.loss.push_back(loss);
      continue;
    }

    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      FilterParams trial = p;
      trial.t = std::max(0.0, p.t - step * grad[2] / scale);
      if (!p.heat_only) {
        trial.mu = p.mu - step * grad[0] * scale;
        trial.sigma = p.sigma - step * grad[1] * scale;
        if (!(trial.sigma > 0.0)) continue;
      }
      const double trial_loss = loss_of(trial);
      if (!std::isfinite(trial_loss)) throw SolveError("filter fit diverged (non-finite loss)");
      if (trial_loss <= loss) {
        fit.params = trial;
        loss = trial_loss;
        accepted = true;
        ++fit.accepted_steps;
        break;
      }
    }
    fit.loss.push_back(loss);
    if (!accepted) break;
    step *= 2.0;
  }
  return fit;
}

SurfaceField heat_kernel_signature(const SpectralBasis& basis, std::span<const double> times, bool normalize) {
  const Eigen::MatrixXd sq = basis.vectors().array().square().matrix();
  const Eigen::VectorXd& lambda = basis.eigenvalues();
  SurfaceField out;
  out.values.resize(basis.vertex_count(), static_cast<Eigen::Index>(times.size()));
  out.mesh_hash = basis.mesh_hash();
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    if (!(t > 0.0) || !std::isfinite(t)) throw GeometryError("HKS times must be positive and finite");
    if (j > 0 && !(t > times[j - 1])) throw GeometryError("HKS times must be strictly ascending");
    const Eigen::VectorXd w = (-lambda.array() * t).exp().matrix();
    out.values.col(static_cast<Eigen::Index>(j)) = sq * w;
    if (normalize) out.values.col(static_cast<Eigen::Index>(j)) /= w.sum();
    char name[48];
    std::snprintf(name, sizeof(name), "hks_t%.6g", t);
    out.names.emplace_back(name);
  }
  return out;
}

std::vector<double> default_hks_times(const SpectralBasis& basis, int count) {
  const Eigen::Index k = basis.size();
  if (k < 2) throw GeometryError("HKS time grid needs at least two eigenpairs");
  if (count < 1) throw GeometryError("HKS time count must be positive");
  const double lambda1 = basis.eigenvalues()[1];
  const double lambda_max = basis.eigenvalues()[k - 1];
  if (!(lambda1 > 0.0)) throw GeometryError("first nonzero eigenvalue is not positive");
  const double lo = std::log(4.0 * std::log(10.0) / lambda_max);
  const double hi = std::log(4.0 * std::log(10.0) / lambda1);
  std::vector<double> times;
  for (int j = 0; j < count; ++j) {
    const double a = count == 1 ? 0.0 : static_cast<double>(j) / (count - 1);
    times.push_back(std::exp(lo + a * (hi - lo)));
  }
  return times;
}

TriangleMesh smooth_coordinates(const TriangleMesh& mesh, const SpectralBasis& basis, Eigen::Index k_keep) {
  if (static_cast<Eigen::Index>(mesh.vertex_count()) != basis.vertex_count() || mesh.hash() != basis.mesh_hash()) {
    throw GeometryError("basis was not computed on this mesh");
  }
  if (k_keep < 1 || k_keep > basis.size()) {
    throw GeometryError("k_keep must be in [1, " + std::to_string(basis.size()) + "]");
  }
  const auto Z = basis.vectors().leftCols(k_keep);
  const Eigen::MatrixXd BX = basis.mass().matrix() * Eigen::MatrixXd(mesh.vertex_matrix());
  const Eigen::MatrixXd X = Z * (Z.transpose() * BX);
  std::vector<Vec3> verts(mesh.vertex_count());
  for (Eigen::Index i = 0; i < X.rows(); ++i) verts[i] = X.row(i).transpose();
  return mesh.with_vertices(std::move(verts));
}

}  // namespace surfspec
