#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "point_grid.hpp"
#include "surfspec/correspondence.hpp"
#include "surfspec/error.hpp"

namespace surfspec {

PointMatrix RigidTransform::apply(const PointMatrix& P) const {
  PointMatrix out = P * R.transpose();
  out.rowwise() += t.transpose();
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.R = R.transpose();
  inv.t = -(inv.R * t);
  return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& first) const {
  RigidTransform out;
  out.R = R * first.R;
  out.t = R * first.t + t;
  return out;
}

double RigidTransform::rotation_angle_degrees() const {
  const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

Eigen::Matrix4d RigidTransform::homogeneous() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = R;
  m.topRightCorner<3, 1>() = t;
  return m;
}

RigidTransform kabsch(const PointMatrix& P, const PointMatrix& Q, const Eigen::VectorXd& weights) {
  const Eigen::Index m = P.rows();
  if (m != Q.rows()) {
    throw GeometryError("kabsch needs equal point counts (" + std::to_string(m) + " vs " + std::to_string(Q.rows()) + ")");
  }
  if (m < 3) throw GeometryError("kabsch needs at least 3 points, got " + std::to_string(m));
  Eigen::VectorXd w = weights.size() == 0 ? Eigen::VectorXd::Ones(m) : weights;
  if (w.size() != m) throw GeometryError("kabsch weight count does not match the points");
  if (!w.allFinite() || (w.array() < 0.0).any() || !(w.sum() > 0.0)) {
    throw GeometryError("kabsch weights must be finite, non-negative and not all zero");
  }
  if (!P.allFinite() || !Q.allFinite()) throw GeometryError("kabsch points contain non-finite values");
  w /= w.sum();

  const Vec3 pc = P.transpose() * w;
  const Vec3 qc = Q.transpose() * w;
  const PointMatrix P0 = P.rowwise() - pc.transpose();
  const PointMatrix Q0 = Q.rowwise() - qc.transpose();
  const Eigen::Matrix3d H = P0.transpose() * w.asDiagonal() * Q0;

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s[0] > 0.0) || s[1] <= 1e-12 * s[0]) {
    throw GeometryError("degenerate point configuration for kabsch (covariance rank < 2)");
  }
  const Eigen::Matrix3d& U = svd.matrixU();
  const Eigen::Matrix3d& V = svd.matrixV();
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  if ((V * U.transpose()).determinant() < 0.0) D(2, 2) = -1.0;

  RigidTransform out;
  out.R = V * D * U.transpose();
  out.t = qc - out.R * pc;
  return out;
}

double complex_rmsd(const PointMatrix& Z_star, const PointMatrix& Z) {
  if (Z_star.rows() != Z.rows()) {
    throw GeometryError("complex_rmsd needs equal point counts (" + std::to_string(Z_star.rows()) + " vs " +
                        std::to_string(Z.rows()) + ")");
  }
  const RigidTransform T = kabsch(Z, Z_star);
  const PointMatrix moved = T.apply(Z);
  return std::sqrt((moved - Z_star).squaredNorm() / static_cast<double>(Z.rows()));
}

std::vector<char> rmsd_interface_mask(const PointMatrix& Z_star, Eigen::Index n_first, double threshold) {
  if (n_first < 0 || n_first > Z_star.rows()) throw GeometryError("partition size out of range");
  if (!(threshold > 0.0)) throw ConfigError("interface threshold must be positive");
  std::vector<Vec3> first, second;
  for (Eigen::Index i = 0; i < Z_star.rows(); ++i) (i < n_first ? first : second).push_back(Z_star.row(i).transpose());
  const detail::PointGrid grid_first(first, threshold);
  const detail::PointGrid grid_second(second, threshold);
  std::vector<char> mask(static_cast<std::size_t>(Z_star.rows()), 0);
  for (Eigen::Index i = 0; i < Z_star.rows(); ++i) {
    const bool in_first = i < n_first;
    const detail::PointGrid& other = in_first ? grid_second : grid_first;
    bool hit = false;
    other.for_each_within(Z_star.row(i).transpose(), threshold, [&](int, double) { hit = true; });
    mask[static_cast<std::size_t>(i)] = hit ? 1 : 0;
  }
  return mask;
}

double interface_rmsd(const PointMatrix& Z_star, const PointMatrix& Z, Eigen::Index n_first, double threshold) {
  if (Z_star.rows() != Z.rows()) throw GeometryError("interface_rmsd needs equal point counts");
  const std::vector<char> mask = rmsd_interface_mask(Z_star, n_first, threshold);
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) keep.push_back(static_cast<Eigen::Index>(i));
  if (keep.size() < 3) {
    throw EmptyInterfaceError("only " + std::to_string(keep.size()) + " interface points within " +
                              std::to_string(threshold) + " A");
  }
  PointMatrix a(static_cast<Eigen::Index>(keep.size()), 3), b(static_cast<Eigen::Index>(keep.size()), 3);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    a.row(static_cast<Eigen::Index>(r)) = Z_star.row(keep[r]);
    b.row(static_cast<Eigen::Index>(r)) = Z.row(keep[r]);
  }
  return complex_rmsd(a, b);
}

}  // namespace surfspec
