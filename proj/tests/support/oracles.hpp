#pragma once

// Independent reference computations used by the test suites. Nothing here
// calls into the routine it is meant to check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "surfspec/fixtures.hpp"
#include "surfspec/mesh.hpp"

namespace oracle {

using surfspec::Face;
using surfspec::TriangleMesh;
using surfspec::Vec3;
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

inline constexpr double kPi = 3.14159265358979323846;

/// Copy of `m` whose vertex i is the original vertex perm[i].
inline TriangleMesh permuted(const TriangleMesh& m, const std::vector<int>& perm) {
  const int n = static_cast<int>(m.vertex_count());
  std::vector<int> inv(n);
  for (int i = 0; i < n; ++i) inv[perm[i]] = i;
  std::vector<Vec3> v(n);
  for (int i = 0; i < n; ++i) v[i] = m.vertices()[perm[i]];
  std::vector<Face> f;
  for (const Face& t : m.faces()) f.push_back({inv[t[0]], inv[t[1]], inv[t[2]]});
  return TriangleMesh(v, f);
}

inline std::vector<int> random_permutation(int n, std::uint64_t seed) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  surfspec::FixtureRng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform() * (i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

/// Rotation about a random axis, angle uniform in [0, max_deg] degrees.
inline Eigen::Matrix3d random_rotation(surfspec::FixtureRng& rng, double max_deg = 180.0) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  return Eigen::AngleAxisd(rng.uniform(0.0, max_deg) * kPi / 180.0, axis).toRotationMatrix();
}

/// Horn's closed-form absolute orientation: the optimal rotation is the
/// eigenvector of the 4x4 quaternion matrix with the largest eigenvalue.
/// Returns (R, t) minimizing sum w |R p + t - q|^2.
inline std::pair<Eigen::Matrix3d, Vec3> horn(const Points& P, const Points& Q, Eigen::VectorXd w = {}) {
  if (w.size() == 0) w = Eigen::VectorXd::Ones(P.rows());
  const double W = w.sum();
  Vec3 cp = Vec3::Zero(), cq = Vec3::Zero();
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    cp += w[i] * P.row(i).transpose();
    cq += w[i] * Q.row(i).transpose();
  }
  cp /= W;
  cq /= W;
  Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    S += w[i] * (P.row(i).transpose() - cp) * (Q.row(i).transpose() - cq).transpose();
  }
  const double xx = S(0, 0), xy = S(0, 1), xz = S(0, 2);
  const double yx = S(1, 0), yy = S(1, 1), yz = S(1, 2);
  const double zx = S(2, 0), zy = S(2, 1), zz = S(2, 2);
  Eigen::Matrix4d N;
  N << xx + yy + zz, yz - zy, zx - xz, xy - yx,
       yz - zy, xx - yy - zz, xy + yx, zx + xz,
       zx - xz, xy + yx, -xx + yy - zz, yz + zy,
       xy - yx, zx + xz, yz + zy, -xx - yy + zz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(N);
  const Eigen::Vector4d q = es.eigenvectors().col(3);
  const Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
  const Eigen::Matrix3d R = quat.normalized().toRotationMatrix();
  return {R, cq - R * cp};
}

/// RMSD of Z onto Z_star after Horn superposition, written out term by term.
inline double superposed_rmsd(const Points& Z_star, const Points& Z) {
  const auto [R, t] = horn(Z, Z_star);
  double s = 0.0;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    s += (R * Z.row(i).transpose() + t - Z_star.row(i).transpose()).squaredNorm();
  }
  return std::sqrt(s / static_cast<double>(Z.rows()));
}

/// Smooth, asymmetric height used by the two-patch docking fixture.
inline double patch_height(double x, double y) {
  return 1.2 * std::exp(-((x - 3) * (x - 3) + (y - 6) * (y - 6)) / 6.0) -
         0.8 * std::exp(-((x - 7) * (x - 7) + (y - 3) * (y - 3)) / 4.0) + 0.3 * std::sin(0.5 * x + 0.2 * y);
}

/// Equilateral triangle with unit edges in the z = 0 plane.
inline TriangleMesh unit_triangle() {
  return TriangleMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, std::sqrt(3.0) / 2.0, 0)}, {Face{0, 1, 2}});
}

}  // namespace oracle
