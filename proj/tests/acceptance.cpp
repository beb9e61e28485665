// Acceptance gate: runs the twelve acceptance criteria and prints one
// PASS/FAIL line for each. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/cli.hpp"
#include "support/oracles.hpp"
#include "surfspec/correspondence.hpp"
#include "surfspec/features.hpp"
#include "surfspec/fixtures.hpp"
#include "surfspec/geometry.hpp"
#include "surfspec/harmonics.hpp"
#include "surfspec/io.hpp"
#include "surfspec/mesh_io.hpp"
#include "surfspec/spectral.hpp"

namespace fs = std::filesystem;
using namespace surfspec;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects failed checks and a short summary of the measured values.
class Verdict {
public:
  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    if (ok) return;
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, ap);
    va_end(ap);
    failures_.push_back(buf);
  }
  void note(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, ap);
    va_end(ap);
    if (!notes_.empty()) notes_ += "; ";
    notes_ += buf;
  }
  bool passed() const { return failures_.empty(); }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::string& notes() const { return notes_; }

private:
  std::vector<std::string> failures_;
  std::string notes_;
};

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

SurfaceField random_field(const SpectralBasis& b, int channels, FixtureRng& rng) {
  SurfaceField f;
  f.values.resize(b.vertex_count(), channels);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values.data()[i] = rng.normal();
  for (int c = 0; c < channels; ++c) f.names.push_back("c" + std::to_string(c));
  f.mesh_hash = b.mesh_hash();
  return f;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary);
  o << text;
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "surfspec");
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "  [cli exit %d] %s", code, e.str().c_str());
  return code;
}

struct TempDir {
  fs::path path;
  TempDir() {
    FixtureRng rng(static_cast<std::uint64_t>(Clock::now().time_since_epoch().count()));
    path = fs::temp_directory_path() / ("surfspec_acceptance_" + std::to_string(rng.next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::vector<TriangleMesh> closed_fixtures() {
  return {icosphere(0, 1.0),
          icosphere(2, 1.0),
          icosphere(3, 2.5),
          icosphere(4, 1.0),
          bumpy_sphere(3, 1.0, 0.2, 2),
          bumpy_sphere(3, 10.0, 1.5, 3),
          jittered_sphere(2, 1.0, 0.1, 9),
          regular_tetrahedron(2.0)};
}

std::vector<TriangleMesh> all_fixtures() {
  std::vector<TriangleMesh> f = closed_fixtures();
  f.push_back(grid_patch(20, 10.0, 0.0, oracle::patch_height));
  f.push_back(grid_patch(6, 5.0, 2.0));
  return f;
}

// 1
void sphere_spectrum(Verdict& v) {
  const auto t0 = Clock::now();
  const SpectralBasis b = compute_basis(icosphere(4, 1.0), SpectrumRequest::count(21));
  const double elapsed = seconds_since(t0);
  v.check(std::abs(b.eigenvalues()[0]) < 1e-10, "lambda_0 = %.3g", b.eigenvalues()[0]);
  // Multiplicities: 3, 5, 7 for l = 1, 2, 3, then the first 5 of l = 4.
  double worst = 0.0;
  Eigen::Index i = 1;
  for (int l = 1; i <= 20; ++l) {
    const double exact = l * (l + 1);
    for (int m = 0; m < 2 * l + 1 && i <= 20; ++m, ++i) {
      const double err = std::abs(b.eigenvalues()[i] - exact) / exact;
      worst = std::max(worst, err);
      v.check(err < 0.05, "lambda_%d = %.6g, expected %.0g", static_cast<int>(i), b.eigenvalues()[i], exact);
    }
    // The cluster must end here: the next eigenvalue belongs to l + 1.
    if (i <= 20) {
      v.check(b.eigenvalues()[i] > exact * 1.2, "cluster l=%d has extra members", l);
    }
  }
  v.check(elapsed < 30.0, "took %.2f s", elapsed);
  v.note("max relative error %.3g%%, %.2f s", 100 * worst, elapsed);
}

// 2
void weyl_law(Verdict& v) {
  const TriangleMesh m1 = icosphere(4, 1.0);
  const TriangleMesh m2 = icosphere(4, 2.0);
  const WeylFit w1 = weyl_slope(compute_basis(m1, SpectrumRequest::count(60)), surface_area(m1));
  const WeylFit w2 = weyl_slope(compute_basis(m2, SpectrumRequest::count(60)), surface_area(m2));
  const double ratio = w1.slope / w2.slope;
  v.check(std::abs(ratio - 4.0) <= 0.15 * 4.0, "slope ratio %.4f", ratio);
  v.note("slopes %.4f and %.4f, ratio %.4f", w1.slope, w2.slope, ratio);
}

// 3
void fem_identities(Verdict& v) {
  double worst_area = 0.0, worst_gram = 0.0, worst_res = 0.0, worst_rowsum = 0.0;
  int n = 0;
  for (const TriangleMesh& m : all_fixtures()) {
    ++n;
    const SparseSymMatrix L = assemble_stiffness(m);
    const SparseSymMatrix B = assemble_mass(m);
    // Row sums in storage order: off-diagonals first, then the diagonal.
    const Eigen::SparseMatrix<double>& Ls = L.matrix();
    for (int c = 0; c < Ls.outerSize(); ++c) {
      double off = 0.0, diag = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(Ls, c); it; ++it) {
        if (it.row() == c) {
          diag = it.value();
        } else {
          off += it.value();
        }
      }
      v.check(off + diag == 0.0, "fixture %d: row %d sums to %.3g", n, c, off + diag);
    }
    const Eigen::VectorXd rows = Ls * Eigen::VectorXd::Ones(L.dimension());
    worst_rowsum = std::max(worst_rowsum, rows.cwiseAbs().maxCoeff() / Ls.diagonal().maxCoeff());
    const double area = surface_area(m);
    const double area_err = std::abs(B.total() - area) / area;
    worst_area = std::max(worst_area, area_err);
    v.check(area_err <= 1e-12, "fixture %d: mass total off by %.3g relative", n, area_err);

    const int k = std::min<int>(20, static_cast<int>(m.vertex_count()));
    const SpectralBasis b = compute_basis(m, SpectrumRequest::count(k));
    const Eigen::MatrixXd& Z = b.vectors();
    const double gram = (Z.transpose() * (B.matrix() * Z) - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
    worst_gram = std::max(worst_gram, gram);
    v.check(gram <= 1e-8, "fixture %d: Z'BZ - I = %.3g", n, gram);
    const double lmax = b.eigenvalues()[k - 1];
    for (int i = 0; i < k; ++i) {
      const Eigen::VectorXd z = Z.col(i);
      const Eigen::VectorXd Bz = B.matrix() * z;
      const double r = (Ls * z - b.eigenvalues()[i] * Bz).norm() / Bz.norm() / lmax;
      worst_res = std::max(worst_res, r);
      v.check(r <= 1e-8, "fixture %d: pair %d residual %.3g relative to lambda_max", n, i, r);
    }
  }
  v.note("%d fixtures; row sums exact (mat-vec %.2g); area %.2g; Z'BZ %.2g; residual %.2g", n, worst_rowsum,
         worst_area, worst_gram, worst_res);
}

// 4
void roundtrip_parseval(Verdict& v) {
  const SpectralBasis b = compute_basis(bumpy_sphere(3, 1.0, 0.25, 6), SpectrumRequest::count(40));
  FixtureRng rng(1);
  const SurfaceField f = random_field(b, 3, rng);
  const SurfaceField p1 = project(f, b);
  const double idem = rel_diff(p1.values, project(p1, b).values);
  v.check(idem <= 1e-10, "idempotence %.3g", idem);

  double parseval = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    SpectralCoeffs c;
    c.coeffs = Eigen::MatrixXd::Zero(b.size(), 1);
    for (Eigen::Index i = 0; i < b.size(); ++i) c.coeffs(i, 0) = rng.normal();
    c.mesh_hash = b.mesh_hash();
    const Eigen::VectorXd x = from_spectral(c, b).values.col(0);
    const double e = std::abs(x.dot(b.mass().matrix() * x) - c.coeffs.squaredNorm()) / c.coeffs.squaredNorm();
    parseval = std::max(parseval, e);
  }
  v.check(parseval <= 1e-9, "Parseval %.3g", parseval);

  const SurfaceField twice = heat_diffuse(heat_diffuse(f, b, 0.03), b, 0.05);
  const SurfaceField once = heat_diffuse(f, b, 0.08);
  const double semi = (twice.values - once.values).cwiseAbs().maxCoeff();
  v.check(semi <= 1e-9, "semigroup %.3g", semi);

  const Eigen::VectorXd m0 = weighted_mean(f, b.mass());
  double mean = 0.0;
  for (double t : {0.001, 0.01, 0.1, 1.0, 10.0}) {
    mean = std::max(mean, (weighted_mean(heat_diffuse(f, b, t), b.mass()) - m0).cwiseAbs().maxCoeff());
  }
  v.check(mean <= 1e-10, "mean drift %.3g", mean);
  v.note("idempotence %.2g, Parseval %.2g, semigroup %.2g, mean drift %.2g", idem, parseval, semi, mean);
}

// 5
void filter_gradients_and_fit(Verdict& v) {
  const SpectralBasis b = compute_basis(bumpy_sphere(3, 1.0, 0.25, 6), SpectrumRequest::count(40));
  const double lmax = b.eigenvalues()[b.size() - 1];
  FixtureRng rng(6);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const SurfaceField f = random_field(b, 1, rng);
    // t stays away from 0 so the central difference does not cross t < 0.
    const FilterParams p{rng.uniform(0.0, lmax), rng.uniform(0.2, 1.0) * lmax, rng.uniform(0.05, 2.0) / lmax, false};
    const FilterGradients g = filter_gradients(f, b, std::span<const FilterParams>(&p, 1));
    const SurfaceField* analytic[3] = {&g.d_mu, &g.d_sigma, &g.d_t};
    for (int which = 0; which < 3; ++which) {
      const double h = 1e-5 * (which == 2 ? 1.0 / lmax : lmax);
      FilterParams lo = p, hi = p;
      double* lo_v[3] = {&lo.mu, &lo.sigma, &lo.t};
      double* hi_v[3] = {&hi.mu, &hi.sigma, &hi.t};
      *lo_v[which] -= h;
      *hi_v[which] += h;
      const Eigen::VectorXd fd = (apply_filter(f, b, std::span<const FilterParams>(&hi, 1)).values -
                                  apply_filter(f, b, std::span<const FilterParams>(&lo, 1)).values) /
                                 (2 * h);
      const Eigen::VectorXd an = analytic[which]->values.col(0);
      const double rel = (fd - an).norm() / std::max(an.norm(), 1e-8 * f.values.norm());
      worst = std::max(worst, rel);
      v.check(rel < 1e-4, "draw %d, parameter %d: relative error %.3g", draw, which, rel);
    }
  }

  // The planted filter is placed in units of the spectrum so that every
  // mode carries weight; in absolute units (0.5, 0.2, 1.0) only the constant
  // mode survives and the parameters are not identifiable.
  FixtureRng frng(12);
  const SurfaceField f = random_field(b, 1, frng);
  const FilterParams truth{0.5 * lmax, 0.2 * lmax, 1.0 / lmax, false};
  const SurfaceField target = apply_filter(f, b, std::span<const FilterParams>(&truth, 1));
  const FilterFit fit =
      fit_filter(f, target, b, FilterParams{0.4 * lmax, 0.3 * lmax, 0.5 / lmax, false}, 3000, 0.5);
  v.check(fit.loss.back() < 1e-6, "fit loss %.3g", fit.loss.back());
  const double param_err = std::max({std::abs(fit.params.mu - truth.mu) / lmax, std::abs(fit.params.sigma - truth.sigma) / lmax,
                                     std::abs(fit.params.t - truth.t) * lmax});
  v.check(param_err < 1e-3, "parameters off by %.3g in spectrum units", param_err);
  v.note("300 gradients, worst relative error %.2g; fit loss %.2g -> %.2g, recovered (%.4f, %.4f, %.4f) vs planted "
         "(0.5, 0.2, 1.0) in spectrum units",
         worst, fit.loss.front(), fit.loss.back(), fit.params.mu / lmax, fit.params.sigma / lmax,
         fit.params.t * lmax);
}

// 6
void invariance(Verdict& v) {
  const TriangleMesh m = bumpy_sphere(3, 8.0, 0.8, 21);
  FixtureRng rng(33);
  std::vector<Vec3> pos;
  std::vector<std::string> el;
  const char* kinds[] = {"C", "N", "O", "S"};
  for (int i = 0; i < 200; ++i) {
    pos.push_back(Vec3(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)));
    el.push_back(kinds[i % 4]);
  }
  AtomSet atoms;
  atoms.positions = pos;
  atoms.elements = el;
  atoms.residue_names.assign(pos.size(), "GLY");
  const AtomDescriptorTable table = AtomDescriptorTable::default_elements();

  const SpectralBasis b0 = compute_basis(m, SpectrumRequest::count(20));
  const std::vector<double> times = default_hks_times(b0, 8);
  const SurfaceField h0 = heat_kernel_signature(b0, times);
  const CurvatureField c0 = compute_curvature(m);
  const AtomFeatures a0 = project_atom_features(atoms, m, table);
  const auto nonzero = [](const Eigen::VectorXd& l) { return l.tail(l.size() - 1); };

  double w_eig = 0.0, w_hks = 0.0, w_k = 0.0, w_h = 0.0, w_feat = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    const Vec3 t(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20));
    const TriangleMesh moved = m.transformed(R, t);
    const SpectralBasis b = compute_basis(moved, SpectrumRequest::count(20));
    w_eig = std::max(w_eig, rel_diff(nonzero(b0.eigenvalues()), nonzero(b.eigenvalues())));
    w_hks = std::max(w_hks, rel_diff(h0.values, heat_kernel_signature(b, times).values));
    const CurvatureField c = compute_curvature(moved);
    w_k = std::max(w_k, rel_diff(c0.gaussian, c.gaussian));
    w_h = std::max(w_h, rel_diff(c0.mean, c.mean));
    w_feat = std::max(w_feat, rel_diff(a0.field.values, project_atom_features(atoms.transformed(R, t), moved, table).field.values));
  }
  v.check(w_eig <= 1e-6, "eigenvalues %.3g", w_eig);
  v.check(w_hks <= 1e-6, "HKS %.3g", w_hks);
  v.check(w_k <= 1e-6, "Gaussian curvature %.3g", w_k);
  v.check(w_h <= 1e-6, "mean curvature %.3g", w_h);
  v.check(w_feat <= 1e-6, "projected features %.3g", w_feat);

  Eigen::Matrix3d mirror = Eigen::Matrix3d::Identity();
  mirror(0, 0) = -1.0;
  const SpectralBasis bm = compute_basis(m.transformed(mirror, Vec3(1, 2, 3)), SpectrumRequest::count(20));
  const double w_mirror = rel_diff(nonzero(b0.eigenvalues()), nonzero(bm.eigenvalues()));
  v.check(w_mirror <= 1e-6, "mirrored spectrum %.3g", w_mirror);
  v.note("20 motions: eig %.2g, HKS %.2g, K %.2g, H %.2g, features %.2g; mirror %.2g", w_eig, w_hks, w_k, w_h,
         w_feat, w_mirror);
}

// 7
void gauss_bonnet(Verdict& v) {
  double worst = 0.0;
  for (const TriangleMesh& m : closed_fixtures()) {
    const double e = std::abs(angle_defects(m).sum() - 4 * oracle::kPi);
    worst = std::max(worst, e);
    v.check(e <= 1e-9, "defect sum off by %.3g", e);
  }
  double wk = 0.0, wh = 0.0;
  for (double r : {1.0, 2.0, 5.0}) {
    const TriangleMesh m = icosphere(3, r);
    const Eigen::VectorXd K = gaussian_curvature(m);
    const Eigen::VectorXd H = mean_curvature(m).values;
    wk = std::max(wk, ((K.array() - 1 / (r * r)).abs() * (r * r)).maxCoeff());
    wh = std::max(wh, ((H.array() - 1 / r).abs() * r).maxCoeff());
  }
  v.check(wk < 0.10, "K relative error %.3g", wk);
  v.check(wh < 0.10, "H relative error %.3g", wh);
  v.note("defect error %.2g; K %.2g%%, H %.2g%%", worst, 100 * wk, 100 * wh);
}

// 8
void functional_maps(Verdict& v) {
  const TriangleMesh m = bumpy_sphere(2, 1.0, 0.15, 7);
  const SpectralBasis a = compute_basis(m, SpectrumRequest::count(30));
  const std::vector<double> times = default_hks_times(a, 48);
  const SurfaceField ha = heat_kernel_signature(a, times);
  // Identity pair: the same basis and the same coefficients of 60 generic
  // fields on both sides.
  FixtureRng rng(5);
  const Eigen::MatrixXd coeffs = to_spectral(random_field(a, 60, rng), a).coeffs;
  const FunctionalMap id = solve_fmap(coeffs, coeffs, a.eigenvalues(), a.eigenvalues());
  const double id_err = (id.C - Eigen::MatrixXd::Identity(30, 30)).norm();
  v.check(id_err < 1e-6, "||C - I||_F = %.3g", id_err);

  const auto t0 = Clock::now();
  const std::vector<int> perm = oracle::random_permutation(static_cast<int>(m.vertex_count()), 21);
  const TriangleMesh p = oracle::permuted(m, perm);
  const SpectralBasis b = compute_basis(p, SpectrumRequest::count(30));
  const FunctionalMap fm = fmap_from_fields(ha, a, heat_kernel_signature(b, times), b);
  const VertexCorrespondence c = fmap_to_p2p(fm, a, b);
  const double elapsed = seconds_since(t0);
  int right = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) right += c.source_of_target[i] == perm[i] ? 1 : 0;
  v.check(m.vertex_count() == 162, "fixture has %zu vertices", m.vertex_count());
  v.check(right == static_cast<int>(perm.size()), "%d of %zu vertices recovered", right, perm.size());
  v.check(elapsed < 10.0, "took %.2f s", elapsed);
  v.note("identity %.2g; permutation %d/%zu in %.2f s", id_err, right, perm.size(), elapsed);
}

// 9
void kabsch_and_metrics(Verdict& v) {
  FixtureRng rng(9);
  double w_R = 0.0, w_t = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    PointMatrix P(25, 3);
    for (int i = 0; i < 25; ++i) P.row(i) << rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5);
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    const Vec3 t(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10));
    const PointMatrix Q = (P * R.transpose()).rowwise() + t.transpose();
    const RigidTransform T = kabsch(P, Q);
    w_R = std::max(w_R, (T.R - R).cwiseAbs().maxCoeff());
    w_t = std::max(w_t, (T.t - t).norm());
  }
  v.check(w_R <= 1e-9 && w_t <= 1e-9, "planted transform error R %.3g, t %.3g", w_R, w_t);

  // Two facing patches as a complex: receptor rows first.
  const TriangleMesh rec = grid_patch(8, 6.0, 0.0, oracle::patch_height);
  const TriangleMesh lig = grid_patch(8, 6.0, 3.0, oracle::patch_height);
  const auto nr = static_cast<Eigen::Index>(rec.vertex_count());
  PointMatrix Z(nr + static_cast<Eigen::Index>(lig.vertex_count()), 3);
  Z << to_points(rec.vertices()), to_points(lig.vertices());
  const double c0 = complex_rmsd(Z, Z);
  const double i0 = interface_rmsd(Z, Z, nr);
  v.check(c0 <= 1e-12 && i0 <= 1e-12, "identical complexes: %.3g, %.3g", c0, i0);

  PointMatrix moved = Z;
  moved.row(nr + 10) += Vec3(0.0, 0.0, 0.7).transpose();
  const double c1 = complex_rmsd(Z, moved);
  const double c1_ref = oracle::superposed_rmsd(Z, moved);
  v.check(std::abs(c1 - c1_ref) <= 1e-10, "complex rmsd %.15g vs %.15g", c1, c1_ref);

  // Interface rows by direct distance scan on Z.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    bool near = false;
    for (Eigen::Index j = 0; j < Z.rows() && !near; ++j) {
      if ((i < nr) != (j < nr)) near = (Z.row(i) - Z.row(j)).norm() <= kDefaultRmsdInterfaceThreshold;
    }
    if (near) keep.push_back(i);
  }
  PointMatrix Zi(static_cast<Eigen::Index>(keep.size()), 3), Mi(static_cast<Eigen::Index>(keep.size()), 3);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    Zi.row(static_cast<Eigen::Index>(r)) = Z.row(keep[r]);
    Mi.row(static_cast<Eigen::Index>(r)) = moved.row(keep[r]);
  }
  const double i1 = interface_rmsd(Z, moved, nr);
  const double i1_ref = oracle::superposed_rmsd(Zi, Mi);
  v.check(std::abs(i1 - i1_ref) <= 1e-10, "interface rmsd %.15g vs %.15g", i1, i1_ref);
  v.note("R %.2g, t %.2g; identical %.2g/%.2g; displaced %.2g/%.2g off the oracle", w_R, w_t, c0, i0,
         std::abs(c1 - c1_ref), std::abs(i1 - i1_ref));
}

// 10
void self_docking(Verdict& v) {
  TempDir tmp;
  const std::vector<std::string> sphere = {"--subdivisions", "4", "--radius", "10", "--amplitude", "1.5", "--seed", "3"};
  std::vector<std::string> rec_args = {"fixture", "bumpy"};
  rec_args.insert(rec_args.end(), sphere.begin(), sphere.end());
  std::vector<std::string> lig_args = rec_args;
  rec_args.insert(rec_args.end(), {"-o", tmp / "rec.off"});
  lig_args.insert(lig_args.end(), {"--rotate", "0.3", "1", "0.2", "40", "--translate", "5", "-3", "2", "-o", tmp / "lig.off"});
  if (run_cli(rec_args) != 0 || run_cli(lig_args) != 0) {
    v.check(false, "fixture generation failed");
    return;
  }
  const auto t0 = Clock::now();
  const int code = run_cli({"dock", "--ligand", tmp / "lig.off", "--receptor", tmp / "rec.off", "--truth",
                            tmp / "rec.off", "--full-interface", "-o", tmp / "dock"});
  const double elapsed = seconds_since(t0);
  v.check(code == 0, "dock exited with %d", code);
  if (code != 0) return;
  const json j = json::parse(slurp(tmp.path / "dock" / "report.json"));
  const double rmsd = j["metrics"]["complex_rmsd"].get<double>();
  v.check(rmsd < 0.5, "complex rmsd %.4g", rmsd);
  double worst = 1.0;
  int channels = 0;
  for (const auto& [name, r] : j["dock"]["correlations"].items()) {
    ++channels;
    const double c = r.is_number() ? r.get<double>() : -1.0;
    worst = std::min(worst, c);
    v.check(c > 0.99, "channel %s correlation %.6f", name.c_str(), c);
  }
  v.check(channels > 0, "no channels reported");
  v.check(elapsed < 60.0, "took %.2f s", elapsed);
  v.note("complex rmsd %.3g A, min correlation %.7f over %d channels, %.2f s", rmsd, worst, channels, elapsed);
}

// 11
void resolution_tuning(Verdict& v) {
  const TriangleMesh m = bumpy_sphere(2, 1.0, 0.2, 3);
  const SpectralBasis b = compute_basis(m, SpectrumRequest::count(static_cast<int>(m.vertex_count())));
  const Eigen::MatrixXd X = m.vertex_matrix();
  const Eigen::VectorXd w = b.mass().matrix() * Eigen::VectorXd::Ones(b.vertex_count());
  const Eigen::Vector3d centroid = X.transpose() * w / w.sum();
  double spread = 0.0;
  const TriangleMesh one = smooth_coordinates(m, b, 1);
  for (const Vec3& p : one.vertices()) spread = std::max(spread, (p - centroid).norm());
  v.check(spread < 1e-12, "k_keep = 1 spread %.3g", spread);
  const Eigen::MatrixXd full = smooth_coordinates(m, b, b.size()).vertex_matrix();
  const double recon = (full - X).cwiseAbs().maxCoeff();
  v.check(recon <= 1e-8, "complete basis reconstruction %.3g", recon);
  double previous = INFINITY;
  int steps = 0;
  for (Eigen::Index k = 1; k <= b.size(); ++k, ++steps) {
    const Eigen::MatrixXd d = Eigen::MatrixXd(smooth_coordinates(m, b, k).vertex_matrix()) - X;
    const double err = std::sqrt(std::max(0.0, (d.transpose() * (b.mass().matrix() * d)).trace()));
    v.check(err <= previous + 1e-12, "error rises at k_keep = %d: %.6g > %.6g", static_cast<int>(k), err, previous);
    previous = err;
  }
  v.note("centroid spread %.2g, reconstruction %.2g, monotone over %d values of k_keep", spread, recon, steps);
}

// Every regular file under `dir`, relative path to content. report.json loses
// its "timing" key.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string content = slurp(e.path());
    if (e.path().filename() == "report.json") {
      json j = json::parse(content);
      j.erase("timing");
      content = j.dump(2);
    }
    files[fs::relative(e.path(), dir).string()] = content;
  }
  return files;
}

// 12
void determinism(Verdict& v) {
  TempDir tmp;
  const std::vector<std::vector<std::string>> fixtures = {
      {"icosphere", "--subdivisions", "3", "--radius", "2", "-o", tmp / "ico.off"},
      {"bumpy", "--subdivisions", "3", "--radius", "10", "--amplitude", "1.5", "--seed", "3", "-o", tmp / "bumpy.off"},
      {"jittered", "--subdivisions", "2", "--jitter", "0.1", "--seed", "5", "-o", tmp / "jit.off"},
      {"patch", "--n", "16", "--size", "10", "-o", tmp / "patch.off"},
      {"tetrahedron", "--edge", "2", "-o", tmp / "tet.off"},
      {"bumpy", "--subdivisions", "3", "--radius", "10", "--amplitude", "1.5", "--seed", "3", "--rotate", "1", "0",
       "0", "30", "--translate", "2", "0", "1", "-o", tmp / "moved.off"},
  };
  for (const auto& f : fixtures) {
    std::vector<std::string> args = {"fixture"};
    args.insert(args.end(), f.begin(), f.end());
    const std::string path = args.back();
    v.check(run_cli(args) == 0, "fixture %s failed", f[0].c_str());
    args.back() = path + ".again";
    v.check(run_cli(args) == 0, "fixture %s failed", f[0].c_str());
    v.check(slurp(path) == slurp(path + ".again"), "fixture %s differs between runs", f[0].c_str());
  }

  {
    const TriangleMesh m = load_mesh(tmp / "bumpy.off").mesh;
    SurfaceField f;
    f.values.resize(static_cast<Eigen::Index>(m.vertex_count()), 2);
    for (std::size_t i = 0; i < m.vertex_count(); ++i) {
      f.values(static_cast<Eigen::Index>(i), 0) = m.vertices()[i].z();
      f.values(static_cast<Eigen::Index>(i), 1) = std::sin(0.3 * m.vertices()[i].x());
    }
    f.names = {"z", "wave"};
    spit(tmp.path / "field.csv", field_to_csv(f));
  }
  spit(tmp.path / "atoms.xyz", "4\nprobe atoms\nC 0 0 11\nO 11 0 0\nN 0 -11 0\nS -7 7 0\n");

  const std::vector<std::string> spheres = {tmp / "ico.off", tmp / "bumpy.off", tmp / "jit.off", tmp / "patch.off"};
  const auto with_inputs = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), spheres.begin(), spheres.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  struct Command {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Command> commands = {
      {"spectrum", with_inputs({"spectrum"}, {"-k", "12"})},
      {"hks", with_inputs({"hks"}, {"-k", "12", "--count", "6"})},
      {"curvature", with_inputs({"curvature", tmp / "tet.off"}, {})},
      {"smooth", with_inputs({"smooth"}, {"-k", "12", "--k-keep", "6"})},
      {"filter", {"filter", tmp / "bumpy.off", "-k", "20", "--field", tmp / "field.csv", "--mu", "0.1", "--sigma",
                  "0.2", "-t", "1"}},
      {"project", {"project", tmp / "bumpy.off", "-k", "20", "--field", tmp / "field.csv"}},
      {"features", {"features", tmp / "bumpy.off", "-k", "20", "--atoms", tmp / "atoms.xyz", "--hks-count", "4",
                    "--standardize"}},
      {"dock", {"dock", "--ligand", tmp / "moved.off", "--receptor", tmp / "bumpy.off", "--truth", tmp / "bumpy.off",
                "--full-interface", "-k", "30"}},
  };
  int compared = 0;
  for (const Command& c : commands) {
    std::map<std::string, std::string> runs[2];
    for (int round = 0; round < 2; ++round) {
      const std::string dir = tmp / (c.name + "_" + std::to_string(round));
      std::vector<std::string> args = c.args;
      args.insert(args.end(), {"-o", dir, "-j", round == 0 ? "1" : "2"});
      v.check(run_cli(args) == 0, "%s run %d failed", c.name.c_str(), round);
      runs[round] = snapshot(dir);
    }
    v.check(!runs[0].empty(), "%s wrote nothing", c.name.c_str());
    v.check(runs[0].size() == runs[1].size(), "%s wrote different file sets", c.name.c_str());
    for (const auto& [name, content] : runs[0]) {
      const auto it = runs[1].find(name);
      v.check(it != runs[1].end() && it->second == content, "%s: %s differs", c.name.c_str(), name.c_str());
      ++compared;
    }
  }
  std::string ref1, ref2;
  run_cli({"reference"}, &ref1);
  run_cli({"reference"}, &ref2);
  v.check(!ref1.empty() && ref1 == ref2, "reference output differs");
  v.note("fixture, reference and %zu commands; %d output files byte-identical (one run with -j 1, one with -j 2)",
         commands.size(), compared);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Verdict&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "sphere spectrum", sphere_spectrum},
      {2, "Weyl slope ratio", weyl_law},
      {3, "FEM identities", fem_identities},
      {4, "harmonic round trip and Parseval", roundtrip_parseval},
      {5, "filter gradients and fit", filter_gradients_and_fit},
      {6, "rigid and mirror invariance", invariance},
      {7, "Gauss-Bonnet and sphere curvature", gauss_bonnet},
      {8, "functional maps", functional_maps},
      {9, "Kabsch and RMSD metrics", kabsch_and_metrics},
      {10, "end-to-end self-docking", self_docking},
      {11, "resolution tuning", resolution_tuning},
      {12, "CLI determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    const auto t0 = Clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.check(false, "exception: %s", e.what());
    }
    const double elapsed = seconds_since(t0);
    std::printf("%s  %2d  %-34s %6.2fs  %s\n", v.passed() ? "PASS" : "FAIL", c.id, c.name, elapsed, v.notes().c_str());
    const std::size_t shown = std::min<std::size_t>(v.failures().size(), 5);
    for (std::size_t i = 0; i < shown; ++i) std::printf("        %s\n", v.failures()[i].c_str());
    if (v.failures().size() > shown) std::printf("        ... %zu more\n", v.failures().size() - shown);
    std::fflush(stdout);
    failed += v.passed() ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
