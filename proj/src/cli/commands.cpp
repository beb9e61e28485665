#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>

#include "common.hpp"
#include "surfspec/atoms.hpp"
#include "surfspec/correspondence.hpp"
#include "surfspec/error.hpp"
#include "surfspec/fixtures.hpp"
#include "surfspec/geometry.hpp"
#include "surfspec/io.hpp"
#include "text_util.hpp"

namespace surfspec::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::mutex out_mutex;

void say(std::ostream& out, const std::string& line) {
  const std::lock_guard<std::mutex> lock(out_mutex);
  out << line << "\n";
}

Json timing_json(Clock::time_point start) {
  Json t;
  t["total_seconds"] = seconds_since(start);
  return t;
}

SpectralBasis basis_for(const PreparedMesh& m, const SpectralArgs& s) {
  return compute_basis(m.mesh, spectrum_request(s.k, s.lambda_max), {});
}

Json spectrum_json(const SpectralBasis& b) {
  Json j;
  j["request"] = request_json(b.request());
  j["count"] = b.size();
  j["lambda_first"] = b.size() > 0 ? b.eigenvalues()[0] : 0.0;
  j["lambda_last"] = b.size() > 0 ? b.eigenvalues()[b.size() - 1] : 0.0;
  j["solver"] = solver_json(b.diagnostics());
  return j;
}

std::vector<double> hks_times(const SpectralBasis& b, const std::vector<double>& given, int count) {
  if (!given.empty()) return given;
  return default_hks_times(b, count);
}

std::vector<char> read_mask(const std::string& path, const PreparedMesh& m) {
  const std::string text = read_text_file(path);
  std::set<long long> chosen;
  detail::LineCursor cursor(text);
  std::string_view line;
  while (cursor.next(line)) {
    const std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto v = detail::to_integer(t);
    if (!v) throw ParseError(cursor.line_no(), "expected a vertex index, got '" + std::string(t) + "'");
    if (*v < 0 || *v >= static_cast<long long>(m.input_vertices)) {
      throw IndexRangeError(cursor.line_no(), *v, m.input_vertices);
    }
    chosen.insert(*v);
  }
  std::vector<char> mask(m.mesh.vertex_count(), 0);
  for (std::size_t i = 0; i < m.source_vertex.size(); ++i) mask[i] = chosen.count(m.source_vertex[i]) ? 1 : 0;
  return mask;
}

std::string transform_text(const RigidTransform& T) {
  const Eigen::Matrix4d M = T.homogeneous();
  std::string s;
  char buf[64];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), c == 0 ? "%.12g" : " %.12g", M(r, c));
      s += buf;
    }
    s += "\n";
  }
  return s;
}

}  // namespace

void cmd_spectrum(const SpectrumArgs& a, std::ostream& out, std::vector<std::string>& errors) {
  for_each_input(
      a.in.inputs, a.in.out, a.in.jobs,
      [&](const std::string& input, const fs::path& dir) {
        const auto start = Clock::now();
        const PreparedMesh m = prepare_mesh(input, a.in.format, a.in.merge_eps);
        const SpectralBasis b = basis_for(m, a.spec);
        write_text_file(dir / "eigenvalues.csv", eigenvalues_to_csv(b.eigenvalues()));
        save_basis(dir / "basis.bin", b);
        Json r;
        r["command"] = "spectrum";
        r["mesh"] = mesh_json(m);
        r["spectrum"] = spectrum_json(b);
        const double area = surface_area(m.mesh);
        if (b.size() >= 30) {
          const WeylFit w = weyl_slope(b, area);
          r["weyl"] = {{"slope", w.slope}, {"predicted", w.predicted}, {"ratio", w.ratio}};
        } else {
          r["weyl"] = nullptr;
        }
        r["timing"] = timing_json(start);
        write_json(dir / "report.json", r);
        say(out, input + ": " + std::to_string(b.size()) + " eigenpairs -> " + dir.string());
      },
      errors);
}

void cmd_hks(const HksArgs& a, std::ostream& out, std::vector<std::string>& errors) {
  for_each_input(
      a.in.inputs, a.in.out, a.in.jobs,
      [&](const std::string& input, const fs::path& dir) {
        const auto start = Clock::now();
        const PreparedMesh m = prepare_mesh(input, a.in.format, a.in.merge_eps);
        const SpectralBasis b = basis_for(m, a.spec);
        const std::vector<double> times = hks_times(b, a.times, a.count);
        const SurfaceField hks = heat_kernel_signature(b, times, a.normalize);
        write_text_file(dir / "hks.csv", field_to_csv(hks));
        Json r;
        r["command"] = "hks";
        r["mesh"] = mesh_json(m);
        r["spectrum"] = spectrum_json(b);
        r["times"] = times;
        r["normalized"] = a.normalize;
        r["timing"] = timing_json(start);
        write_json(dir / "report.json", r);
        say(out, input + ": " + std::to_string(times.size()) + " HKS channels -> " + dir.string());
      },
      errors);
}

void cmd_curvature(const CurvatureArgs& a, std::ostream& out, std::vector<std::string>& errors) {
  for_each_input(
      a.in.inputs, a.in.out, a.in.jobs,
      [&](const std::string& input, const fs::path& dir) {
        const auto start = Clock::now();
        const PreparedMesh m = prepare_mesh(input, a.in.format, a.in.merge_eps);
        const CurvatureField c = compute_curvature(m.mesh);
        SurfaceField f;
        const auto n = static_cast<Eigen::Index>(m.mesh.vertex_count());
        f.values.resize(n, 6);
        for (Eigen::Index i = 0; i < n; ++i) {
          f.values(i, 0) = c.gaussian[i];
          f.values(i, 1) = c.mean[i];
          f.values(i, 2) = c.boundary[i] ? 1.0 : 0.0;
          f.values.block<1, 3>(i, 3) = c.normals[i].transpose();
        }
        f.names = {"gaussian", "mean", "boundary", "nx", "ny", "nz"};
        f.mesh_hash = m.mesh.hash();
        write_text_file(dir / "curvature.csv", field_to_csv(f));
        std::size_t boundary = 0;
        for (char v : c.boundary) boundary += v ? 1 : 0;
        Json r;
        r["command"] = "curvature";
        r["mesh"] = mesh_json(m);
        r["boundary_vertices"] = boundary;
        r["angle_defect_sum"] = angle_defects(m.mesh).sum();
        r["timing"] = timing_json(start);
        write_json(dir / "report.json", r);
        say(out, input + ": curvature -> " + dir.string());
      },
      errors);
}

void cmd_smooth(const SmoothArgs& a, std::ostream& out, std::vector<std::string>& errors) {
  if (a.k_keep < 1) throw ConfigError("--k-keep must be positive");
  for_each_input(
      a.in.inputs, a.in.out, a.in.jobs,
      [&](const std::string& input, const fs::path& dir) {
        const auto start = Clock::now();
        const PreparedMesh m = prepare_mesh(input, a.in.format, a.in.merge_eps);
        SpectralArgs spec = a.spec;
        if (!spec.k && !spec.lambda_max) spec.k = a.k_keep;
        const SpectralBasis b = basis_for(m, spec);
        if (b.size() < a.k_keep) {
          throw ConfigError("--k-keep " + std::to_string(a.k_keep) + " exceeds the " + std::to_string(b.size()) +
                            " computed eigenpairs");
        }
        const TriangleMesh s = smooth_coordinates(m.mesh, b, a.k_keep);
        write_text_file(dir / "smoothed.off", to_off(s));
        const Eigen::MatrixXd d = Eigen::MatrixXd(s.vertex_matrix()) - Eigen::MatrixXd(m.mesh.vertex_matrix());
        const double err = std::sqrt((d.transpose() * (b.mass().matrix() * d)).trace());
        Json r;
        r["command"] = "smooth";
        r["mesh"] = mesh_json(m);
        r["spectrum"] = spectrum_json(b);
        r["k_keep"] = a.k_keep;
        r["reconstruction_error_b"] = err;
        r["timing"] = timing_json(start);
        write_json(dir / "report.json", r);
        say(out, input + ": smoothed with " + std::to_string(a.k_keep) + " modes -> " + dir.string());
      },
      errors);
}

void cmd_filter(const FilterArgs& a, std::ostream& out, std::vector<std::string>& errors) {
  if (a.field.empty()) throw ConfigError("--field is required");
  for_each_input(
      a.in.inputs, a.in.out, a.in.jobs,
      [&](const std::string& input, const fs::path& dir) {
        const auto start = Clock::now();
        const PreparedMesh m = prepare_mesh(input, a.in.format, a.in.merge_eps);
        const SurfaceField f = load_field_for(a.field, m);
        const SpectralBasis b = basis_for(m, a.spec);
        const FilterParams p = a.heat ? FilterParams::heat(a.t) : FilterParams{a.mu, a.sigma, a.t, false};
        const SurfaceField g = apply_filter(f, b, std::span<const FilterParams>(&p, 1));
        write_text_file(dir / "filtered.csv", field_to_csv(g));
        Json r;
        r["command"] = "filter";
        r["mesh"] = mesh_json(m);
        r["spectrum"] = spectrum_json(b);
        r["filter"] = a.heat ? Json{{"heat_only", true}, {"t", a.t}}
                             : Json{{"heat_only", false}, {"mu", a.mu}, {"sigma", a.sigma}, {"t", a.t}};
        r["channels"] = g.names;
        r["timing"] = timing_json(start);
        write_json(dir / "report.json", r);
        say(out, input + ": filtered " + std::to_string(g.channels()) + " channels -> " + dir.string());
      },
      errors);
}

void cmd_project(const ProjectArgs& a, std::ostream& out, std::vector<std::string>& errors) {
  if (a.field.empty()) throw ConfigError("--field is required");
  for_each_input(
      a.in.inputs, a.in.out, a.in.jobs,
      [&](const std::string& input, const fs::path& dir) {
        const auto start = Clock::now();
        const PreparedMesh m = prepare_mesh(input, a.in.format, a.in.merge_eps);
        const SurfaceField f = load_field_for(a.field, m);
        const SpectralBasis b = basis_for(m, a.spec);
        const SurfaceField g = project(f, b);
        write_text_file(dir / "projected.csv", field_to_csv(g));
        Json r;
        r["command"] = "project";
        r["mesh"] = mesh_json(m);
        r["spectrum"] = spectrum_json(b);
        r["channels"] = g.names;
        r["timing"] = timing_json(start);
        write_json(dir / "report.json", r);
        say(out, input + ": projected " + std::to_string(g.channels()) + " channels -> " + dir.string());
      },
      errors);
}

void cmd_features(const FeaturesArgs& a, std::ostream& out, std::vector<std::string>& errors) {
  if (a.atoms.empty()) throw ConfigError("--atoms is required");
  const AtomSet atoms = load_atoms(a.atoms).atoms;
  const AtomDescriptorTable table = a.table.empty() ? AtomDescriptorTable::default_elements()
                                                    : AtomDescriptorTable::load(a.table);
  for_each_input(
      a.in.inputs, a.in.out, a.in.jobs,
      [&](const std::string& input, const fs::path& dir) {
        const auto start = Clock::now();
        const PreparedMesh m = prepare_mesh(input, a.in.format, a.in.merge_eps);
        const SpectralBasis b = basis_for(m, a.spec);
        const std::vector<double> times = default_hks_times(b, a.hks_count);
        const SurfaceField geom = geometric_features(m.mesh, b, times);
        ProjectionOptions po;
        po.radius = a.radius;
        po.k_nearest = a.k_nearest;
        const AtomFeatures chem = project_atom_features(atoms, m.mesh, table, po);
        const AssembledFeatures f = assemble_input_features(geom, chem.field, a.standardize ? &b.mass() : nullptr);
        write_text_file(dir / "features.csv", field_to_csv(f.field));
        Json r;
        r["command"] = "features";
        r["mesh"] = mesh_json(m);
        r["spectrum"] = spectrum_json(b);
        r["atoms"] = {{"input", a.atoms}, {"count", atoms.size()}};
        r["projection"] = {{"mode", a.k_nearest ? "k_nearest" : "radius"},
                           {"radius", a.radius},
                           {"k_nearest", a.k_nearest ? Json(*a.k_nearest) : Json(nullptr)},
                           {"empty_vertices", chem.empty_vertices},
                           {"mean_neighbors", chem.mean_neighbors}};
        r["standardized"] = a.standardize;
        r["constant_channels"] = f.constant_channels;
        r["channels"] = f.field.names;
        r["timing"] = timing_json(start);
        write_json(dir / "report.json", r);
        say(out, input + ": " + std::to_string(f.field.channels()) + " feature channels -> " + dir.string());
      },
      errors);
}

void cmd_fixture(const FixtureArgs& a, std::ostream& out) {
  TriangleMesh m;
  if (a.kind == "icosphere") {
    m = icosphere(a.subdivisions, a.radius);
  } else if (a.kind == "bumpy") {
    m = bumpy_sphere(a.subdivisions, a.radius, a.amplitude, a.seed);
  } else if (a.kind == "jittered") {
    m = jittered_sphere(a.subdivisions, a.radius, a.jitter, a.seed);
  } else if (a.kind == "patch") {
    m = grid_patch(a.n, a.size, a.z0);
  } else if (a.kind == "tetrahedron") {
    m = regular_tetrahedron(a.edge);
  } else {
    throw ConfigError("unknown fixture '" + a.kind + "' (icosphere, bumpy, jittered, patch, tetrahedron)");
  }
  if (!a.rotate.empty() || !a.translate.empty()) {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Vec3 t = Vec3::Zero();
    if (!a.rotate.empty()) {
      if (a.rotate.size() != 4) throw ConfigError("--rotate takes an axis and an angle in degrees: x y z deg");
      const Vec3 axis(a.rotate[0], a.rotate[1], a.rotate[2]);
      if (!(axis.norm() > 0.0)) throw ConfigError("--rotate axis must be nonzero");
      R = Eigen::AngleAxisd(a.rotate[3] * std::acos(-1.0) / 180.0, axis.normalized()).toRotationMatrix();
    }
    if (!a.translate.empty()) {
      if (a.translate.size() != 3) throw ConfigError("--translate takes three values");
      t = Vec3(a.translate[0], a.translate[1], a.translate[2]);
    }
    m = m.transformed(R, t);
  }
  const std::string text = to_off(m);
  if (a.out == "-") {
    out << text;
  } else {
    write_text_file(a.out, text);
  }
}

void cmd_dock(const DockArgs& a, std::ostream& out) {
  if (a.ligand.empty() || a.receptor.empty()) throw ConfigError("--ligand and --receptor are required");
  if (a.ligand_mask.empty() != a.receptor_mask.empty()) {
    throw ConfigError("--ligand-mask and --receptor-mask go together");
  }
  if (a.ligand_atoms.empty() != a.receptor_atoms.empty()) {
    throw ConfigError("--ligand-atoms and --receptor-atoms go together");
  }
  {
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw IoError("cannot create output directory " + a.out + ": " + ec.message());
  }
  const fs::path dir(a.out);
  const auto start = Clock::now();
  Json report;
  report["command"] = "dock";
  Json timing;
  std::string stage = "load";
  auto mark = Clock::now();
  auto finish_stage = [&](const std::string& name) {
    timing[name] = seconds_since(mark);
    mark = Clock::now();
  };

  try {
    const PreparedMesh lig = prepare_mesh(a.ligand, a.format, a.merge_eps);
    const PreparedMesh rec = prepare_mesh(a.receptor, a.format, a.merge_eps);
    report["ligand"] = mesh_json(lig);
    report["receptor"] = mesh_json(rec);
    std::optional<PreparedMesh> truth;
    if (!a.truth.empty()) {
      truth = prepare_mesh(a.truth, a.format, a.merge_eps);
      if (truth->mesh.vertex_count() != lig.mesh.vertex_count()) {
        throw GeometryError("ground-truth ligand has " + std::to_string(truth->mesh.vertex_count()) +
                            " vertices, ligand has " + std::to_string(lig.mesh.vertex_count()));
      }
    }
    finish_stage("load");

    stage = "masks";
    std::vector<char> mask_l, mask_r;
    std::string source;
    if (!a.ligand_mask.empty()) {
      mask_l = read_mask(a.ligand_mask, lig);
      mask_r = read_mask(a.receptor_mask, rec);
      source = "mask_files";
    } else if (a.full_interface) {
      mask_l.assign(lig.mesh.vertex_count(), 1);
      mask_r.assign(rec.mesh.vertex_count(), 1);
      source = "full_surface";
    } else {
      const TriangleMesh& posed = truth ? truth->mesh : lig.mesh;
      const Interface itf = extract_interface(posed, rec.mesh, a.threshold);
      if (itf.vertices_first.empty() || itf.vertices_second.empty()) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "no vertices within %.6g A between ligand and receptor", a.threshold);
        throw EmptyInterfaceError(buf);
      }
      mask_l = itf.mask_first;
      mask_r = itf.mask_second;
      source = truth ? "ground_truth" : "common_frame";
      report["interface_pairs"] = itf.pairs.size();
    }
    std::size_t nl = 0, nr = 0;
    for (char v : mask_l) nl += v ? 1 : 0;
    for (char v : mask_r) nr += v ? 1 : 0;
    report["interface"] = {{"source", source}, {"threshold", a.threshold}, {"ligand_vertices", nl},
                           {"receptor_vertices", nr}};
    finish_stage("masks");

    stage = "features";
    const SpectrumRequest request = spectrum_request(a.spec.k, a.spec.lambda_max);
    const SpectralBasis bl = compute_basis(lig.mesh, request, {});
    const SpectralBasis br = compute_basis(rec.mesh, request, {});
    const std::vector<double> times = default_hks_times(br, a.hks_count);
    SurfaceField fl = heat_kernel_signature(bl, times);
    SurfaceField fr = heat_kernel_signature(br, times);
    if (!a.ligand_atoms.empty()) {
      const AtomDescriptorTable table = a.table.empty() ? AtomDescriptorTable::default_elements()
                                                        : AtomDescriptorTable::load(a.table);
      ProjectionOptions po;
      po.radius = a.radius;
      const AtomFeatures cl = project_atom_features(load_atoms(a.ligand_atoms).atoms, lig.mesh, table, po);
      const AtomFeatures cr = project_atom_features(load_atoms(a.receptor_atoms).atoms, rec.mesh, table, po);
      fl = assemble_input_features(fl, cl.field).field;
      fr = assemble_input_features(fr, cr.field).field;
    }
    report["features"] = {{"channels", fl.names}, {"hks_times", times}};
    finish_stage("features");

    DockOptions opt;
    opt.spectrum = request;
    opt.fmap.alpha = a.alpha;
    opt.fmap.ridge_factor = a.ridge;
    opt.min_interface = a.min_interface;
    opt.parallel = a.jobs > 1;
    opt.on_stage = [&](std::string_view s) { stage = "dock:" + std::string(s); };
    const DockReport d = rigid_dock(lig.mesh, rec.mesh, fl, fr, mask_l, mask_r, opt);
    finish_stage("dock");

    stage = "write";
    write_text_file(dir / "transform.txt", transform_text(d.transform));
    const TriangleMesh docked = lig.mesh.transformed(d.transform.R, d.transform.t);
    write_text_file(dir / "docked_ligand.off", to_off(docked));
    Json dj;
    Json rows = Json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({d.transform.R(r, 0), d.transform.R(r, 1), d.transform.R(r, 2)});
    dj["transform"] = {{"R", rows}, {"t", {d.transform.t.x(), d.transform.t.y(), d.transform.t.z()}}};
    dj["rotation_angle_degrees"] = d.transform.rotation_angle_degrees();
    dj["translation_norm"] = d.transform.t.norm();
    dj["fmap_residual"] = d.fmap_residual;
    dj["alignment_rmsd"] = d.alignment_rmsd;
    dj["interface_ligand"] = d.interface_ligand;
    dj["interface_receptor"] = d.interface_receptor;
    dj["k_ligand"] = d.k_ligand;
    dj["k_receptor"] = d.k_receptor;
    Json corr = Json::object();
    double min_corr = 1.0;
    for (std::size_t c = 0; c < d.channels.size(); ++c) {
      corr[d.channels[c]] = d.correlations[c];
      if (std::isfinite(d.correlations[c])) min_corr = std::min(min_corr, d.correlations[c]);
    }
    dj["correlations"] = corr;
    dj["min_correlation"] = min_corr;
    report["dock"] = dj;
    for (const auto& [k, v] : d.timing) timing["dock_" + k] = v;
    finish_stage("write");

    if (truth) {
      stage = "metrics";
      const auto nrv = static_cast<Eigen::Index>(rec.mesh.vertex_count());
      const auto nlv = static_cast<Eigen::Index>(lig.mesh.vertex_count());
      PointMatrix Zs(nrv + nlv, 3), Z(nrv + nlv, 3);
      const PointMatrix R0 = to_points(rec.mesh.vertices());
      Zs << R0, to_points(truth->mesh.vertices());
      Z << R0, to_points(docked.vertices());
      Json mj;
      mj["complex_rmsd"] = complex_rmsd(Zs, Z);
      mj["interface_rmsd_threshold"] = a.rmsd_threshold;
      mj["interface_rmsd"] = interface_rmsd(Zs, Z, nrv, a.rmsd_threshold);
      report["metrics"] = mj;
      finish_stage("metrics");
    }
    report["status"] = "ok";
    timing["total"] = seconds_since(start);
    report["timing"] = timing;
    write_json(dir / "report.json", report);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "docked: rotation %.4g deg, translation %.4g -> %s",
                  d.transform.rotation_angle_degrees(), d.transform.t.norm(), dir.string().c_str());
    say(out, buf);
  } catch (const std::exception& e) {
    report["status"] = "failed";
    report["failed_at"] = stage;
    const auto* se = dynamic_cast<const Error*>(&e);
    report["error"] = {{"category", se ? to_string(se->category()) : "internal"}, {"message", e.what()}};
    timing["total"] = seconds_since(start);
    report["timing"] = timing;
    try {
      write_json(dir / "report.json", report);
    } catch (const Error&) {
      // The original failure is the one worth reporting.
    }
    throw;
  }
}

}  // namespace surfspec::cli
