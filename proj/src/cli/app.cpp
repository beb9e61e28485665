#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <sstream>

#include "cli.hpp"
#include "commands.hpp"
#include "common.hpp"

namespace surfspec::cli {

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::io:
    case ErrorCategory::parse:
    case ErrorCategory::config:
      return 2;
    case ErrorCategory::geometry:
    case ErrorCategory::solve:
    case ErrorCategory::empty_interface:
      return 1;
  }
  return 1;
}

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  SpectrumArgs spectrum;
  HksArgs hks;
  CurvatureArgs curvature;
  SmoothArgs smooth;
  FilterArgs filter;
  ProjectArgs project;
  FeaturesArgs features;
  FixtureArgs fixture;
  DockArgs dock;
  std::string config;
  bool json_errors = false;
  bool version = false;
};

void add_inputs(CLI::App* c, InputArgs& in) {
  c->add_option("inputs", in.inputs, "Mesh files (.off, .obj, .ply); '-' reads stdin")->required();
  c->add_option("--format", in.format, "Force the input format: off, obj or ply");
  c->add_option("-o,--out", in.out, "Output directory; several inputs get one subdirectory each")
      ->capture_default_str();
  c->add_option("-j,--jobs", in.jobs, "Parallel workers over the inputs")->capture_default_str()->check(
      CLI::PositiveNumber);
  c->add_option("--merge-eps", in.merge_eps, "Vertex merge distance used by cleanup")->capture_default_str();
}

void add_spectral(CLI::App* c, SpectralArgs& s) {
  auto* k = c->add_option("-k,--k", s.k, "Number of eigenpairs (including lambda_0 = 0)");
  auto* l = c->add_option("--lambda-max", s.lambda_max, "Keep every eigenpair with lambda <= this (default 0.3)");
  k->excludes(l);
}

std::unique_ptr<CLI::App> build_app(Options& o) {
  auto app = std::make_unique<CLI::App>("Spectral analysis of triangulated surfaces", "surfspec");
  app->fallthrough();
  app->require_subcommand(0, 1);
  app->add_option("--config", o.config, "Flat key=value file; flags on the command line take precedence");
  app->add_flag("--json-errors", o.json_errors, "Print errors as JSON on stderr");
  app->add_flag("--version", o.version, "Print the version and exit");

  auto* spectrum = app->add_subcommand("spectrum", "Laplace-Beltrami eigenpairs: eigenvalues.csv, basis.bin, report.json");
  add_inputs(spectrum, o.spectrum.in);
  add_spectral(spectrum, o.spectrum.spec);

  auto* hks = app->add_subcommand("hks", "Heat kernel signature per vertex: hks.csv");
  add_inputs(hks, o.hks.in);
  add_spectral(hks, o.hks.spec);
  hks->add_option("--times", o.hks.times, "Diffusion times; default is log-spaced from the spectrum");
  hks->add_option("--count", o.hks.count, "Number of log-spaced times")->capture_default_str()->check(
      CLI::PositiveNumber);
  hks->add_flag("--normalize", o.hks.normalize, "Divide each channel by its B-weighted mean");

  auto* curvature = app->add_subcommand("curvature", "Discrete Gaussian and mean curvature: curvature.csv");
  add_inputs(curvature, o.curvature.in);

  auto* smooth = app->add_subcommand("smooth", "Reconstruct coordinates from the first k-keep modes: smoothed.off");
  add_inputs(smooth, o.smooth.in);
  add_spectral(smooth, o.smooth.spec);
  smooth->add_option("--k-keep", o.smooth.k_keep, "Number of modes kept")->required();

  auto* filter = app->add_subcommand("filter", "Gaussian band-pass times heat filter on a field: filtered.csv");
  add_inputs(filter, o.filter.in);
  add_spectral(filter, o.filter.spec);
  filter->add_option("--field", o.filter.field, "Field CSV indexed by input vertex")->required();
  filter->add_option("--mu", o.filter.mu, "Band centre in lambda")->capture_default_str();
  filter->add_option("--sigma", o.filter.sigma, "Band width in lambda")->capture_default_str();
  filter->add_option("-t,--t", o.filter.t, "Diffusion time")->capture_default_str();
  filter->add_flag("--heat", o.filter.heat, "Pure heat filter exp(-lambda t), ignoring mu and sigma");

  auto* project = app->add_subcommand("project", "Project a field onto the truncated basis: projected.csv");
  add_inputs(project, o.project.in);
  add_spectral(project, o.project.spec);
  project->add_option("--field", o.project.field, "Field CSV indexed by input vertex")->required();

  auto* features = app->add_subcommand("features", "Geometric plus atom-derived vertex features: features.csv");
  add_inputs(features, o.features.in);
  add_spectral(features, o.features.spec);
  features->add_option("--atoms", o.features.atoms, "Atom file (.xyz or .pdb)")->required();
  features->add_option("--table", o.features.table, "Descriptor table CSV (default: element one-hots)");
  features->add_option("--radius", o.features.radius, "Atom neighbourhood radius")->capture_default_str();
  features->add_option("--k-nearest", o.features.k_nearest, "Use the k nearest atoms instead of a radius");
  features->add_flag("--standardize", o.features.standardize, "B-weighted zero mean, unit variance per channel");
  features->add_option("--hks-count", o.features.hks_count, "Number of HKS channels")->capture_default_str();

  auto* fixture = app->add_subcommand("fixture", "Write a synthetic mesh as OFF");
  fixture->add_option("kind", o.fixture.kind, "icosphere, bumpy, jittered, patch or tetrahedron")->required();
  fixture->add_option("-o,--out", o.fixture.out, "Output file, '-' for stdout")->capture_default_str();
  fixture->add_option("--subdivisions", o.fixture.subdivisions, "Sphere subdivision level")->capture_default_str();
  fixture->add_option("--radius", o.fixture.radius, "Sphere radius")->capture_default_str();
  fixture->add_option("--amplitude", o.fixture.amplitude, "Bump amplitude (bumpy)")->capture_default_str();
  fixture->add_option("--jitter", o.fixture.jitter, "Vertex jitter (jittered)")->capture_default_str();
  fixture->add_option("--seed", o.fixture.seed, "RNG seed")->capture_default_str();
  fixture->add_option("--n", o.fixture.n, "Grid points per side (patch)")->capture_default_str();
  fixture->add_option("--size", o.fixture.size, "Side length (patch)")->capture_default_str();
  fixture->add_option("--z0", o.fixture.z0, "Height offset (patch)")->capture_default_str();
  fixture->add_option("--edge", o.fixture.edge, "Edge length (tetrahedron)")->capture_default_str();
  fixture->add_option("--rotate", o.fixture.rotate, "Rotation: axis x y z and angle in degrees")->expected(4);
  fixture->add_option("--translate", o.fixture.translate, "Translation x y z")->expected(3);

  auto* dock = app->add_subcommand("dock", "Rigidly dock a ligand surface onto a receptor surface");
  dock->add_option("--ligand", o.dock.ligand, "Ligand mesh")->required();
  dock->add_option("--receptor", o.dock.receptor, "Receptor mesh")->required();
  dock->add_option("--format", o.dock.format, "Force the mesh format: off, obj or ply");
  dock->add_option("-o,--out", o.dock.out, "Output directory")->capture_default_str();
  dock->add_option("--ligand-atoms", o.dock.ligand_atoms, "Ligand atoms (.xyz or .pdb)");
  dock->add_option("--receptor-atoms", o.dock.receptor_atoms, "Receptor atoms (.xyz or .pdb)");
  dock->add_option("--table", o.dock.table, "Descriptor table CSV (default: element one-hots)");
  dock->add_option("--radius", o.dock.radius, "Atom neighbourhood radius")->capture_default_str();
  dock->add_option("--truth", o.dock.truth, "Ligand in its bound pose; enables RMSD metrics");
  dock->add_option("--ligand-mask", o.dock.ligand_mask, "Ligand interface vertices, one index per line");
  dock->add_option("--receptor-mask", o.dock.receptor_mask, "Receptor interface vertices, one index per line");
  dock->add_flag("--full-interface", o.dock.full_interface, "Use every vertex of both surfaces");
  dock->add_option("--threshold", o.dock.threshold, "Interface distance")->capture_default_str();
  dock->add_option("--rmsd-threshold", o.dock.rmsd_threshold, "Interface distance for interface_rmsd")
      ->capture_default_str();
  dock->add_option("--alpha", o.dock.alpha, "Functional map Laplacian commutativity weight")->capture_default_str();
  dock->add_option("--ridge", o.dock.ridge, "Relative ridge on the fmap normal equations")->capture_default_str();
  add_spectral(dock, o.dock.spec);
  dock->add_option("--hks-count", o.dock.hks_count, "Number of HKS channels")->capture_default_str();
  dock->add_option("--min-interface", o.dock.min_interface, "Smallest usable interface")->capture_default_str();
  dock->add_option("-j,--jobs", o.dock.jobs, "Solve the two interface spectra in parallel when > 1")
      ->capture_default_str();
  dock->add_option("--merge-eps", o.dock.merge_eps, "Vertex merge distance used by cleanup")->capture_default_str();

  app->add_subcommand("reference", "Print the command reference as markdown");
  return app;
}

void report_error(std::ostream& err, bool json, const std::string& category, const std::string& message,
                  const std::vector<std::string>& details) {
  if (json) {
    nlohmann::ordered_json j;
    j["error"] = {{"category", category}, {"message", message}};
    if (details.size() > 1) j["error"]["inputs"] = details;
    err << j.dump() << "\n";
    return;
  }
  if (details.size() > 1) {
    for (const auto& d : details) err << "error: " << d << "\n";
  } else {
    err << "error [" << category << "]: " << message << "\n";
  }
}

}  // namespace

std::string reference() {
  Options o;
  auto app = build_app(o);
  std::ostringstream s;
  s << "# surfspec command reference\n\n";
  s << "```\n" << app->help() << "```\n";
  for (const auto* sub : app->get_subcommands([](CLI::App*) { return true; })) {
    s << "\n## " << sub->get_name() << "\n\n```\n" << sub->help() << "```\n";
  }
  return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const bool json_errors = std::find(args.begin(), args.end(), "--json-errors") != args.end();
  std::vector<std::string> errors;
  try {
    const std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
    Options o;
    auto app = build_app(o);
    auto parse = [&](std::vector<std::string> list) -> int {
      std::reverse(list.begin(), list.end());
      try {
        app->parse(list);
      } catch (const CLI::CallForHelp&) {
        out << app->help();
        return 0;
      } catch (const CLI::CallForAllHelp&) {
        out << app->help("", CLI::AppFormatMode::All);
        return 0;
      } catch (const CLI::ParseError& e) {
        report_error(err, json_errors, "config", e.what(), {});
        return 2;
      }
      return -1;
    };
    if (const int rc = parse(argv); rc >= 0) return rc;
    if (!o.config.empty()) {
      // Second pass: keys from the file fill in whatever the command line left unset.
      const CLI::App* sub = app->get_subcommands().empty() ? nullptr : app->get_subcommands().front();
      auto given = [&](const std::string& key) {
        for (const CLI::App* a : {static_cast<const CLI::App*>(app.get()), sub}) {
          if (!a) continue;
          try {
            if (a->get_option("--" + key)->count() > 0) return true;
          } catch (const CLI::OptionNotFound&) {
          }
        }
        return false;
      };
      const std::vector<std::string> merged = apply_config_file(argv, o.config, given);
      o = Options{};
      app = build_app(o);
      if (const int rc = parse(merged); rc >= 0) return rc;
    }
    if (o.version) {
      out << "surfspec " << kVersion << "\n";
      return 0;
    }
    if (app->get_subcommands().empty()) {
      out << app->help();
      return 2;
    }
    const std::string cmd = app->get_subcommands().front()->get_name();
    if (cmd == "spectrum") cmd_spectrum(o.spectrum, out, errors);
    else if (cmd == "hks") cmd_hks(o.hks, out, errors);
    else if (cmd == "curvature") cmd_curvature(o.curvature, out, errors);
    else if (cmd == "smooth") cmd_smooth(o.smooth, out, errors);
    else if (cmd == "filter") cmd_filter(o.filter, out, errors);
    else if (cmd == "project") cmd_project(o.project, out, errors);
    else if (cmd == "features") cmd_features(o.features, out, errors);
    else if (cmd == "fixture") cmd_fixture(o.fixture, out);
    else if (cmd == "dock") cmd_dock(o.dock, out);
    else if (cmd == "reference") out << reference();
    return 0;
  } catch (const Error& e) {
    report_error(err, json_errors, to_string(e.category()), e.what(), errors);
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    report_error(err, json_errors, "internal", e.what(), errors);
    return 1;
  }
}

}  // namespace surfspec::cli
