#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "surfspec/cleanup.hpp"
#include "surfspec/features.hpp"

namespace surfspec::cli {

struct InputArgs {
  std::vector<std::string> inputs;
  std::string format;
  std::string out = ".";
  int jobs = 1;
  double merge_eps = kDefaultMergeEps;
};

struct SpectralArgs {
  std::optional<int> k;
  std::optional<double> lambda_max;
};

struct SpectrumArgs {
  InputArgs in;
  SpectralArgs spec;
};

struct HksArgs {
  InputArgs in;
  SpectralArgs spec;
  std::vector<double> times;
  int count = 16;
  bool normalize = false;
};

struct CurvatureArgs {
  InputArgs in;
};

struct SmoothArgs {
  InputArgs in;
  SpectralArgs spec;
  int k_keep = 0;
};

struct FilterArgs {
  InputArgs in;
  SpectralArgs spec;
  std::string field;
  double mu = 0.0;
  double sigma = 1.0;
  double t = 0.0;
  bool heat = false;
};

struct ProjectArgs {
  InputArgs in;
  SpectralArgs spec;
  std::string field;
};

struct FeaturesArgs {
  InputArgs in;
  SpectralArgs spec;
  std::string atoms;
  std::string table;
  double radius = kDefaultAtomRadius;
  std::optional<std::size_t> k_nearest;
  bool standardize = false;
  int hks_count = 16;
};

struct FixtureArgs {
  std::string kind;
  std::string out = "-";
  int subdivisions = 3;
  double radius = 1.0;
  double amplitude = 0.1;
  double jitter = 0.05;
  std::uint64_t seed = 1;
  int n = 11;
  double size = 10.0;
  double z0 = 0.0;
  double edge = 1.0;
  std::vector<double> rotate;
  std::vector<double> translate;
};

struct DockArgs {
  std::string ligand;
  std::string receptor;
  std::string format;
  std::string out = ".";
  std::string ligand_atoms;
  std::string receptor_atoms;
  std::string table;
  double radius = kDefaultAtomRadius;
  std::string truth;
  std::string ligand_mask;
  std::string receptor_mask;
  bool full_interface = false;
  double threshold = 3.0;
  double rmsd_threshold = 8.0;
  double alpha = 1e-3;
  double ridge = 1e-10;
  SpectralArgs spec;
  int hks_count = 16;
  std::size_t min_interface = 10;
  int jobs = 1;
  double merge_eps = kDefaultMergeEps;
};

void cmd_spectrum(const SpectrumArgs& a, std::ostream& out, std::vector<std::string>& errors);
void cmd_hks(const HksArgs& a, std::ostream& out, std::vector<std::string>& errors);
void cmd_curvature(const CurvatureArgs& a, std::ostream& out, std::vector<std::string>& errors);
void cmd_smooth(const SmoothArgs& a, std::ostream& out, std::vector<std::string>& errors);
void cmd_filter(const FilterArgs& a, std::ostream& out, std::vector<std::string>& errors);
void cmd_project(const ProjectArgs& a, std::ostream& out, std::vector<std::string>& errors);
void cmd_features(const FeaturesArgs& a, std::ostream& out, std::vector<std::string>& errors);
void cmd_fixture(const FixtureArgs& a, std::ostream& out);
void cmd_dock(const DockArgs& a, std::ostream& out);

}  // namespace surfspec::cli
