#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "surfspec/cleanup.hpp"
#include "surfspec/harmonics.hpp"
#include "surfspec/mesh.hpp"
#include "surfspec/mesh_io.hpp"
#include "surfspec/spectral.hpp"

namespace surfspec::cli {

using Json = nlohmann::ordered_json;

/// Reads a flat key=value file and appends "--key=value" for every key for
/// which `given(key)` is false. Blank lines and '#' comments are skipped.
/// Throws ConfigError on a malformed line.
std::vector<std::string> apply_config_file(std::vector<std::string> args, const std::filesystem::path& path,
                                           const std::function<bool(const std::string&)>& given);

/// Loaded, cleaned mesh plus the bookkeeping the reports need.
struct PreparedMesh {
  std::string input;
  TriangleMesh mesh;
  MeshLoadReport load;
  CleanupReport cleanup;
  std::vector<int> source_vertex;
  std::size_t input_vertices = 0;
};

PreparedMesh prepare_mesh(const std::string& input, const std::string& format, double merge_eps);

std::optional<MeshFormat> format_option(const std::string& name);

SpectrumRequest spectrum_request(const std::optional<int>& k, const std::optional<double>& lambda_max);

Json mesh_json(const PreparedMesh& m);
Json request_json(const SpectrumRequest& r);
Json solver_json(const SolveDiagnostics& d);

/// Field CSV indexed by the input mesh's vertices, restricted to the
/// vertices that survived cleanup.
SurfaceField load_field_for(const std::string& path, const PreparedMesh& m);

/// "-" reads standard input.
std::string stem_of(const std::string& input);

void write_json(const std::filesystem::path& path, const Json& j);

/// Runs `fn(input, out_dir)` over the inputs with up to `jobs` workers. A
/// single input writes into `out`; several inputs write into out/<stem>/.
/// Every input is attempted; the first failure in input order is rethrown
/// after the rest finish, and each failure is described in `errors`.
void for_each_input(const std::vector<std::string>& inputs, const std::filesystem::path& out, int jobs,
                    const std::function<void(const std::string&, const std::filesystem::path&)>& fn,
                    std::vector<std::string>& errors);

}  // namespace surfspec::cli
