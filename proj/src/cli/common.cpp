#include "common.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include "surfspec/error.hpp"
#include "surfspec/io.hpp"
#include "text_util.hpp"

namespace surfspec::cli {

std::vector<std::string> apply_config_file(std::vector<std::string> args, const std::filesystem::path& path,
                                           const std::function<bool(const std::string&)>& given) {
  const std::string text = read_text_file(path);
  detail::LineCursor cursor(text);
  std::string_view line;
  while (cursor.next(line)) {
    const std::string_view t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(cursor.line_no()) + ": expected key=value");
    }
    const std::string key(detail::trim(t.substr(0, eq)));
    const std::string value(detail::trim(t.substr(eq + 1)));
    if (key.empty()) throw ConfigError(path.string() + ":" + std::to_string(cursor.line_no()) + ": empty key");
    if (key == "config") throw ConfigError("config files cannot include other config files");
    if (given(key)) continue;
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::optional<MeshFormat> format_option(const std::string& name) {
  if (name.empty()) return std::nullopt;
  const auto f = parse_mesh_format_name(name);
  if (!f) throw ConfigError("unknown mesh format '" + name + "' (expected off, obj or ply)");
  return f;
}

PreparedMesh prepare_mesh(const std::string& input, const std::string& format, double merge_eps) {
  LoadedMesh loaded = load_mesh(input, format_option(format));
  PreparedMesh out;
  out.input = input;
  out.input_vertices = loaded.mesh.vertex_count();
  out.load = loaded.report;
  CleanupResult cleaned = cleanup_mesh(loaded.mesh, merge_eps);
  out.mesh = std::move(cleaned.mesh);
  out.cleanup = cleaned.report;
  out.source_vertex = std::move(cleaned.source_vertex);
  return out;
}

SpectrumRequest spectrum_request(const std::optional<int>& k, const std::optional<double>& lambda_max) {
  if (k && lambda_max) throw ConfigError("give either --k or --lambda-max, not both");
  if (k) {
    if (*k < 1) throw ConfigError("--k must be positive");
    return SpectrumRequest::count(*k);
  }
  return SpectrumRequest::cutoff(lambda_max.value_or(kDefaultLambdaMax));
}

Json mesh_json(const PreparedMesh& m) {
  Json j;
  j["input"] = m.input;
  j["input_vertices"] = m.input_vertices;
  j["vertices"] = m.mesh.vertex_count();
  j["faces"] = m.mesh.face_count();
  j["area"] = surface_area(m.mesh);
  j["euler_characteristic"] = euler_characteristic(m.mesh);
  j["hash"] = hash_hex(m.mesh.hash());
  j["polygons_triangulated"] = m.load.polygons_triangulated;
  Json c;
  c["merged_vertices"] = m.cleanup.merged_vertices;
  c["degenerate_faces_removed"] = m.cleanup.degenerate_faces_removed;
  c["zero_area_faces_removed"] = m.cleanup.zero_area_faces_removed;
  c["duplicate_faces_removed"] = m.cleanup.duplicate_faces_removed;
  c["components_dropped"] = m.cleanup.components_dropped;
  c["faces_in_dropped_components"] = m.cleanup.faces_in_dropped_components;
  c["unreferenced_vertices_removed"] = m.cleanup.unreferenced_vertices_removed;
  c["summary"] = m.cleanup.summary();
  j["cleanup"] = c;
  return j;
}

Json request_json(const SpectrumRequest& r) {
  Json j;
  if (r.k) j["k"] = *r.k;
  if (r.lambda_max) j["lambda_max"] = *r.lambda_max;
  return j;
}

Json solver_json(const SolveDiagnostics& d) {
  Json j;
  j["dense"] = d.dense;
  j["krylov_dimension"] = d.krylov_dimension;
  j["operator_applications"] = d.operator_applications;
  j["shift"] = d.shift;
  j["max_relative_residual"] = d.max_relative_residual;
  j["max_residual"] = d.residuals.empty() ? 0.0 : *std::max_element(d.residuals.begin(), d.residuals.end());
  j["expansions"] = d.expansions;
  return j;
}

SurfaceField load_field_for(const std::string& path, const PreparedMesh& m) {
  const SurfaceField raw = field_from_csv(read_text_file(path), 0);
  if (raw.vertex_count() != static_cast<Eigen::Index>(m.input_vertices)) {
    throw GeometryError("field " + path + " has " + std::to_string(raw.vertex_count()) + " rows but the mesh has " +
                        std::to_string(m.input_vertices) + " vertices");
  }
  SurfaceField f;
  f.names = raw.names;
  f.mesh_hash = m.mesh.hash();
  f.values.resize(static_cast<Eigen::Index>(m.mesh.vertex_count()), raw.channels());
  for (std::size_t i = 0; i < m.source_vertex.size(); ++i) {
    f.values.row(static_cast<Eigen::Index>(i)) = raw.values.row(m.source_vertex[i]);
  }
  f.validate();
  return f;
}

std::string stem_of(const std::string& input) {
  if (input == "-") return "stdin";
  return std::filesystem::path(input).stem().string();
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

void for_each_input(const std::vector<std::string>& inputs, const std::filesystem::path& out, int jobs,
                    const std::function<void(const std::string&, const std::filesystem::path&)>& fn,
                    std::vector<std::string>& errors) {
  if (inputs.empty()) throw ConfigError("no input files");
  std::vector<std::filesystem::path> dirs;
  std::set<std::string> stems;
  for (const std::string& in : inputs) {
    if (inputs.size() == 1) {
      dirs.push_back(out);
      continue;
    }
    const std::string stem = stem_of(in);
    if (!stems.insert(stem).second) throw ConfigError("two inputs share the output name '" + stem + "'");
    dirs.push_back(out / stem);
  }
  for (const auto& d : dirs) {
    std::error_code ec;
    std::filesystem::create_directories(d, ec);
    if (ec) throw IoError("cannot create output directory " + d.string() + ": " + ec.message());
  }

  std::vector<std::exception_ptr> failures(inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      try {
        fn(inputs[i], dirs[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, static_cast<int>(inputs.size())));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::exception_ptr first;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!failures[i]) continue;
    if (!first) first = failures[i];
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      errors.push_back(inputs[i] + ": " + e.what());
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace surfspec::cli
