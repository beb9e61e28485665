#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "surfspec/mesh.hpp"

namespace surfspec {

enum class MeshFormat { off, obj, ply };

struct MeshLoadReport {
  /// Polygons with more than three corners that were fan-triangulated.
  std::size_t polygons_triangulated = 0;
  /// Triangles added beyond one per polygon by that triangulation.
  std::size_t extra_triangles = 0;
};

struct LoadedMesh {
  TriangleMesh mesh;
  MeshLoadReport report;
};

/// Parses OFF, OBJ or ASCII PLY text. Vertex order is preserved. Errors carry
/// the 1-based line number; binary PLY is rejected.
LoadedMesh parse_mesh(std::string_view text, MeshFormat format);

/// Reads `path` ("-" reads stdin). Without an explicit format the extension
/// decides, falling back to sniffing the content.
LoadedMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format = {});

std::optional<MeshFormat> format_from_extension(const std::filesystem::path& path);
std::optional<MeshFormat> sniff_mesh_format(std::string_view text);
std::optional<MeshFormat> parse_mesh_format_name(std::string_view name);

/// Serializers print coordinates with 9 significant digits.
std::string to_off(const TriangleMesh& mesh);
std::string to_obj(const TriangleMesh& mesh);

void save_mesh(const std::filesystem::path& path, const TriangleMesh& mesh, MeshFormat format);

/// Whole file as a string; "-" reads stdin. Throws IoError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace surfspec
