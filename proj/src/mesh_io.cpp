#include "surfspec/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "surfspec/error.hpp"
#include "text_util.hpp"

namespace surfspec {

using detail::LineCursor;
using detail::split_ws;
using detail::to_double;
using detail::to_integer;
using detail::trim;

namespace {

std::string_view strip_comment(std::string_view line) {
  const std::size_t hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  return trim(line);
}

class MeshBuilder {
public:
  void add_vertex(const Vec3& p) { vertices_.push_back(p); }

  std::size_t vertex_count() const { return vertices_.size(); }

  void add_polygon(const std::vector<long long>& corners, std::size_t line) {
    if (corners.size() < 3) throw ParseError(line, "face with fewer than 3 vertices");
    const auto n = static_cast<long long>(vertices_.size());
    for (long long v : corners) {
      if (v < 0 || v >= n) throw IndexRangeError(line, v, vertices_.size());
    }
    for (std::size_t i = 1; i + 1 < corners.size(); ++i) {
      Face t{static_cast<int>(corners[0]), static_cast<int>(corners[i]), static_cast<int>(corners[i + 1])};
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
        throw ParseError(line, "face repeats a vertex index");
      }
      faces_.push_back(t);
    }
    if (corners.size() > 3) {
      ++report_.polygons_triangulated;
      report_.extra_triangles += corners.size() - 3;
    }
  }

  LoadedMesh finish() { return LoadedMesh{TriangleMesh(std::move(vertices_), std::move(faces_)), report_}; }

private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  MeshLoadReport report_;
};

Vec3 parse_point(const std::vector<std::string_view>& tok, std::size_t first, std::size_t line) {
  if (tok.size() < first + 3) throw ParseError(line, "expected three coordinates");
  Vec3 p;
  for (int d = 0; d < 3; ++d) {
    const auto v = to_double(tok[first + d]);
    if (!v) throw ParseError(line, "malformed coordinate '" + std::string(tok[first + d]) + "'");
    p[d] = *v;
  }
  return p;
}

LoadedMesh parse_off(std::string_view text) {
  LineCursor cursor(text);
  std::string_view raw;
  std::vector<std::string_view> pending;
  std::size_t line = 0;

  // Pulls the next non-empty, comment-stripped line.
  auto next_tokens = [&]() -> bool {
    while (cursor.next(raw)) {
      const std::string_view s = strip_comment(raw);
      if (s.empty()) continue;
      pending = split_ws(s);
      line = cursor.line_no();
      return true;
    }
    return false;
  };

  if (!next_tokens()) throw ParseError(0, "empty OFF input");
  if (pending.front() == "OFF") {
    pending.erase(pending.begin());
    if (pending.empty() && !next_tokens()) throw ParseError(line, "missing OFF counts");
  } else if (pending.front().size() > 3 && pending.front().substr(pending.front().size() - 3) == "OFF") {
    throw ParseError(line, "unsupported OFF variant '" + std::string(pending.front()) + "'");
  }
  if (pending.size() < 2) throw ParseError(line, "expected vertex and face counts");
  const auto nv = to_integer(pending[0]);
  const auto nf = to_integer(pending[1]);
  if (!nv || !nf || *nv < 0 || *nf < 0) throw ParseError(line, "malformed OFF counts");

  MeshBuilder builder;
  for (long long i = 0; i < *nv; ++i) {
    if (!next_tokens()) throw ParseError(cursor.line_no(), "unexpected end of file in vertex list");
    builder.add_vertex(parse_point(pending, 0, line));
  }
  std::vector<long long> corners;
  for (long long f = 0; f < *nf; ++f) {
    if (!next_tokens()) throw ParseError(cursor.line_no(), "unexpected end of file in face list");
    const auto count = to_integer(pending[0]);
    if (!count || *count < 0) throw ParseError(line, "malformed face vertex count");
    if (pending.size() < static_cast<std::size_t>(*count) + 1) throw ParseError(line, "face line too short");
    corners.clear();
    for (long long c = 0; c < *count; ++c) {
      const auto idx = to_integer(pending[c + 1]);
      if (!idx) throw ParseError(line, "malformed vertex index '" + std::string(pending[c + 1]) + "'");
      corners.push_back(*idx);
    }
    builder.add_polygon(corners, line);
  }
  return builder.finish();
}

LoadedMesh parse_obj(std::string_view text) {
  LineCursor cursor(text);
  std::string_view raw;
  MeshBuilder builder;
  std::vector<long long> corners;
  while (cursor.next(raw)) {
    const std::string_view s = strip_comment(raw);
    if (s.empty()) continue;
    const auto tok = split_ws(s);
    const std::size_t line = cursor.line_no();
    if (tok[0] == "v") {
      builder.add_vertex(parse_point(tok, 1, line));
    } else if (tok[0] == "f") {
      corners.clear();
      for (std::size_t c = 1; c < tok.size(); ++c) {
        std::string_view ref = tok[c];
        const std::size_t slash = ref.find('/');
        if (slash != std::string_view::npos) ref = ref.substr(0, slash);
        const auto idx = to_integer(ref);
        if (!idx || *idx == 0) throw ParseError(line, "malformed vertex reference '" + std::string(tok[c]) + "'");
        // 1-based; negative indices count back from the latest vertex.
        corners.push_back(*idx > 0 ? *idx - 1 : static_cast<long long>(builder.vertex_count()) + *idx);
      }
      builder.add_polygon(corners, line);
    }
  }
  return builder.finish();
}

struct PlyElement {
  std::string name;
  long long count = 0;
  std::vector<std::string> properties;
  std::vector<bool> is_list;
};

LoadedMesh parse_ply(std::string_view text) {
  LineCursor cursor(text);
  std::string_view raw;
  if (!cursor.next(raw) || trim(raw) != "ply") throw ParseError(1, "missing 'ply' magic");

  std::vector<PlyElement> elements;
  bool have_format = false;
  while (true) {
    if (!cursor.next(raw)) throw ParseError(cursor.line_no(), "unterminated PLY header");
    const auto tok = split_ws(raw);
    const std::size_t line = cursor.line_no();
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw ParseError(line, "malformed format line");
      if (tok[1] != "ascii") throw ParseError(line, "binary PLY is not supported (only ascii)");
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() < 3) throw ParseError(line, "malformed element line");
      const auto count = to_integer(tok[2]);
      if (!count || *count < 0) throw ParseError(line, "malformed element count");
      elements.push_back(PlyElement{std::string(tok[1]), *count, {}, {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError(line, "property before element");
      if (tok.size() >= 5 && tok[1] == "list") {
        elements.back().properties.emplace_back(tok[4]);
        elements.back().is_list.push_back(true);
      } else if (tok.size() >= 3) {
        elements.back().properties.emplace_back(tok[2]);
        elements.back().is_list.push_back(false);
      } else {
        throw ParseError(line, "malformed property line");
      }
    } else {
      throw ParseError(line, "unknown PLY header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!have_format) throw ParseError(cursor.line_no(), "PLY header lacks a format line");

  MeshBuilder builder;
  std::vector<long long> corners;
  for (const PlyElement& el : elements) {
    const bool vertex = el.name == "vertex";
    const bool face = el.name == "face";
    std::array<int, 3> xyz{-1, -1, -1};
    if (vertex) {
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        if (el.properties[p] == "x") xyz[0] = static_cast<int>(p);
        if (el.properties[p] == "y") xyz[1] = static_cast<int>(p);
        if (el.properties[p] == "z") xyz[2] = static_cast<int>(p);
      }
      if (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0) throw ParseError(0, "PLY vertex element lacks x/y/z");
    }
    for (long long i = 0; i < el.count; ++i) {
      if (!cursor.next(raw)) throw ParseError(cursor.line_no(), "unexpected end of PLY data");
      const auto tok = split_ws(raw);
      const std::size_t line = cursor.line_no();
      if (!vertex && !face) continue;
      // Walk the properties, expanding lists.
      std::size_t t = 0;
      std::array<double, 3> coords{};
      bool got_list = false;
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        if (t >= tok.size()) throw ParseError(line, "PLY data line too short");
        if (el.is_list[p]) {
          const auto n = to_integer(tok[t]);
          if (!n || *n < 0) throw ParseError(line, "malformed PLY list length");
          if (tok.size() < t + 1 + static_cast<std::size_t>(*n)) throw ParseError(line, "PLY list too short");
          if (face && !got_list) {
            corners.clear();
            for (long long c = 0; c < *n; ++c) {
              const auto idx = to_integer(tok[t + 1 + c]);
              if (!idx) throw ParseError(line, "malformed vertex index");
              corners.push_back(*idx);
            }
            got_list = true;
          }
          t += 1 + static_cast<std::size_t>(*n);
        } else {
          if (vertex) {
            for (int d = 0; d < 3; ++d) {
              if (static_cast<int>(p) == xyz[d]) {
                const auto v = to_double(tok[t]);
                if (!v) throw ParseError(line, "malformed coordinate '" + std::string(tok[t]) + "'");
                coords[d] = *v;
              }
            }
          }
          ++t;
        }
      }
      if (vertex) builder.add_vertex(Vec3(coords[0], coords[1], coords[2]));
      if (face) {
        if (!got_list) throw ParseError(line, "PLY face element lacks an index list");
        builder.add_polygon(corners, line);
      }
    }
  }
  return builder.finish();
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

LoadedMesh parse_mesh(std::string_view text, MeshFormat format) {
  switch (format) {
    case MeshFormat::off: return parse_off(text);
    case MeshFormat::obj: return parse_obj(text);
    case MeshFormat::ply: return parse_ply(text);
  }
  throw ParseError(0, "unknown mesh format");
}

std::optional<MeshFormat> parse_mesh_format_name(std::string_view name) {
  const std::string n = lower(name);
  if (n == "off") return MeshFormat::off;
  if (n == "obj") return MeshFormat::obj;
  if (n == "ply") return MeshFormat::ply;
  return std::nullopt;
}

std::optional<MeshFormat> format_from_extension(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext.size() < 2) return std::nullopt;
  return parse_mesh_format_name(std::string_view(ext).substr(1));
}

std::optional<MeshFormat> sniff_mesh_format(std::string_view text) {
  LineCursor cursor(text);
  std::string_view raw;
  while (cursor.next(raw)) {
    const std::string_view s = strip_comment(raw);
    if (s.empty()) continue;
    if (s == "ply") return MeshFormat::ply;
    if (s.substr(0, 3) == "OFF") return MeshFormat::off;
    const auto tok = split_ws(s);
    if (tok[0] == "v" || tok[0] == "vn" || tok[0] == "vt" || tok[0] == "o" || tok[0] == "g" ||
        tok[0] == "mtllib" || tok[0] == "f") {
      return MeshFormat::obj;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

std::string read_text_file(const std::filesystem::path& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

LoadedMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format) {
  const std::string text = read_text_file(path);
  if (!format) format = format_from_extension(path);
  if (!format) format = sniff_mesh_format(text);
  if (!format) throw ParseError(0, "cannot determine mesh format of '" + path.string() + "'");
  return parse_mesh(text, *format);
}

std::string to_off(const TriangleMesh& mesh) {
  std::string out = "OFF\n";
  out += std::to_string(mesh.vertex_count()) + " " + std::to_string(mesh.face_count()) + " 0\n";
  for (const Vec3& v : mesh.vertices()) {
    out += detail::format_g17(v.x()) + " " + detail::format_g17(v.y()) + " " + detail::format_g17(v.z()) + "\n";
  }
  for (const Face& t : mesh.faces()) {
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  return out;
}

std::string to_obj(const TriangleMesh& mesh) {
  std::string out;
  for (const Vec3& v : mesh.vertices()) {
    out += "v " + detail::format_g17(v.x()) + " " + detail::format_g17(v.y()) + " " + detail::format_g17(v.z()) + "\n";
  }
  for (const Face& t : mesh.faces()) {
    out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
  }
  return out;
}

void save_mesh(const std::filesystem::path& path, const TriangleMesh& mesh, MeshFormat format) {
  switch (format) {
    case MeshFormat::off: write_text_file(path, to_off(mesh)); return;
    case MeshFormat::obj: write_text_file(path, to_obj(mesh)); return;
    case MeshFormat::ply: break;
  }
  throw IoError("writing PLY is not supported");
}

}  // namespace surfspec
