#include "surfspec/atoms.hpp"

#include <cctype>
#include <set>

#include "surfspec/error.hpp"
#include "surfspec/mesh_io.hpp"
#include "text_util.hpp"

namespace surfspec {

using detail::LineCursor;
using detail::split_ws;
using detail::to_double;
using detail::to_integer;
using detail::trim;

std::string normalize_element(std::string_view symbol) {
  std::string out;
  for (char c : trim(symbol)) {
    if (!std::isalpha(static_cast<unsigned char>(c))) continue;
    out.push_back(static_cast<char>(out.empty() ? std::toupper(static_cast<unsigned char>(c))
                                                : std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

void AtomSet::validate() const {
  const std::size_t n = positions.size();
  if (elements.size() != n) throw ParseError(0, "atom positions and elements differ in length");
  if (!charges.empty() && charges.size() != n) throw ParseError(0, "charge column length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (elements[i].empty()) throw ParseError(0, "atom " + std::to_string(i) + " has an empty element symbol");
  }
}

AtomSet AtomSet::transformed(const Eigen::Matrix3d& linear, const Vec3& translation) const {
  AtomSet out = *this;
  for (Vec3& p : out.positions) p = linear * p + translation;
  return out;
}

namespace {

ParsedAtoms parse_xyz(std::string_view text) {
  LineCursor cursor(text);
  std::string_view raw;
  // Leading blank lines are tolerated.
  std::optional<long long> count;
  while (cursor.next(raw)) {
    if (trim(raw).empty()) continue;
    count = to_integer(trim(raw));
    if (!count || *count < 0) throw ParseError(cursor.line_no(), "malformed XYZ atom count");
    break;
  }
  if (!count) throw ParseError(0, "empty XYZ input");
  const std::size_t count_line = cursor.line_no();
  if (!cursor.next(raw)) throw ParseError(cursor.line_no(), "missing XYZ comment line");

  ParsedAtoms parsed;
  AtomSet& atoms = parsed.atoms;
  bool all_charged = true;
  std::vector<double> charges;
  long long rows = 0;
  while (cursor.next(raw)) {
    const std::string_view s = trim(raw);
    if (s.empty()) continue;
    if (rows == *count) {
      throw ParseError(count_line, "XYZ header declares " + std::to_string(*count) +
                                       " atoms but more rows follow (line " +
                                       std::to_string(cursor.line_no()) + ")");
    }
    const auto tok = split_ws(s);
    const std::size_t line = cursor.line_no();
    if (tok.size() < 4) throw ParseError(line, "expected 'element x y z'");
    Vec3 p;
    for (int d = 0; d < 3; ++d) {
      const auto v = to_double(tok[1 + d]);
      if (!v) throw ParseError(line, "malformed coordinate '" + std::string(tok[1 + d]) + "'");
      p[d] = *v;
    }
    atoms.positions.push_back(p);
    atoms.elements.push_back(normalize_element(tok[0]));
    if (atoms.elements.back().empty()) throw ParseError(line, "missing element symbol");
    std::optional<double> charge;
    if (tok.size() >= 5) charge = to_double(tok[4]);
    all_charged = all_charged && charge.has_value();
    charges.push_back(charge.value_or(0.0));
    ++rows;
  }
  if (rows != *count) {
    throw ParseError(count_line, "XYZ header declares " + std::to_string(*count) + " atoms but " +
                                     std::to_string(rows) + " rows follow");
  }
  if (rows == 0) throw ParseError(count_line, "empty atom set");
  if (all_charged) atoms.charges = std::move(charges);
  return parsed;
}

std::string_view column(std::string_view line, std::size_t first, std::size_t last) {
  // 1-based inclusive PDB column range, clipped to the line.
  if (line.size() < first) return {};
  return line.substr(first - 1, std::min(last, line.size()) - first + 1);
}

std::string element_from_atom_name(std::string_view field) {
  // Two-letter elements start in column 13; one-letter ones are right-shifted
  // to column 14 (" CA " is a carbon, "CA  " calcium).
  if (field.size() >= 2 && std::isalpha(static_cast<unsigned char>(field[0])) &&
      std::isalpha(static_cast<unsigned char>(field[1]))) {
    static const std::set<std::string> two_letter = {"Br", "Ca", "Cd", "Cl", "Co", "Cu", "Fe", "Li",
                                                     "Mg", "Mn", "Na", "Ni", "Se", "Zn"};
    const std::string candidate = normalize_element(field.substr(0, 2));
    if (two_letter.count(candidate)) return candidate;
  }
  for (char c : field) {
    if (std::isalpha(static_cast<unsigned char>(c))) return normalize_element(std::string_view(&c, 1));
  }
  return {};
}

ParsedAtoms parse_pdb(std::string_view text) {
  LineCursor cursor(text);
  std::string_view line;
  ParsedAtoms parsed;
  AtomSet& atoms = parsed.atoms;
  bool any_charge = false;
  std::vector<double> charges;
  while (cursor.next(line)) {
    const std::string_view record = column(line, 1, 6);
    if (record.substr(0, 6) == "ENDMDL") break;
    if (record != "ATOM  " && record != "HETATM" && trim(record) != "ATOM") continue;
    const std::size_t ln = cursor.line_no();
    if (line.size() < 54) throw ParseError(ln, "ATOM/HETATM record shorter than 54 columns");
    const std::string_view altloc = column(line, 17, 17);
    if (!altloc.empty() && altloc[0] != ' ' && altloc[0] != 'A') {
      ++parsed.report.skipped_altloc;
      continue;
    }
    Vec3 p;
    for (int d = 0; d < 3; ++d) {
      const std::string_view field = column(line, 31 + 8 * d, 38 + 8 * d);
      const auto v = to_double(field);
      if (!v) throw ParseError(ln, "malformed coordinate field '" + std::string(field) + "'");
      p[d] = *v;
    }
    const std::string_view name_field = column(line, 13, 16);
    const std::string_view name = trim(name_field);
    std::string element = normalize_element(column(line, 77, 78));
    if (element.empty()) element = element_from_atom_name(name_field);
    if (element.empty()) throw ParseError(ln, "cannot determine element symbol");

    atoms.positions.push_back(p);
    atoms.elements.push_back(std::move(element));
    atoms.atom_names.emplace_back(name);
    atoms.residue_names.emplace_back(trim(column(line, 18, 20)));
    atoms.chain_ids.emplace_back(trim(column(line, 22, 22)));
    atoms.residue_numbers.push_back(static_cast<int>(to_integer(column(line, 23, 26)).value_or(0)));

    // Formal charge, columns 79-80, e.g. "1+" or "2-".
    double q = 0.0;
    const std::string_view c = trim(column(line, 79, 80));
    if (c.size() == 2 && std::isdigit(static_cast<unsigned char>(c[0])) && (c[1] == '+' || c[1] == '-')) {
      q = (c[0] - '0') * (c[1] == '-' ? -1.0 : 1.0);
      any_charge = true;
    }
    charges.push_back(q);
  }
  if (atoms.empty()) throw ParseError(0, "empty atom set (no ATOM/HETATM records)");
  if (any_charge) atoms.charges = std::move(charges);
  return parsed;
}

}  // namespace

ParsedAtoms parse_atoms(std::string_view text, AtomFormat format) {
  ParsedAtoms parsed = format == AtomFormat::xyz ? parse_xyz(text) : parse_pdb(text);
  parsed.atoms.validate();
  return parsed;
}

ParsedAtoms load_atoms(const std::filesystem::path& path, std::optional<AtomFormat> format) {
  if (!format) {
    const std::string ext = path.extension().string();
    if (ext == ".xyz" || ext == ".XYZ") format = AtomFormat::xyz;
    if (ext == ".pdb" || ext == ".PDB" || ext == ".ent") format = AtomFormat::pdb;
  }
  if (!format) throw ParseError(0, "cannot determine atom format of '" + path.string() + "'");
  return parse_atoms(read_text_file(path), *format);
}

}  // namespace surfspec
