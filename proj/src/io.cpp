#include "surfspec/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

#include "surfspec/error.hpp"
#include "surfspec/mesh_io.hpp"
#include "text_util.hpp"

namespace surfspec {

using detail::format_g9;

std::string hash_hex(std::uint64_t hash) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string field_to_csv(const SurfaceField& field) {
  std::string out = "vertex";
  for (const std::string& name : field.names) out += "," + name;
  out += "\n";
  for (Eigen::Index i = 0; i < field.values.rows(); ++i) {
    out += std::to_string(i);
    for (Eigen::Index c = 0; c < field.values.cols(); ++c) out += "," + format_g9(field.values(i, c));
    out += "\n";
  }
  return out;
}

SurfaceField field_from_csv(std::string_view text, std::uint64_t mesh_hash) {
  detail::LineCursor cursor(text);
  std::string_view line;
  SurfaceField field;
  field.mesh_hash = mesh_hash;
  bool header = false;
  std::vector<std::vector<double>> rows;
  while (cursor.next(line)) {
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_char(line, ',');
    if (!header) {
      if (detail::trim(cells[0]) != "vertex") throw ParseError(cursor.line_no(), "expected header starting with 'vertex'");
      for (std::size_t c = 1; c < cells.size(); ++c) field.names.emplace_back(detail::trim(cells[c]));
      header = true;
      continue;
    }
    if (cells.size() != field.names.size() + 1) {
      throw ParseError(cursor.line_no(), "expected " + std::to_string(field.names.size() + 1) + " columns");
    }
    const auto index = detail::to_integer(cells[0]);
    if (!index || *index != static_cast<long long>(rows.size())) {
      throw ParseError(cursor.line_no(), "vertex indices must run 0..N-1 in order");
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = detail::to_double(cells[c]);
      if (!v) throw ParseError(cursor.line_no(), "malformed number '" + std::string(cells[c]) + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (!header) throw ParseError(0, "empty field CSV");
  field.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(field.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c) field.values(i, c) = rows[i][c];
  return field;
}

std::string eigenvalues_to_csv(const Eigen::VectorXd& eigenvalues) {
  std::string out = "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) out += std::to_string(i) + "," + format_g9(eigenvalues[i]) + "\n";
  return out;
}

namespace {

constexpr char kMagic[8] = {'S', 'S', 'P', 'B', 'A', 'S', 'I', 'S'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "basis container assumes a little-endian host");

class Writer {
public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  std::string take() { return std::move(out_); }

private:
  std::string out_;
};

class Reader {
public:
  explicit Reader(std::string_view in) : in_(in) {}
  void bytes(void* p, std::size_t n) {
    if (n > in_.size() - pos_) throw ParseError(0, "basis container truncated");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, sizeof v);
    return v;
  }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string basis_to_binary(const SpectralBasis& basis) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u32(0);
  const auto n = static_cast<std::uint64_t>(basis.vertex_count());
  const auto k = static_cast<std::uint64_t>(basis.size());
  w.u64(n);
  w.u64(k);
  w.u64(basis.mesh_hash());
  for (Eigen::Index i = 0; i < basis.size(); ++i) w.f64(basis.eigenvalues()[i]);
  const Eigen::MatrixXd& Z = basis.vectors();
  w.bytes(Z.data(), sizeof(double) * static_cast<std::size_t>(Z.size()));

  // The mass matrix is symmetric, so its compressed columns are CSR rows.
  const SparseSymMatrix::Storage& B = basis.mass().matrix();
  w.u64(static_cast<std::uint64_t>(B.nonZeros()));
  for (Eigen::Index c = 0; c <= B.outerSize(); ++c) w.u64(static_cast<std::uint64_t>(B.outerIndexPtr()[c]));
  for (Eigen::Index j = 0; j < B.nonZeros(); ++j) w.u64(static_cast<std::uint64_t>(B.innerIndexPtr()[j]));
  for (Eigen::Index j = 0; j < B.nonZeros(); ++j) w.f64(B.valuePtr()[j]);
  return w.take();
}

SpectralBasis basis_from_binary(std::string_view bytes) {
  Reader r(bytes);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw ParseError(0, "not a basis container (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw ParseError(0, "unsupported basis container version " + std::to_string(version));
  r.u32();
  const std::uint64_t n = r.u64();
  const std::uint64_t k = r.u64();
  const std::uint64_t hash = r.u64();
  if (k > n || (k + n * k) * 8 > r.remaining()) throw ParseError(0, "basis container truncated");
  Eigen::VectorXd lambda(static_cast<Eigen::Index>(k));
  for (std::uint64_t i = 0; i < k; ++i) lambda[static_cast<Eigen::Index>(i)] = r.f64();
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  r.bytes(Z.data(), sizeof(double) * n * k);

  const std::uint64_t nnz = r.u64();
  if ((n + 1 + 2 * nnz) * 8 != r.remaining()) throw ParseError(0, "basis container mass section has wrong size");
  std::vector<std::uint64_t> offsets(n + 1), cols(nnz);
  for (auto& v : offsets) v = r.u64();
  for (auto& v : cols) v = r.u64();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(nnz);
  for (std::uint64_t row = 0; row < n; ++row) {
    if (offsets[row] > offsets[row + 1] || offsets[row + 1] > nnz) throw ParseError(0, "corrupt CSR offsets");
    for (std::uint64_t j = offsets[row]; j < offsets[row + 1]; ++j) {
      if (cols[j] >= n) throw ParseError(0, "corrupt CSR column index");
      trips.emplace_back(static_cast<int>(row), static_cast<int>(cols[j]), 0.0);
    }
  }
  for (std::uint64_t j = 0; j < nnz; ++j) trips[j] = Eigen::Triplet<double>(trips[j].row(), trips[j].col(), r.f64());
  SparseSymMatrix::Storage B(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  B.setFromTriplets(trips.begin(), trips.end());

  SolveDiagnostics diag;
  return SpectralBasis(std::move(lambda), std::move(Z), std::make_shared<const SparseSymMatrix>(std::move(B)), hash,
                       SpectrumRequest::count(static_cast<int>(k)), std::move(diag));
}

void save_basis(const std::filesystem::path& path, const SpectralBasis& basis) {
  write_text_file(path, basis_to_binary(basis));
}

SpectralBasis load_basis(const std::filesystem::path& path) { return basis_from_binary(read_text_file(path)); }

}  // namespace surfspec
