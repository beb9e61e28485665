#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "surfspec/harmonics.hpp"
#include "surfspec/spectral.hpp"

namespace surfspec {

/// "vertex,<name>,..." header, then one row per vertex; 9 significant digits.
std::string field_to_csv(const SurfaceField& field);

/// Inverse of field_to_csv. Rows must be in vertex order 0..N-1; the result
/// is bound to `mesh_hash`. Throws ParseError with the line number.
SurfaceField field_from_csv(std::string_view text, std::uint64_t mesh_hash);

/// "index,eigenvalue" rows.
std::string eigenvalues_to_csv(const Eigen::VectorXd& eigenvalues);

/// Binary basis container, all integers and floats little-endian:
///   char[8]  magic "SSPBASIS"
///   u32      version (1), u32 reserved (0)
///   u64      N, k, mesh hash
///   f64[k]   eigenvalues
///   f64[N*k] eigenvectors, column-major
///   u64      nnz of the mass matrix
///   u64[N+1] CSR row offsets, u64[nnz] column indices, f64[nnz] values
std::string basis_to_binary(const SpectralBasis& basis);

/// Throws ParseError on a bad magic, version or truncated payload.
SpectralBasis basis_from_binary(std::string_view bytes);

void save_basis(const std::filesystem::path& path, const SpectralBasis& basis);
SpectralBasis load_basis(const std::filesystem::path& path);

std::string hash_hex(std::uint64_t hash);

}  // namespace surfspec
