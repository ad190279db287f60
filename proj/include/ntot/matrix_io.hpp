#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ntot/linalg.hpp"

namespace ntot {

// Plain-text format: a header line "m n" (matrices) or "n" (vectors), then
// the entries, one matrix row per line, space separated. Values are written
// with 17 significant digits so that reading back is lossless.

/// Shortest-safe round-trip formatting ("%.17g").
std::string format_double(double value);

void write_matrix(std::ostream& out, const DenseMatrix& a);
void write_vector(std::ostream& out, const Vector& v);
/// Throws IoError on malformed input, std::invalid_argument on non-finite
/// entries.
DenseMatrix read_matrix(std::istream& in);
Vector read_vector(std::istream& in);

void save_matrix(const std::filesystem::path& path, const DenseMatrix& a);
void save_vector(const std::filesystem::path& path, const Vector& v);
DenseMatrix load_matrix(const std::filesystem::path& path);
Vector load_vector(const std::filesystem::path& path);

}  // namespace ntot
