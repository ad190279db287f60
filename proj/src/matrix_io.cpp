#include "ntot/matrix_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace ntot {

namespace {

double read_entry(std::istream& in, const char* what) {
  std::string token;
  if (!(in >> token)) throw IoError(std::string(what) + ": too few entries");
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw IoError(std::string(what) + ": bad number '" + token + "'");
  }
  if (used != token.size())
    throw IoError(std::string(what) + ": bad number '" + token + "'");
  return value;
}

long long read_count(std::istream& in, const char* what) {
  long long n = -1;
  if (!(in >> n) || n < 0)
    throw IoError(std::string(what) + ": missing or invalid header");
  return n;
}

void expect_end(std::istream& in, const char* what) {
  std::string extra;
  if (in >> extra) throw IoError(std::string(what) + ": trailing data");
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_matrix(std::ostream& out, const DenseMatrix& a) {
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, const Vector& v) {
  out << v.size() << '\n';
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out << ' ';
    out << format_double(v(i));
  }
  out << '\n';
}

DenseMatrix read_matrix(std::istream& in) {
  const long long m = read_count(in, "matrix");
  const long long n = read_count(in, "matrix");
  if (m < 1 || n < 1) throw IoError("matrix: shape must be at least 1x1");
  std::vector<double> entries(static_cast<std::size_t>(m * n));
  for (double& e : entries) e = read_entry(in, "matrix");
  expect_end(in, "matrix");
  return DenseMatrix(m, n, entries);
}

Vector read_vector(std::istream& in) {
  const long long n = read_count(in, "vector");
  Vector v(n);
  for (long long i = 0; i < n; ++i) v(i) = read_entry(in, "vector");
  expect_end(in, "vector");
  require_finite(v, "vector");
  return v;
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_matrix(out, a);
  if (!out) throw IoError("write failed: " + path.string());
}

void save_vector(const std::filesystem::path& path, const Vector& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_vector(out, v);
  if (!out) throw IoError("write failed: " + path.string());
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_matrix(in);
}

Vector load_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_vector(in);
}

}  // namespace ntot
