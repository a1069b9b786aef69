// SPDX-License-Identifier: Apache-2.0
#include "matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

namespace igm::mm {

namespace {

struct Header {
  bool matrix = false;
  bool coordinate = false;
  bool array = false;
  bool real_field = false;
  bool symmetric = false;
  bool general = false;
};

[[noreturn]] void fail(const std::string& path, long line, const std::string& msg) {
  throw Error(path + ":" + std::to_string(line) + ": " + msg);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

Header parse_banner(std::ifstream& in, const std::string& path) {
  std::string banner;
  if (!std::getline(in, banner)) fail(path, 1, "empty file");
  std::istringstream iss(banner);
  std::string tag, object, format, field, symmetry;
  iss >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") fail(path, 1, "missing %%MatrixMarket banner");
  Header h;
  h.matrix = lower(object) == "matrix";
  h.coordinate = lower(format) == "coordinate";
  h.array = lower(format) == "array";
  h.real_field = lower(field) == "real" || lower(field) == "integer";
  h.symmetric = lower(symmetry) == "symmetric";
  h.general = lower(symmetry) == "general";
  if (!h.matrix) fail(path, 1, "unsupported object '" + object + "'");
  if (!h.real_field) fail(path, 1, "unsupported field '" + field + "' (real expected)");
  if (!h.symmetric && !h.general) fail(path, 1, "unsupported symmetry '" + symmetry + "'");
  return h;
}

/// Skips comments and blank lines; returns false at end of file.
bool next_data_line(std::ifstream& in, std::string& out, long& line) {
  while (std::getline(in, out)) {
    ++line;
    size_t pos = out.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (out[pos] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace

SparseMat read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open matrix file '" + path + "'");
  const Header h = parse_banner(in, path);
  if (!h.coordinate) fail(path, 1, "array format not supported for matrices");

  long line = 1;
  std::string data;
  if (!next_data_line(in, data, line)) fail(path, line, "missing size line");
  long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream iss(data);
    if (!(iss >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0)
      fail(path, line, "malformed size line '" + data + "'");
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(h.symmetric ? 2 * nnz : nnz));
  for (long k = 0; k < nnz; ++k) {
    if (!next_data_line(in, data, line))
      fail(path, line, "unexpected end of file; expected " + std::to_string(nnz) +
                           " entries, got " + std::to_string(k));
    std::istringstream iss(data);
    long i = 0, j = 0;
    double v = 0;
    if (!(iss >> i >> j >> v)) fail(path, line, "malformed entry '" + data + "'");
    if (i < 1 || i > rows || j < 1 || j > cols)
      fail(path, line, "index out of range in '" + data + "'");
    trips.emplace_back(i - 1, j - 1, v);
    if (h.symmetric && i != j) trips.emplace_back(j - 1, i - 1, v);
  }

  SparseMat a(rows, cols);
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

Vec read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vector file '" + path + "'");
  const Header h = parse_banner(in, path);

  long line = 1;
  std::string data;
  if (!next_data_line(in, data, line)) fail(path, line, "missing size line");
  std::istringstream iss(data);

  if (h.array) {
    long rows = 0, cols = 0;
    if (!(iss >> rows >> cols) || rows <= 0 || cols != 1)
      fail(path, line, "expected an n-by-1 array size line, got '" + data + "'");
    Vec v(rows);
    for (long k = 0; k < rows; ++k) {
      if (!next_data_line(in, data, line)) fail(path, line, "unexpected end of file");
      std::istringstream e(data);
      if (!(e >> v[k])) fail(path, line, "malformed value '" + data + "'");
    }
    return v;
  }

  long rows = 0, cols = 0, nnz = 0;
  if (!(iss >> rows >> cols >> nnz) || rows <= 0 || cols != 1)
    fail(path, line, "expected an n-by-1 coordinate size line, got '" + data + "'");
  Vec v = Vec::Zero(rows);
  for (long k = 0; k < nnz; ++k) {
    if (!next_data_line(in, data, line)) fail(path, line, "unexpected end of file");
    std::istringstream e(data);
    long i = 0, j = 0;
    double val = 0;
    if (!(e >> i >> j >> val) || i < 1 || i > rows || j != 1)
      fail(path, line, "malformed entry '" + data + "'");
    v[i - 1] = val;
  }
  return v;
}

void write_matrix(const std::string& path, const SparseMat& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
  out.precision(17);
  for (Index i = 0; i < a.outerSize(); ++i)
    for (SparseMat::InnerIterator it(a, i); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
  if (!out) throw Error("write failed for '" + path + "'");
}

void write_vector(const std::string& path, const Vec& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  out.precision(17);
  for (Index i = 0; i < v.size(); ++i) out << v[i] << "\n";
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace igm::mm
