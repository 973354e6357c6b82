#include "blockgivens/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <vector>

namespace blockgivens {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

struct Entry {
  Index row, col;
  double value;
  long line;
};

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw mm_parse_error("empty input", 1);
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw mm_parse_error("missing %%MatrixMarket banner", lineno);
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw mm_parse_error("unsupported object '" + object + "'", lineno);
  if (format != "coordinate") throw mm_parse_error("unsupported format '" + format + "'", lineno);
  const bool pattern = field == "pattern";
  if (field != "real" && field != "integer" && !pattern) {
    throw mm_parse_error("unsupported field '" + field + "'", lineno);
  }
  const bool symmetric = symmetry == "symmetric";
  if (symmetry != "general" && !symmetric) {
    throw mm_parse_error("unsupported symmetry '" + symmetry + "'", lineno);
  }

  long long m = -1, n = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%' || blank(line)) continue;
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> m >> n >> nnz) || (ss >> extra)) {
      throw mm_parse_error("expected 'rows cols nonzeros'", lineno);
    }
    break;
  }
  if (m < 0) throw mm_parse_error("missing size line", lineno);
  if (m == 0 || n == 0 || nnz < 0) throw mm_parse_error("invalid dimensions", lineno);
  if (symmetric && m != n) throw mm_parse_error("symmetric matrix must be square", lineno);

  std::vector<Entry> entries;
  entries.reserve(std::size_t(nnz));
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%' || blank(line)) continue;
    if (static_cast<long long>(entries.size()) == nnz) throw mm_parse_error("more entries than declared", lineno);
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double v = 1.0;
    std::string extra;
    if (!(ss >> i >> j) || (!pattern && !(ss >> v)) || (ss >> extra)) {
      throw mm_parse_error("malformed entry", lineno);
    }
    if (i < 1 || i > m || j < 1 || j > n) {
      throw mm_parse_error("index (" + std::to_string(i) + ", " + std::to_string(j) +
                               ") outside " + std::to_string(m) + "x" + std::to_string(n),
                           lineno);
    }
    if (!std::isfinite(v)) throw mm_parse_error("non-finite value", lineno);
    if (symmetric && j > i) throw mm_parse_error("symmetric file has an upper-triangle entry", lineno);
    entries.push_back({Index(i - 1), Index(j - 1), v, lineno});
  }
  if (static_cast<long long>(entries.size()) != nnz) {
    throw mm_parse_error("declared " + std::to_string(nnz) + " entries, found " +
                             std::to_string(entries.size()),
                         lineno);
  }

  std::map<std::pair<Index, Index>, long> seen;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(entries.size() * (symmetric ? 2 : 1));
  for (const Entry& e : entries) {
    const auto [it, fresh] = seen.emplace(std::make_pair(e.row, e.col), e.line);
    if (!fresh) {
      throw mm_parse_error("duplicate entry, first given on line " + std::to_string(it->second),
                           e.line);
    }
    trips.emplace_back(e.row, e.col, e.value);
    if (symmetric && e.row != e.col) trips.emplace_back(e.col, e.row, e.value);
  }
  SparseMatrix M(m, n);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open " + path);
  return read_matrix_market(in);
}

void write_matrix_market(const SparseMatrix& M, std::ostream& out) {
  std::vector<Entry> entries;
  for (Index j = 0; j < M.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(M, j); it; ++it) {
      if (it.value() != 0.0) entries.push_back({it.row(), it.col(), it.value(), 0});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << ' ' << M.cols() << ' ' << entries.size() << '\n';
  char buf[64];
  for (const Entry& e : entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    out << e.row + 1 << ' ' << e.col + 1 << ' ' << buf << '\n';
  }
}

void write_matrix_market(const SparseMatrix& M, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write " + path);
  write_matrix_market(M, out);
}

void write_matrix_market(const Matrix& M, const std::string& path) {
  write_matrix_market(SparseMatrix(M.sparseView(0.0, 0.0)), path);
}

}  // namespace blockgivens
