#include "levreg/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "levreg/errors.hpp"

namespace levreg {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Token {
  std::string text;
  std::size_t column;
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    if (k == line.size()) break;
    const std::size_t start = k;
    while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    out.push_back({line.substr(start, k - start), start + 1});
  }
  return out;
}

long long parse_int(const Token& t, std::size_t line_no) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.text.c_str(), &end, 10);
  if (errno != 0 || end != t.text.c_str() + t.text.size())
    throw ParseError("expected an integer, got '" + t.text + "'", line_no, t.column);
  return v;
}

double parse_real(const Token& t, std::size_t line_no) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.text.c_str(), &end);
  if (errno == ERANGE || end != t.text.c_str() + t.text.size() || !std::isfinite(v))
    throw ParseError("expected a finite real, got '" + t.text + "'", line_no, t.column);
  return v;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

template <class F>
auto with_path(const std::string& path, F&& read) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return read(in);
  } catch (const ParseError& e) {
    if (e.line == 0) throw ParseError(path + ": " + e.detail);
    throw ParseError(path + ":" + std::to_string(e.line) + ":" + std::to_string(e.column) + ": " + e.detail);
  }
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market input");
  std::istringstream head(line);
  std::string banner, object, format, field, symmetry;
  head >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner");
  if (lower(object) != "matrix" || lower(format) != "coordinate")
    throw ParseError("only coordinate matrices are supported");
  if (lower(field) != "real" && lower(field) != "integer")
    throw ParseError("only real fields are supported, got '" + field + "'");
  if (lower(symmetry) != "general") throw ParseError("only general symmetry is supported");

  long long m = -1, n = -1, nnz = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    const std::vector<Token> t = tokenize(line);
    if (t.size() != 3) throw ParseError("size line needs rows, columns and nnz", line_no, 1);
    m = parse_int(t[0], line_no);
    n = parse_int(t[1], line_no);
    nnz = parse_int(t[2], line_no);
    const long long dims[3] = {m, n, nnz};
    for (int k = 0; k < 3; ++k)
      if (dims[k] < 0) throw ParseError("negative size", line_no, t[k].column);
    break;
  }
  if (m < 0) throw ParseError("missing size line", line_no, 1);

  std::vector<std::tuple<Index, Index, double>> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  while (static_cast<long long>(entries.size()) < nnz && std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '%') continue;
    const std::vector<Token> t = tokenize(line);
    if (t.size() != 3) throw ParseError("entry needs row, column and value", line_no, t.empty() ? 1 : t[0].column);
    const long long i = parse_int(t[0], line_no);
    const long long j = parse_int(t[1], line_no);
    const double v = parse_real(t[2], line_no);
    if (i < 1 || i > m) throw ParseError("row index out of range", line_no, t[0].column);
    if (j < 1 || j > n) throw ParseError("column index out of range", line_no, t[1].column);
    entries.emplace_back(i - 1, j - 1, v);
  }
  if (static_cast<long long>(entries.size()) != nnz)
    throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(entries.size()),
                     line_no + 1, 1);
  return SparseMatrix::from_triplets(m, n, std::move(entries));
}

SparseMatrix read_matrix_market_file(const std::string& path) {
  return with_path(path, [](std::istream& in) { return read_matrix_market(in); });
}

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    const RowView r = a.row(i);
    for (std::size_t k = 0; k < r.cols.size(); ++k) out << i + 1 << ' ' << r.cols[k] + 1 << ' ' << r.vals[k] << '\n';
  }
}

Vector read_vector(std::istream& in) {
  std::vector<double> vals;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::vector<Token> t = tokenize(line);
    if (t.size() != 1) throw ParseError("expected one value per line", line_no, t[1].column);
    vals.push_back(parse_real(t[0], line_no));
  }
  return Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size()));
}

Vector read_vector_file(const std::string& path) {
  return with_path(path, [](std::istream& in) { return read_vector(in); });
}

void write_vector(std::ostream& out, const Vector& v) {
  out << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

}  // namespace levreg
