#include "nmq/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nmq {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_matrix_csv(std::ostream& os, const CMatrix& m) {
  os << "row,col,re,im\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << i << ',' << j << ',' << format_double(m(i, j).real()) << ',' << format_double(m(i, j).imag()) << '\n';
}

void write_matrix_csv(const std::filesystem::path& path, const CMatrix& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_matrix_csv(os, m);
}

CMatrix read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("row,col,re,im", 0) != 0)
    throw std::runtime_error("matrix CSV must start with header row,col,re,im");
  struct Entry {
    long i, j;
    double re, im;
  };
  std::vector<Entry> entries;
  long rows = 0, cols = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Entry e{};
    char c1, c2, c3;
    if (!(ls >> e.i >> c1 >> e.j >> c2 >> e.re >> c3 >> e.im) || c1 != ',' || c2 != ',' || c3 != ',')
      throw std::runtime_error("malformed matrix CSV line: " + line);
    if (e.i < 0 || e.j < 0) throw std::runtime_error("negative index in matrix CSV");
    rows = std::max(rows, e.i + 1);
    cols = std::max(cols, e.j + 1);
    entries.push_back(e);
  }
  CMatrix m = CMatrix::Zero(rows, cols);
  for (const auto& e : entries) m(e.i, e.j) = cplx(e.re, e.im);
  return m;
}

CMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_matrix_csv(is);
}

void write_rate_csv(std::ostream& os, const std::vector<RateRow>& rows, int dim) {
  os << 't';
  for (int l = 1; l <= dim; ++l) os << ",gamma_" << l;
  os << ",f_nM\n";
  for (const auto& r : rows) {
    os << format_double(r.t);
    for (Eigen::Index l = 0; l < r.rates.size(); ++l) os << ',' << format_double(r.rates(l));
    os << ',' << format_double(r.f_nm) << '\n';
  }
}

}  // namespace nmq
