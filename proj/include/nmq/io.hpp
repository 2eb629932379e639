#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nmq/dynamics.hpp"

namespace nmq {

// 17 significant digits, round-trip exact.
std::string format_double(double x);

// Header "row,col,re,im", row-major.
void write_matrix_csv(std::ostream& os, const CMatrix& m);
void write_matrix_csv(const std::filesystem::path& path, const CMatrix& m);
CMatrix read_matrix_csv(std::istream& is);
CMatrix read_matrix_csv(const std::filesystem::path& path);

// Header "t,gamma_1,...,gamma_d,f_nM".
void write_rate_csv(std::ostream& os, const std::vector<RateRow>& rows, int dim);

}  // namespace nmq
