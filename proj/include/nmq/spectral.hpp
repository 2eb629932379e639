#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "nmq/nambu.hpp"

namespace nmq {

inline constexpr double kMaxCondition = 1e8;

class DefectiveMatrixError : public std::runtime_error {
 public:
  explicit DefectiveMatrixError(double condition);
  double condition() const { return condition_; }

 private:
  double condition_;
};

// Eigen-decomposition K = V diag(lambda) W with W = V^{-1}. Rows of W are the
// left vectors. Ordered by real part, then imaginary part.
class SpectralDecomposition {
 public:
  SpectralDecomposition() = default;
  static SpectralDecomposition compute(const CMatrix& k, double max_condition = kMaxCondition);

  int dim() const { return static_cast<int>(values_.size()); }
  const CVector& eigenvalues() const { return values_; }
  const CMatrix& right() const { return right_; }
  const CMatrix& left() const { return left_; }
  double condition() const { return condition_; }
  int components() const { return components_; }

  double biorthogonality_defect() const;
  double completeness_defect() const;

  // V diag(values) W
  CMatrix assemble(const CVector& values) const;

  template <class F>
  CMatrix apply(F&& f) const {
    CVector fv(values_.size());
    for (Eigen::Index a = 0; a < values_.size(); ++a) fv(a) = f(values_(a));
    return assemble(fv);
  }

 private:
  CVector values_;
  CMatrix right_;
  CMatrix left_;
  double condition_ = 1.0;
  int components_ = 0;
};

// Groups of indices coupled through nonzero entries of k (either direction).
std::vector<std::vector<int>> connected_components(const CMatrix& k);

CMatrix matrix_function(const CMatrix& k, const std::function<cplx(cplx)>& f,
                        double max_condition = kMaxCondition);
NambuMatrix matrix_function(const NambuMatrix& k, const std::function<cplx(cplx)>& f,
                            double max_condition = kMaxCondition);

}  // namespace nmq
