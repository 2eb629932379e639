#include "nmq/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <numeric>
#include <sstream>

namespace nmq {

namespace {

std::string condition_message(double c) {
  std::ostringstream os;
  os << "eigenvector basis is near-defective (condition estimate " << c << ")";
  return os.str();
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

DefectiveMatrixError::DefectiveMatrixError(double condition)
    : std::runtime_error(condition_message(condition)), condition_(condition) {}

std::vector<std::vector<int>> connected_components(const CMatrix& k) {
  const int d = static_cast<int>(k.rows());
  std::vector<int> parent(d);
  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (k(i, j) != cplx(0.0) || k(j, i) != cplx(0.0)) {
        int a = find_root(parent, i), b = find_root(parent, j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(d, -1);
  for (int i = 0; i < d; ++i) {
    int r = find_root(parent, i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

SpectralDecomposition SpectralDecomposition::compute(const CMatrix& k, double max_condition) {
  if (k.rows() != k.cols()) throw std::invalid_argument("spectral decomposition needs a square matrix");
  if (!k.allFinite()) throw std::invalid_argument("spectral decomposition: non-finite entries");
  const Eigen::Index d = k.rows();
  CVector values(d);
  CMatrix right = CMatrix::Zero(d, d);
  CMatrix left = CMatrix::Zero(d, d);
  double cond = 1.0;

  // Decoupled blocks are diagonalized separately so exact degeneracies
  // between them cannot mix their eigenvectors.
  auto groups = connected_components(k);
  Eigen::Index col = 0;
  for (const auto& g : groups) {
    const Eigen::Index m = static_cast<Eigen::Index>(g.size());
    CMatrix sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = k(g[a], g[b]);
    CVector lam;
    CMatrix v;
    if (m == 1) {
      lam = sub.diagonal();
      v = CMatrix::Identity(1, 1);
    } else {
      Eigen::ComplexEigenSolver<CMatrix> es(sub, true);
      if (es.info() != Eigen::Success) throw std::runtime_error("complex eigensolver failed");
      lam = es.eigenvalues();
      v = es.eigenvectors();
      for (Eigen::Index c = 0; c < m; ++c) v.col(c).normalize();
    }
    Eigen::JacobiSVD<CMatrix> svd(v);
    const auto& sv = svd.singularValues();
    double c = sv(m - 1) > 0 ? sv(0) / sv(m - 1) : std::numeric_limits<double>::infinity();
    cond = std::max(cond, c);
    if (!(c <= max_condition)) throw DefectiveMatrixError(c);
    CMatrix w = v.fullPivLu().inverse();
    for (Eigen::Index a = 0; a < m; ++a) {
      values(col + a) = lam(a);
      for (Eigen::Index b = 0; b < m; ++b) {
        right(g[b], col + a) = v(b, a);
        left(col + a, g[b]) = w(a, b);
      }
    }
    col += m;
  }

  std::vector<Eigen::Index> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (values(a).real() != values(b).real()) return values(a).real() < values(b).real();
    return values(a).imag() < values(b).imag();
  });
  SpectralDecomposition out;
  out.values_.resize(d);
  out.right_.resize(d, d);
  out.left_.resize(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    out.values_(a) = values(order[a]);
    out.right_.col(a) = right.col(order[a]);
    out.left_.row(a) = left.row(order[a]);
  }
  out.condition_ = cond;
  out.components_ = static_cast<int>(groups.size());
  return out;
}

double SpectralDecomposition::biorthogonality_defect() const {
  CMatrix e = left_ * right_ - CMatrix::Identity(dim(), dim());
  return max_abs(e);
}

double SpectralDecomposition::completeness_defect() const {
  CMatrix e = right_ * left_ - CMatrix::Identity(dim(), dim());
  return max_abs(e);
}

CMatrix SpectralDecomposition::assemble(const CVector& fv) const {
  return right_ * fv.asDiagonal() * left_;
}

CMatrix matrix_function(const CMatrix& k, const std::function<cplx(cplx)>& f, double max_condition) {
  return SpectralDecomposition::compute(k, max_condition).apply(f);
}

NambuMatrix matrix_function(const NambuMatrix& k, const std::function<cplx(cplx)>& f,
                            double max_condition) {
  return NambuMatrix(matrix_function(k.matrix(), f, max_condition));
}

}  // namespace nmq
