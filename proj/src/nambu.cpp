#include "nmq/nambu.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace nmq {

namespace {

std::string describe(const std::string& condition, double magnitude) {
  std::ostringstream os;
  os << "symmetry violation: " << condition << " (max deviation " << magnitude << ")";
  return os.str();
}

void require_nambu_shape(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0)
    throw std::invalid_argument("Nambu matrix must be square with even positive dimension, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

}  // namespace

SymmetryError::SymmetryError(std::string condition, double magnitude)
    : std::runtime_error(describe(condition, magnitude)),
      condition_(std::move(condition)),
      magnitude_(magnitude) {}

int NambuIndex::flat(int n) const {
  if (site < 0 || site >= n) throw std::out_of_range("site index out of range");
  return sector == Sector::particle ? site : n + site;
}

NambuIndex NambuIndex::from_flat(int flat, int n) {
  if (flat < 0 || flat >= 2 * n) throw std::out_of_range("flat Nambu index out of range");
  if (flat < n) return {flat, Sector::particle};
  return {flat - n, Sector::hole};
}

double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double hermiticity_defect(const CMatrix& a) { return max_abs(a - a.adjoint()); }

CMatrix swap_matrix(int n) {
  CMatrix j = CMatrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n).setIdentity();
  return j;
}

CMatrix ph_conjugate(const CMatrix& a) {
  require_nambu_shape(a);
  // J A^T J is a block permutation of A^T; no multiplication needed.
  const Eigen::Index n = a.rows() / 2;
  CMatrix t = a.transpose();
  CMatrix out(a.rows(), a.cols());
  out.topLeftCorner(n, n) = t.bottomRightCorner(n, n);
  out.bottomRightCorner(n, n) = t.topLeftCorner(n, n);
  out.topRightCorner(n, n) = t.bottomLeftCorner(n, n);
  out.bottomLeftCorner(n, n) = t.topRightCorner(n, n);
  return out;
}

NambuMatrix::NambuMatrix(CMatrix m) : m_(std::move(m)) {
  require_nambu_shape(m_);
  if (!m_.allFinite()) throw std::invalid_argument("Nambu matrix has non-finite entries");
}

NambuMatrix ph_conjugate(const NambuMatrix& a) { return NambuMatrix(ph_conjugate(a.matrix())); }

HamiltonianMatrix::HamiltonianMatrix(CMatrix m, double tol) : NambuMatrix(std::move(m)) {
  double herm = hermiticity_defect(m_);
  if (herm > tol) throw SymmetryError("H = H^dagger", herm);
  double odd = max_abs(ph_conjugate(m_) + m_);
  if (odd > tol) throw SymmetryError("hat(H) = -H", odd);
}

HamiltonianMatrix build_hamiltonian(const CMatrix& h, const CMatrix& delta, double tol) {
  if (h.rows() != h.cols() || delta.rows() != h.rows() || delta.cols() != h.cols())
    throw std::invalid_argument("h and delta must be square with equal size");
  double herm = hermiticity_defect(h);
  if (herm > tol) throw SymmetryError("h = h^dagger", herm);
  double anti = max_abs(delta + delta.transpose());
  if (anti > tol) throw SymmetryError("delta^T = -delta", anti);
  const Eigen::Index n = h.rows();
  CMatrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = h;
  m.topRightCorner(n, n) = delta;
  m.bottomLeftCorner(n, n) = delta.adjoint();
  m.bottomRightCorner(n, n) = -h.transpose();
  return HamiltonianMatrix(std::move(m), tol);
}

HybridizationMatrix::HybridizationMatrix(CMatrix m, double tol) : NambuMatrix(std::move(m)) {
  double herm = hermiticity_defect(m_);
  if (herm > tol) throw SymmetryError("Gamma = Gamma^dagger", herm);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (lo < -tol * scale) throw SymmetryError("Gamma positive semidefinite", -lo);
}

HybridizationMatrix HybridizationMatrix::particle(const CMatrix& gamma_pp) {
  if (gamma_pp.rows() != gamma_pp.cols())
    throw std::invalid_argument("hybridization block must be square");
  const Eigen::Index n = gamma_pp.rows();
  CMatrix m = CMatrix::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = gamma_pp;
  return HybridizationMatrix(std::move(m));
}

HybridizationMatrix HybridizationMatrix::site(int n, int site, double g) {
  if (site < 0 || site >= n) throw std::out_of_range("reservoir site out of range");
  if (!(g >= 0.0) || !std::isfinite(g))
    throw std::invalid_argument("hybridization strength must be finite and non-negative");
  CMatrix pp = CMatrix::Zero(n, n);
  pp(site, site) = g;
  return particle(pp);
}

}  // namespace nmq
