#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nmq {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kSymmetryTol = 1e-12;

// Thrown when an input breaks a structural condition (hermiticity, particle-hole parity, ...).
class SymmetryError : public std::runtime_error {
 public:
  SymmetryError(std::string condition, double magnitude);
  const std::string& condition() const { return condition_; }
  double magnitude() const { return magnitude_; }

 private:
  std::string condition_;
  double magnitude_;
};

enum class Sector { particle, hole };

// Flat layout: particle block [0,n), hole block [n,2n).
struct NambuIndex {
  int site = 0;
  Sector sector = Sector::particle;

  int flat(int n) const;
  static NambuIndex from_flat(int flat, int n);
};

double max_abs(const CMatrix& a);
double hermiticity_defect(const CMatrix& a);

// J swaps the particle and hole blocks.
CMatrix swap_matrix(int n);

// hat(A) = J A^T J
CMatrix ph_conjugate(const CMatrix& a);

class NambuMatrix {
 public:
  NambuMatrix() = default;
  explicit NambuMatrix(CMatrix m);

  int modes() const { return static_cast<int>(m_.rows() / 2); }
  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

 protected:
  CMatrix m_;
};

NambuMatrix ph_conjugate(const NambuMatrix& a);

class HamiltonianMatrix : public NambuMatrix {
 public:
  HamiltonianMatrix() = default;
  // Validates hermiticity and hat(H) = -H.
  explicit HamiltonianMatrix(CMatrix m, double tol = kSymmetryTol);

  CMatrix h() const { return m_.topLeftCorner(modes(), modes()); }
  CMatrix delta() const { return m_.topRightCorner(modes(), modes()); }
};

// Assembles [[h, d],[d^dag, -h^T]].
HamiltonianMatrix build_hamiltonian(const CMatrix& h, const CMatrix& delta,
                                    double tol = kSymmetryTol);

// Gamma_nu lives on the particle block. The hole-block partner is ph_conjugate().
class HybridizationMatrix : public NambuMatrix {
 public:
  HybridizationMatrix() = default;
  explicit HybridizationMatrix(CMatrix m, double tol = kSymmetryTol);

  static HybridizationMatrix particle(const CMatrix& gamma_pp);
  // Gamma restricted to a single site: g |site><site|.
  static HybridizationMatrix site(int n, int site, double g);
};

}  // namespace nmq
