#include "nmq/models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace nmq {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_lead(double gamma, double temperature, const char* side) {
  require(std::isfinite(gamma) && gamma >= 0.0, std::string("Gamma_") + side + " must be finite and >= 0");
  require(!std::isnan(temperature) && temperature >= 0.0, std::string("T_") + side + " must be >= 0");
}

double fermi_complement(double x) {
  // 1/(1+e^{-x}) without overflow
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

QuadraticModel tight_binding_chain(const TightBindingSpec& s) {
  require(s.M >= 2, "tight-binding chain needs M >= 2");
  require(std::isfinite(s.hopping), "hopping must be finite");
  check_lead(s.Gamma_L, s.T_L, "L");
  check_lead(s.Gamma_R, s.T_R, "R");
  require(std::isfinite(s.mu_L) && std::isfinite(s.mu_R), "chemical potentials must be finite");
  CMatrix h = CMatrix::Zero(s.M, s.M);
  for (int j = 0; j + 1 < s.M; ++j) h(j, j + 1) = h(j + 1, j) = -s.hopping;
  HamiltonianMatrix hc = build_hamiltonian(h, CMatrix::Zero(s.M, s.M));
  std::vector<Reservoir> leads;
  leads.push_back(make_reservoir(HybridizationMatrix::site(s.M, 0, s.Gamma_L), beta_from_temperature(s.T_L),
                                 s.mu_L, "L"));
  leads.push_back(make_reservoir(HybridizationMatrix::site(s.M, s.M - 1, s.Gamma_R),
                                 beta_from_temperature(s.T_R), s.mu_R, "R"));
  return QuadraticModel(std::move(hc), std::move(leads));
}

HamiltonianMatrix xy_hamiltonian(const XYSpec& s) {
  require(s.M >= 2, "XY chain needs M >= 2");
  require(s.gamma_c >= 0.0 && s.gamma_c <= 1.0, "gamma_c must lie in [0, 1]");
  require(std::isfinite(s.J_c) && std::isfinite(s.h_c) && std::isfinite(s.Delta_h), "XY parameters must be finite");
  CMatrix h = CMatrix::Zero(s.M, s.M);
  CMatrix d = CMatrix::Zero(s.M, s.M);
  for (int m = 0; m < s.M; ++m) h(m, m) = -2.0 * s.h_c;
  for (int m = 0; m + 1 < s.M; ++m) {
    h(m, m + 1) = h(m + 1, m) = -s.J_c;
    d(m, m + 1) = s.J_c * s.gamma_c;
    d(m + 1, m) = -s.J_c * s.gamma_c;
  }
  return build_hamiltonian(h, d);
}

QuadraticModel xy_chain(const XYSpec& s) {
  check_lead(s.Gamma_L, s.T_L, "L");
  check_lead(s.Gamma_R, s.T_R, "R");
  HamiltonianMatrix hc = xy_hamiltonian(s);
  std::vector<Reservoir> leads;
  leads.push_back(make_reservoir(HybridizationMatrix::site(s.M, 0, s.Gamma_L), beta_from_temperature(s.T_L),
                                 2.0 * s.Delta_h, "L"));
  leads.push_back(make_reservoir(HybridizationMatrix::site(s.M, s.M - 1, s.Gamma_R),
                                 beta_from_temperature(s.T_R), -2.0 * s.Delta_h, "R"));
  return QuadraticModel(std::move(hc), std::move(leads));
}

CorrelationMatrix gaussian_initial_state(InitialKind kind, int n) {
  require(n >= 1, "initial state needs n >= 1");
  CMatrix chi = CMatrix::Zero(2 * n, 2 * n);
  switch (kind) {
    case InitialKind::vacuum:
      chi.topLeftCorner(n, n).setIdentity();
      break;
    case InitialKind::filled:
      chi.bottomRightCorner(n, n).setIdentity();
      break;
    case InitialKind::infinite_temperature:
      chi.setIdentity();
      chi *= 0.5;
      break;
    case InitialKind::thermal:
      throw std::invalid_argument("thermal initial state needs a Hamiltonian");
  }
  return CorrelationMatrix(std::move(chi));
}

CorrelationMatrix gaussian_initial_state(const InitialStateSpec& spec, const HamiltonianMatrix& h) {
  const int n = h.modes();
  if (spec.kind != InitialKind::thermal) return gaussian_initial_state(spec.kind, n);
  require(!std::isnan(spec.beta) && spec.beta >= 0.0, "thermal state needs beta >= 0");
  require(std::isfinite(spec.mu), "thermal state needs a finite mu");
  CMatrix omega = h.matrix();
  omega.diagonal().head(n).array() -= spec.mu;
  omega.diagonal().tail(n).array() += spec.mu;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(omega);
  Eigen::VectorXd occ(2 * n);
  for (int a = 0; a < 2 * n; ++a) {
    double e = es.eigenvalues()(a);
    if (std::isinf(spec.beta)) occ(a) = e > 0 ? 1.0 : (e < 0 ? 0.0 : 0.5);
    else occ(a) = fermi_complement(spec.beta * e);
  }
  CMatrix chi = es.eigenvectors() * occ.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return CorrelationMatrix(0.5 * (chi + chi.adjoint()));
}

}  // namespace nmq
