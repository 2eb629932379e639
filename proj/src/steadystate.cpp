#include "nmq/steadystate.hpp"

#include <cmath>
#include <sstream>

namespace nmq {

SteadyStateError::SteadyStateError(const std::string& what, double min_gap)
    : std::runtime_error(what), min_gap_(min_gap) {}

CMatrix n_infinity(const OpenSystem& system, std::size_t reservoir) {
  return system.reservoir_noise_stationary(reservoir);
}

CMatrix n_infinity(const OpenSystem& system) {
  CMatrix n = CMatrix::Zero(system.dim(), system.dim());
  for (std::size_t nu = 0; nu < system.model().reservoirs().size(); ++nu)
    n += system.reservoir_noise_stationary(nu);
  return 0.5 * (n + n.adjoint());
}

double settling_time(const OpenSystem& system) {
  double slowest = kInf;
  for (Eigen::Index a = 0; a < system.spectrum().eigenvalues().size(); ++a) {
    double im = -system.spectrum().eigenvalues()(a).imag();
    if (im > 1e-8) slowest = std::min(slowest, im);
  }
  if (!std::isfinite(slowest)) throw SteadyStateError("no decaying mode", 0.0);
  return 50.0 / slowest;
}

CMatrix solve_stationary(const OpenSystem& system, const CMatrix& n, double gap_threshold, double* min_gap) {
  const SpectralDecomposition& sd = system.spectrum();
  const CVector& lam = sd.eigenvalues();
  const Eigen::Index d = lam.size();
  CMatrix x = sd.left() * n * sd.left().adjoint();
  double gap = kInf;
  for (Eigen::Index b = 0; b < d; ++b)
    for (Eigen::Index c = 0; c < d; ++c) {
      cplx den = lam(b) - std::conj(lam(c));
      gap = std::min(gap, std::abs(den));
      x(b, c) /= den;
    }
  if (min_gap) *min_gap = gap;
  if (!(gap > gap_threshold)) {
    std::ostringstream os;
    os << "steady state is not unique or ill-conditioned (min gap " << gap << ")";
    throw SteadyStateError(os.str(), gap);
  }
  CMatrix chi = cplx(0.0, -1.0) * (sd.right() * x * sd.right().adjoint());
  return 0.5 * (chi + chi.adjoint());
}

SteadyStateResult steady_chi(const OpenSystem& system, double tolerance, double gap_threshold) {
  SteadyStateResult out;
  out.n_inf = n_infinity(system);
  CMatrix chi = solve_stationary(system, out.n_inf, gap_threshold, &out.min_gap);
  const cplx i(0.0, 1.0);
  CMatrix kc = system.K() * chi;
  out.residual = max_abs(-i * kc + i * kc.adjoint() + out.n_inf);
  if (out.residual > tolerance) {
    std::ostringstream os;
    os << "steady-state residual " << out.residual << " exceeds tolerance " << tolerance;
    throw SteadyStateError(os.str(), out.min_gap);
  }
  out.chi_inf = CorrelationMatrix(std::move(chi));
  return out;
}

}  // namespace nmq
