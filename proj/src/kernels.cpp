#include "nmq/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace nmq {

namespace {

const double kLog4OverPi = std::log(4.0 / kPi);

void require_finite(cplx z, const char* what) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument(std::string(what) + ": non-finite argument");
}

// Arguments are beta*(lambda +- mu) with Im lambda <= 0; allow rounding noise only.
void require_lower_half(cplx z) {
  if (z.imag() > 1e-8 * (1.0 + std::abs(z)))
    throw std::domain_error("kernel_s: argument must satisfy Im z <= 0");
}

// sum_{k>=0} e^{-a_k tau} / a_k, a_k = iz + (2k+1) pi / 2
cplx pole_sum(cplx z, double tau) {
  cplx sum = 0.0;
  const cplx iz = cplx(0.0, 1.0) * z;
  const cplx phase = std::exp(-iz * tau);
  for (int k = 0; k < 100000; ++k) {
    const double c = (2 * k + 1) * kPi / 2;
    cplx term = phase * std::exp(-c * tau) / (iz + c);
    sum += term;
    if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum)) && c > std::abs(iz)) return sum;
  }
  throw std::runtime_error("kernel_s: pole sum did not converge");
}

}  // namespace

cplx kernel_r(cplx x, EinBranch branch) {
  require_finite(x, "kernel_r");
  return (ein(cplx(0.0, 1.0) * x, branch) + kLog4OverPi) / kPi;
}

cplx kernel_r(cplx x) {
  require_finite(x, "kernel_r");
  return (ein(cplx(0.0, 1.0) * x) + kLog4OverPi) / kPi;
}

double lorentzian_inner(double tau) {
  const double a = std::abs(tau);
  if (a < 1e-2) {
    const double t2 = tau * tau;
    const double p3 = kPi * kPi * kPi, p5 = p3 * kPi * kPi;
    return tau * (-kPi / 24 + t2 * (7 * p3 / 5760 - t2 * 31 * p5 / 967680));
  }
  return -1.0 / (kPi * tau) + 0.5 / std::sinh(kPi * tau / 2);
}

cplx kernel_s_quadrature(cplx z, double tau, const QuadratureOptions& opt) {
  if (tau == 0.0) return 0.0;
  const cplx mi(0.0, -1.0);
  auto f = [&](double u) { return -std::exp(mi * z * u) * lorentzian_inner(u); };
  auto norm = [](cplx v) { return std::abs(v); };
  // One initial panel per half period of the oscillating factor.
  int panels = 1 + static_cast<int>(std::min(1e4, std::abs(z.real()) * tau / kPi));
  return integrate_adaptive<cplx>(f, 0.0, tau, norm, opt, panels);
}

cplx kernel_s_closed(cplx z, double tau) {
  if (tau <= 0.0) throw std::domain_error("kernel_s_closed requires tau > 0");
  const cplx i(0.0, 1.0);
  cplx head = digamma(0.5 + i * z / kPi) + kEulerGamma + std::log(kPi * tau) - ein(i * z * tau);
  return head / kPi + pole_sum(z, tau);
}

cplx kernel_s(cplx z, double tau) {
  require_finite(z, "kernel_s");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::domain_error("kernel_s: tau must be >= 0");
  require_lower_half(z);
  if (tau == 0.0) return 0.0;
  if (tau < kKernelSSwitch) return kernel_s_quadrature(z, tau);
  return kernel_s_closed(z, tau);
}

cplx kernel_R(cplx omega, const KernelParams& p) {
  require_finite(omega, "kernel_R");
  if (!(p.t >= 0.0) || !std::isfinite(p.t)) throw std::domain_error("kernel_R: t must be >= 0");
  if (!(p.beta > 0.0))
    throw std::domain_error("kernel_R: beta = 0 has no finite kernel (use the infinite-temperature noise)");
  if (p.t == 0.0) return kernel_r(0.0);
  if (std::isinf(p.beta)) return kernel_r(omega * p.t);
  const double tau = p.t / p.beta;
  const cplx z = p.beta * omega;
  require_lower_half(z);
  if (tau < kKernelSSwitch) return kernel_s_quadrature(z, tau) + kernel_r(omega * p.t);
  // Closed forms of s and r combined: the Ein(i omega t) terms cancel.
  const cplx i(0.0, 1.0);
  cplx head = digamma(0.5 + i * z / kPi) + kEulerGamma + std::log(kPi * tau) + kLog4OverPi;
  return head / kPi + pole_sum(z, tau);
}

cplx kernel_R_stationary(cplx omega, double beta) {
  require_finite(omega, "kernel_R_stationary");
  if (!(beta > 0.0)) throw std::domain_error("kernel_R_stationary: beta must be > 0");
  const cplx i(0.0, 1.0);
  if (std::isinf(beta)) {
    if (omega == cplx(0.0)) throw std::domain_error("kernel_R_stationary: log singularity at omega = 0");
    return std::log(i * omega) / kPi;
  }
  return digamma(0.5 + i * beta * omega / kPi) / kPi;
}

}  // namespace nmq
