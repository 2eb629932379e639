#pragma once

#include <complex>
#include <limits>

#include "nmq/quadrature.hpp"
#include "nmq/special.hpp"

namespace nmq {

// beta is the kernel inverse temperature (tanh(beta*x) convention; the
// physical one is twice as large). beta = +inf means zero temperature.
// The chemical potential enters through the argument omega.
struct KernelParams {
  double beta = std::numeric_limits<double>::infinity();
  double t = 0.0;
};

// r[x] = [Ein(ix) + log(4/pi)] / pi
cplx kernel_r(cplx x);
cplx kernel_r(cplx x, EinBranch branch);

// Closed form of int_0^inf (tanh x - 1) sin(x tau) dx / pi = -1/(pi tau) + csch(pi tau / 2) / 2.
double lorentzian_inner(double tau);

// Below this tau, kernel_s integrates numerically; above, it uses the digamma form.
inline constexpr double kKernelSSwitch = 1.0;

// s[z,tau] = -int_0^tau du e^{-izu} lorentzian_inner(u)
cplx kernel_s(cplx z, double tau);
cplx kernel_s_quadrature(cplx z, double tau, const QuadratureOptions& opt = {});
cplx kernel_s_closed(cplx z, double tau);

// R[omega, beta, t] = s[beta omega, t/beta] + r[omega t]. Throws at beta = 0.
cplx kernel_R(cplx omega, const KernelParams& p);

// t -> inf limit of R with real t-dependent constants dropped (they cancel in N).
cplx kernel_R_stationary(cplx omega, double beta);

}  // namespace nmq
