#pragma once

#include <complex>

namespace nmq {

using cplx = std::complex<double>;

inline constexpr double kEulerGamma = 0.577215664901532860606512090082402431;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Branch used to evaluate the exponential integral.
enum class EinBranch { series, continued_fraction, asymptotic };

inline constexpr double kEinSeriesRadius = 4.0;
inline constexpr double kEinAsymptoticRadius = 30.0;

EinBranch default_ein_branch(cplx z);

// Ein(z) = sum_{k>=1} (-1)^{k+1} z^k / (k k!) = log z + E1(z) + gamma. Entire.
cplx ein(cplx z);
cplx ein(cplx z, EinBranch branch);

// Principal-branch E1(z) = Gamma(0, z), z != 0.
cplx expint_e1(cplx z);

// Complex digamma; poles at non-positive integers are rejected.
cplx digamma(cplx z);

}  // namespace nmq
