#include "nmq/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nmq {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

cplx ein_series(cplx z) {
  cplx power = 1.0;  // z^k / k!
  cplx sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 400; ++k) {
    power *= z / double(k);
    cplx term = sign * power / double(k);
    sum += term;
    sign = -sign;
    if (k > std::abs(z) && std::abs(term) <= 0.25 * kEps * std::abs(sum)) return sum;
  }
  throw std::runtime_error("Ein series did not converge");
}

// Modified Lentz evaluation of E1(z) = e^{-z} / (z+1 - 1/(z+3 - 4/(z+5 - ...))).
cplx e1_continued_fraction(cplx z) {
  const double tiny = 1e-300;
  cplx b = z + 1.0;
  cplx c = 1.0 / tiny;
  cplx d = 1.0 / b;
  cplx h = d;
  for (int i = 1; i < 20000; ++i) {
    double an = -double(i) * double(i);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    cplx del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h * std::exp(-z);
  }
  throw std::runtime_error("E1 continued fraction did not converge");
}

cplx e1_asymptotic(cplx z) {
  cplx term = 1.0;
  cplx sum = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -double(k) / z;
    double mag = std::abs(term);
    if (mag > last) break;  // optimal truncation
    sum += term;
    last = mag;
    if (mag < 0.25 * kEps) break;
  }
  return std::exp(-z) / z * sum;
}

}  // namespace

EinBranch default_ein_branch(cplx z) {
  double a = std::abs(z);
  if (a <= kEinSeriesRadius) return EinBranch::series;
  if (a <= kEinAsymptoticRadius) return EinBranch::continued_fraction;
  return EinBranch::asymptotic;
}

cplx ein(cplx z, EinBranch branch) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("Ein: non-finite argument");
  switch (branch) {
    case EinBranch::series:
      return ein_series(z);
    case EinBranch::continued_fraction:
      if (z == cplx(0.0)) return 0.0;
      return std::log(z) + e1_continued_fraction(z) + kEulerGamma;
    case EinBranch::asymptotic:
      if (z == cplx(0.0)) return 0.0;
      return std::log(z) + e1_asymptotic(z) + kEulerGamma;
  }
  return 0.0;
}

cplx ein(cplx z) { return ein(z, default_ein_branch(z)); }

cplx expint_e1(cplx z) {
  if (z == cplx(0.0)) throw std::domain_error("E1 has a logarithmic singularity at 0");
  switch (default_ein_branch(z)) {
    case EinBranch::series:
      return ein_series(z) - std::log(z) - kEulerGamma;
    case EinBranch::continued_fraction:
      return e1_continued_fraction(z);
    case EinBranch::asymptotic:
      return e1_asymptotic(z);
  }
  return 0.0;
}

cplx digamma(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("digamma: non-finite argument");
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
    throw std::domain_error("digamma pole at non-positive integer");
  if (z.real() < 0.5) {
    // psi(z) = psi(1-z) - pi cot(pi z)
    return digamma(1.0 - z) - kPi / std::tan(kPi * z);
  }
  cplx shift = 0.0;
  while (std::abs(z) < 10.0) {
    shift -= 1.0 / z;
    z += 1.0;
  }
  cplx w = 1.0 / (z * z);
  // Bernoulli tail: -sum B_{2k} / (2k z^{2k})
  cplx tail =
      w * (-1.0 / 12 +
           w * (1.0 / 120 +
                w * (-1.0 / 252 +
                     w * (1.0 / 240 + w * (-1.0 / 132 + w * (691.0 / 32760 + w * (-1.0 / 12)))))));
  return shift + std::log(z) - 0.5 / z + tail;
}

}  // namespace nmq
