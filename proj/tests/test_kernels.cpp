#include <doctest.h>

#include <cmath>
#include <limits>

#include "nmq/kernels.hpp"
#include "nmq/special.hpp"

using namespace nmq;

namespace {

// Reference values from mpmath at 30 digits.
struct Ref {
  cplx z, v;
};

const double kInfT = std::numeric_limits<double>::infinity();

double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("ein matches high-precision values on every branch") {
  const Ref refs[] = {
      {{0, 2}, {0.84738201668661317433, 1.6054129768026948486}},
      {{0, 4}, {2.1044917239083538911, 1.7582031389490530581}},
      {{3.9, 0.5}, {1.949825727340720711, 0.12508782150452733816}},
      {{0, 10}, {2.9252571909000339173, 1.6583475942188740493}},
      {{0, 25}, {3.8029400869494362007, 1.5314825509999613226}},
      {{0, 35}, {4.1440435827462496698, 1.5969222045083056254}},
      {{0, 50}, {4.4948670566537952247, 1.5516170724859358947}},
      {{5, 5}, {2.5339538182816415293, 0.78586919119908353207}},
      {{-1, 2}, {0.33976691295364736349, 2.5943527081437837611}},
      {{0, 0.01}, {0.000024999895833564815546, 0.0099999444446111110358}},
  };
  for (const auto& r : refs) {
    CAPTURE(r.z);
    CHECK(rel_err(ein(r.z), r.v) < 1e-13);
  }
  CHECK(ein(cplx(0, 0)) == cplx(0, 0));
}

TEST_CASE("ein branches agree where their ranges meet") {
  for (double x = 3.5; x <= 4.5; x += 0.05) {
    cplx z(0, x);
    CAPTURE(x);
    CHECK(rel_err(ein(z, EinBranch::series), ein(z, EinBranch::continued_fraction)) < 1e-12);
  }
  for (double x = 25; x <= 35; x += 0.5) {
    cplx z(0.1, x);
    CAPTURE(x);
    CHECK(rel_err(ein(z, EinBranch::continued_fraction), ein(z, EinBranch::asymptotic)) < 5e-12);
  }
}

TEST_CASE("digamma matches high-precision values") {
  const Ref refs[] = {
      {{0.5, 2}, {0.68218669934942426814, 1.5707853710239763245}},
      {{-2.3, 0.7}, {1.1372174736084745027, 2.8742470533736552916}},
      {{0.5, 50}, {3.9120063375945665876, 1.5707963267948966192}},
      {{3, 0}, {0.92278433509846713939, 0.0}},
  };
  for (const auto& r : refs) {
    CAPTURE(r.z);
    CHECK(rel_err(digamma(r.z), r.v) < 1e-13);
  }
  CHECK_THROWS(digamma(cplx(-2, 0)));
}

TEST_CASE("kernel_r at the origin and frozen points") {
  CHECK(std::abs(kernel_r(0.0) - std::log(4.0 / kPi) / kPi) < 1e-15);
  CHECK(std::abs(kernel_r(0.0).real() - 0.07689236062939693) < 1e-15);
  const Ref refs[] = {
      {{2.5, 0}, {0.46129458382354017067, 0.56612055398448010287}},
      {{-7, 0}, {0.85561538593288654558, -0.4630124827246379351}},
      {{1, -0.2}, {0.20446402839283787684, 0.27370851897513361272}},
  };
  for (const auto& r : refs) {
    CAPTURE(r.z);
    CHECK(rel_err(kernel_r(r.z), r.v) < 1e-13);
  }
}

TEST_CASE("kernel_r is conjugation symmetric on the real axis") {
  for (double x : {0.3, 1.0, 3.9, 4.1, 12.0, 29.0, 31.0, 80.0}) {
    CAPTURE(x);
    CHECK(std::abs(kernel_r(-x) - std::conj(kernel_r(x))) < 1e-14);
  }
}

TEST_CASE("kernel_r follows its large-argument form") {
  const double x = 50;
  cplx asym = (std::log(x) + cplx(0, kPi / 2) + kEulerGamma + std::log(4 / kPi)) / kPi;
  // E1(ix) ~ e^{-ix}/(ix) is the leading correction
  CHECK(std::abs(kernel_r(x) - asym) < 1.1 / (kPi * x));
  CHECK(std::abs(kernel_r(x) - asym - std::exp(cplx(0, -x)) / cplx(0, x) / kPi) < 2.0 / (kPi * x * x));
}

TEST_CASE("lorentzian_inner closed form against direct quadrature") {
  for (double tau : {1e-4, 5e-3, 0.02, 0.5, 2.0, 7.0}) {
    // int_0^inf (tanh x - 1) sin(x tau) dx / pi; the integrand decays like e^{-2x}
    auto f = [tau](double x) { return (std::tanh(x) - 1.0) * std::sin(x * tau) / kPi; };
    double direct = integrate_adaptive<double>(f, 0.0, 40.0, [](double v) { return std::abs(v); }, {1e-15, 1e-13});
    CAPTURE(tau);
    CHECK(std::abs(lorentzian_inner(tau) - direct) < 1e-12);
  }
  CHECK(lorentzian_inner(-0.7) == doctest::Approx(-lorentzian_inner(0.7)).epsilon(1e-15));
  CHECK(lorentzian_inner(0.0) == 0.0);
}

TEST_CASE("kernel_s against an independent quadrature") {
  struct Case {
    cplx z;
    double tau;
    cplx v;
  };
  const Case cases[] = {
      {{0, -2}, 3.0, {0.025070739718299522756, 0.0}},
      {{1.5, -0.3}, 3.0, {-0.05437322443892956629, -0.064326529679933864771}},
      {{0.7, 0}, 0.5, {0.015323120214189111655, -0.0036160656790677575426}},
      {{4, 0}, 2.0, {0.019702988711950734573, -0.0036978884748880375798}},
  };
  for (const auto& c : cases) {
    CAPTURE(c.z);
    CAPTURE(c.tau);
    CHECK(std::abs(kernel_s(c.z, c.tau) - c.v) < 1e-10);
    CHECK(std::abs(kernel_s_quadrature(c.z, c.tau) - c.v) < 1e-10);
  }
}

TEST_CASE("kernel_s is continuous across the evaluation switch") {
  for (cplx z : {cplx(0.3, 0), cplx(-5, -0.1), cplx(20, 0), cplx(0, -1.5)}) {
    CAPTURE(z);
    CHECK(std::abs(kernel_s_closed(z, kKernelSSwitch) - kernel_s_quadrature(z, kKernelSSwitch)) < 1e-11);
    CHECK(std::abs(kernel_s(z, kKernelSSwitch * (1 - 1e-12)) - kernel_s(z, kKernelSSwitch)) < 1e-10);
  }
}

TEST_CASE("kernel_s rejects arguments in the growing half plane") {
  CHECK_THROWS(kernel_s(cplx(0.0, 1.0), 2.0));
}

TEST_CASE("kernel_R against a finite-bandwidth Lorentzian integral") {
  // O = int_0^t e^{-i w u} [(1 - cos Lu)/(pi u) + I(u/b)/b] du equals
  // i R - (i/pi) log(L t) - i (gamma + log(4/pi))/pi up to O(1/L).
  const double w = 1.0, b = 2.0, t = 1.0, lambda = 1e3;
  auto g = [&](double u) -> cplx {
    double lor = u == 0.0 ? 0.0 : (1.0 - std::cos(lambda * u)) / (kPi * u);
    return std::exp(cplx(0, -w * u)) * (lor + lorentzian_inner(u / b) / b);
  };
  QuadratureOptions opt{1e-12, 1e-10, 200000};
  cplx o = integrate_adaptive<cplx>(g, 0.0, t, [](cplx v) { return std::abs(v); }, opt,
                                    static_cast<int>(lambda * t / kPi) + 1);
  cplx R = kernel_R(w, {b, t});
  cplx i(0, 1);
  cplx predicted = i * R - i * std::log(lambda * t) / kPi - i * (kEulerGamma + std::log(4 / kPi)) / kPi;
  CHECK(std::abs(-i * o - predicted) < 5.0 / lambda);
}

TEST_CASE("kernel_R limits") {
  CHECK(std::abs(kernel_R(2.0, {kInfT, 3.0}) - kernel_r(6.0)) < 1e-15);
  CHECK(std::abs(kernel_R(2.0, {1.0, 0.0}) - kernel_r(0.0)) < 1e-15);
  CHECK_THROWS(kernel_R(1.0, {0.0, 1.0}));
}

TEST_CASE("kernel_R approaches its stationary form") {
  const double t = 2000.0;
  const double shift_const = (kEulerGamma + std::log(4 / kPi)) / kPi;
  for (cplx w : {cplx(1.0, 0), cplx(-0.5, -0.01), cplx(2.0, -0.3)}) {
    CAPTURE(w);
    cplx zero_t = kernel_R(w, {kInfT, t}) - std::log(t) / kPi - shift_const;
    CHECK(std::abs(zero_t - kernel_R_stationary(w, kInfT)) < 1e-3);
    const double b = 1.5;
    cplx finite_t = kernel_R(w, {b, t}) - std::log(kPi * t / b) / kPi - shift_const;
    CHECK(std::abs(finite_t - kernel_R_stationary(w, b)) < 1e-3);
  }
}

TEST_CASE("i(R - conj R) tends to minus the sign of omega deep in the degenerate regime") {
  const double b = 50.0, t = 200.0;
  for (double w : {1.0, -1.0}) {
    cplx R = kernel_R(w, {b, t});
    cplx v = cplx(0, 1) * (R - std::conj(R));
    CAPTURE(w);
    CHECK(std::abs(v.real() + (w > 0 ? 1.0 : -1.0)) < 2e-2);
  }
}
