#include <doctest.h>

#include <Eigen/LU>
#include <cmath>

#include "fock.hpp"
#include "nmq/observables.hpp"
#include "nmq/spectral.hpp"
#include "nmq/steadystate.hpp"
#include "random_models.hpp"

using namespace nmq;

namespace {

CMatrix expm(const CMatrix& a) {
  return matrix_function(a, [](cplx z) { return std::exp(z); });
}

// 1/2 ln det{chi + e^{z1 O1} e^{z2 O2} (1 - chi)}
cplx log_generating(const CMatrix& chi, const CMatrix& o1, const CMatrix& o2, double z1, double z2) {
  const Eigen::Index d = chi.rows();
  CMatrix m = chi + expm(z1 * o1) * expm(z2 * o2) * (CMatrix::Identity(d, d) - chi);
  return 0.5 * std::log(m.fullPivLu().determinant());
}

cplx mixed_derivative(const CMatrix& chi, const CMatrix& o1, const CMatrix& o2, double h) {
  return (log_generating(chi, o1, o2, h, h) - log_generating(chi, o1, o2, h, -h) -
          log_generating(chi, o1, o2, -h, h) + log_generating(chi, o1, o2, -h, -h)) /
         (4 * h * h);
}

XYSpec xy(int M, double gc, double hc, double dh) {
  XYSpec s;
  s.M = M;
  s.gamma_c = gc;
  s.h_c = hc;
  s.Delta_h = dh;
  s.Gamma_L = s.Gamma_R = 0.5;
  return s;
}

}  // namespace

TEST_CASE("observables must be traceless and Hermitian") {
  CHECK_THROWS(QuadraticObservable(CMatrix::Identity(2, 2)));
  CMatrix o = CMatrix::Zero(2, 2);
  o(0, 1) = 1.0;
  CHECK_THROWS(QuadraticObservable(o));
}

TEST_CASE("expectations in the infinite temperature state vanish") {
  std::mt19937 rng(61);
  CMatrix half = 0.5 * CMatrix::Identity(6, 6);
  QuadraticObservable o(testing_util::random_hamiltonian(rng, 3).matrix());
  CHECK(std::abs(quadratic_expectation(half, o)) < 1e-15);
}

TEST_CASE("spin expectation in the vacuum") {
  CMatrix vac = gaussian_initial_state(InitialKind::vacuum, 2).matrix();
  for (int m = 0; m < 2; ++m) CHECK(quadratic_expectation(vac, spin_z(2, m)) == doctest::Approx(-0.5));
  // same from the Fock space: 1/2 C^dag S C = n_m - 1/2
  CMatrix rho = CMatrix::Zero(4, 4);
  rho(0, 0) = 1.0;
  CMatrix s = fock::quadratic(spin_z(2, 1).matrix());
  CHECK(std::abs((rho * s).trace() - cplx(-0.5)) < 1e-15);
}

TEST_CASE("quadratic expectations against the Fock space") {
  std::mt19937 rng(67);
  for (int n : {2, 3}) {
    CMatrix omega = testing_util::random_hamiltonian(rng, n).matrix();
    CMatrix rho = fock::gibbs(fock::quadratic(omega));
    CMatrix chi = fock::correlation(rho, n);
    QuadraticObservable o(testing_util::random_hamiltonian(rng, n).matrix());
    CHECK(std::abs(quadratic_expectation(chi, o) - (rho * fock::quadratic(o.matrix())).trace().real()) < 1e-12);
  }
}

TEST_CASE("zz correlator against the Fock space connected correlator") {
  std::mt19937 rng(71);
  const int n = 3;
  CMatrix omega = testing_util::random_hamiltonian(rng, n).matrix();
  CMatrix rho = fock::gibbs(fock::quadratic(omega));
  CMatrix chi = fock::correlation(rho, n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      CMatrix sl = fock::quadratic(spin_z(n, l).matrix()), sm = fock::quadratic(spin_z(n, m).matrix());
      cplx conn = (rho * sl * sm).trace() - (rho * sl).trace() * (rho * sm).trace();
      CAPTURE(l);
      CAPTURE(m);
      CHECK(std::abs(zz_correlator(chi, l, m) - conn.real()) < 1e-12);
      CHECK(std::abs(zz_correlator(chi, l, m) - zz_correlator(chi, m, l)) < 1e-10);
      CHECK(std::abs(connected_correlator(chi, spin_z(n, l).matrix(), spin_z(n, m).matrix()).real() -
                     zz_correlator(chi, l, m)) < 1e-14);
    }
}

TEST_CASE("zz correlator of the infinite temperature state") {
  CMatrix half = 0.5 * CMatrix::Identity(8, 8);
  CHECK(zz_correlator(half, 0, 2) == 0.0);
  CHECK_THROWS_AS(zz_correlator(half, 0, 4), std::out_of_range);
}

TEST_CASE("determinant generating function reproduces the connected correlator") {
  std::mt19937 rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 4;
    CMatrix chi = testing_util::random_chi(rng, n);
    CMatrix o1 = testing_util::random_hamiltonian(rng, n).matrix();
    CMatrix o2 = testing_util::random_hamiltonian(rng, n).matrix();
    const double h = 2e-3;
    cplx richardson = (4.0 * mixed_derivative(chi, o1, o2, h / 2) - mixed_derivative(chi, o1, o2, h)) / 3.0;
    CAPTURE(n);
    CHECK(std::abs(richardson - connected_correlator(chi, o1, o2)) < 1e-6);
  }
}

TEST_CASE("averaged correlation profile") {
  CMatrix half = 0.5 * CMatrix::Identity(12, 12);
  for (int r = 1; r <= 2; ++r) CHECK(averaged_correlation(half, r) == 0.0);
  std::mt19937 rng(79);
  CMatrix chi = testing_util::random_chi(rng, 4);
  // r = 1 on four sites leaves the single pair (3, 2)
  CHECK(averaged_correlation(chi, 1) == doctest::Approx(std::abs(zz_correlator(chi, 3, 2))));
  CHECK(correlation_profile(chi).size() == 2);
  CHECK_THROWS(averaged_correlation(chi, 2));
}

TEST_CASE("decay classification of synthetic profiles") {
  std::vector<double> power(41), expo(41);
  for (int r = 0; r <= 40; ++r) {
    power[r] = r == 0 ? 1.0 : std::pow(double(r), -2.0);
    expo[r] = std::exp(-r / 2.0);
  }
  DecayFit a = classify_decay(power);
  CHECK(a.kind == DecayKind::algebraic);
  CHECK(a.exponent == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(!a.truncated_by_floor);
  DecayFit e = classify_decay(expo);
  CHECK(e.kind == DecayKind::exponential);
  CHECK(e.length == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(a.rss_algebraic < a.rss_exponential);
  CHECK(e.rss_exponential < e.rss_algebraic);
}

TEST_CASE("decay classification with a numerical floor") {
  std::vector<double> fast(30);
  for (int r = 0; r < 30; ++r) fast[r] = std::exp(-3.0 * r);
  // values reach 1e-13 near r = 10, leaving 7 usable points
  DecayFit f = classify_decay(fast);
  CHECK(f.truncated_by_floor);
  CHECK(f.kind == DecayKind::exponential);
  std::vector<double> tiny{1.0, 0.1, 0.01, 1e-3};
  CHECK_THROWS_AS(classify_decay(tiny), InsufficientPointsError);
}

TEST_CASE("unbiased XY chain carries no energy current") {
  XYSpec s = xy(12, 0.5, 0.6, 0.0);
  s.T_L = s.T_R = 0.3;
  OpenSystem sys(xy_chain(s));
  CMatrix chi = steady_chi(sys).chi_inf.matrix();
  for (int m = 1; m <= 10; ++m) CHECK(std::abs(quadratic_expectation(chi, energy_current_xy(s, m))) < 1e-8);
}

TEST_CASE("generic boundary current reproduces the explicit XY energy current") {
  XYSpec s = xy(8, 0.5, 1.2, 0.3);
  HamiltonianMatrix h = xy_hamiltonian(s);
  for (int m = 1; m <= 6; ++m) {
    QuadraticObservable j = energy_current_xy(s, m);
    BoundaryCurrents bc = boundary_current(h, {m, s.M - 1}, QuadraticObservable(h.matrix()));
    CAPTURE(m);
    CHECK(max_abs(bc.left.matrix() - j.matrix()) < 1e-12);
  }
}

TEST_CASE("particle current of the tight-binding chain") {
  TightBindingSpec t;
  t.M = 6;
  t.hopping = 0.8;
  HamiltonianMatrix h = tight_binding_chain(t).hamiltonian();
  const int m = 3;
  BoundaryCurrents bc = boundary_current(h, {m, 5}, number_operator(6));
  CMatrix expected = CMatrix::Zero(6, 6);
  expected(m - 1, m) = cplx(0, 0.8);
  expected(m, m - 1) = cplx(0, -0.8);
  CHECK(max_abs(bc.left.matrix().topLeftCorner(6, 6) - expected) < 1e-15);
  CHECK(max_abs(bc.right.matrix()) == 0.0);
}

TEST_CASE("a non-conserved charge is rejected") {
  std::mt19937 rng(83);
  TightBindingSpec t;
  t.M = 4;
  HamiltonianMatrix h = tight_binding_chain(t).hamiltonian();
  QuadraticObservable q(testing_util::random_hamiltonian(rng, 4).matrix());
  CHECK_THROWS_AS(boundary_current(h, {1, 2}, q), NonConservedError);
}

TEST_CASE("steady-state currents through an interior segment balance") {
  TightBindingSpec t;
  t.M = 8;
  t.Gamma_L = 0.5;
  t.Gamma_R = 0.3;
  t.mu_L = 0.6;
  t.mu_R = -0.4;
  t.T_R = 0.2;
  QuadraticModel model = tight_binding_chain(t);
  CMatrix chi = steady_chi(OpenSystem(model)).chi_inf.matrix();
  for (const QuadraticObservable& q : {number_operator(8), QuadraticObservable(model.hamiltonian().matrix())}) {
    BoundaryCurrents bc = boundary_current(model.hamiltonian(), {2, 5}, q);
    double jl = quadratic_expectation(chi, bc.left), jr = quadratic_expectation(chi, bc.right);
    CHECK(std::abs(jl) > 1e-3);
    CHECK(std::abs(jl + jr) < 1e-8);
  }
}
