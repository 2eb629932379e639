#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "nmq/models.hpp"
#include "nmq/oracle.hpp"
#include "nmq/special.hpp"
#include "random_models.hpp"

using namespace nmq;

namespace {

QuadraticModel chain(int M, double gl, double gr, double ml, double mr) {
  TightBindingSpec s;
  s.M = M;
  s.Gamma_L = gl;
  s.Gamma_R = gr;
  s.mu_L = ml;
  s.mu_R = mr;
  return tight_binding_chain(s);
}

}  // namespace

TEST_CASE("closed evolution conserves energy and the spectrum of chi") {
  std::mt19937 rng(89);
  HamiltonianMatrix h = testing_util::random_hamiltonian(rng, 5);
  CMatrix chi0 = testing_util::random_chi(rng, 5);
  auto energy = [&](const CMatrix& chi) { return (0.5 * h.matrix() * (CMatrix::Identity(10, 10) - chi)).trace(); };
  auto spec0 = Eigen::SelfAdjointEigenSolver<CMatrix>(chi0).eigenvalues();
  CHECK(max_abs(closed_evolve(h, chi0, 0.0) - chi0) == 0.0);
  for (double t : {0.3, 2.0, 17.0}) {
    CMatrix chi = closed_evolve(h, chi0, t);
    CHECK(std::abs(energy(chi) - energy(chi0)) < 1e-10);
    CHECK((Eigen::SelfAdjointEigenSolver<CMatrix>(chi).eigenvalues() - spec0).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("extended system couplings reproduce the hybridization") {
  QuadraticModel m = chain(3, 0.4, 0.2, 0.5, -0.5);
  CorrelationMatrix chi0 = gaussian_initial_state(InitialKind::vacuum, 3);
  DiscretizedBath bath{200, 20.0};
  ExtendedSystem ext = build_extended_system(m, chi0, bath);
  CHECK(ext.h.rows() == 3 + 2 * 200);
  // pi * density of states * |v|^2 = Gamma
  double v2 = 0.0;
  for (int k = 3; k < 203; ++k) v2 += std::norm(ext.h(0, k));
  CHECK(kPi * v2 / 20.0 == doctest::Approx(0.4).epsilon(1e-12));
  // zero temperature: levels below mu are filled
  CHECK(ext.chi_pp(3, 3) == cplx(0.0));
  CHECK(ext.chi_pp(202, 202) == cplx(1.0));
}

TEST_CASE("without coupling the bath oracle and the master equation coincide") {
  QuadraticModel m = chain(3, 0.0, 0.0, 0.0, 0.0);
  CorrelationMatrix chi0 = gaussian_initial_state(InitialKind::vacuum, 3);
  BathBenchmarkResult r = bath_benchmark(m, chi0, {50, 10.0}, {0.0, 1.0, 3.0});
  CHECK(r.max_deviation() < 1e-8);
}

TEST_CASE("bath oracle deviation shrinks with more levels") {
  QuadraticModel m = chain(2, 0.4, 0.2, 0.5, -0.5);
  CorrelationMatrix chi0 = gaussian_initial_state(InitialKind::vacuum, 2);
  std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 3.0};
  double previous = 1e9;
  for (int levels : {100, 200, 400}) {
    BathBenchmarkResult r = bath_benchmark(m, chi0, {levels, 10.0 * levels / 100.0}, grid);
    CAPTURE(levels);
    CHECK(!r.recurrence_warning);
    CHECK(r.max_deviation() < previous);
    previous = r.max_deviation();
  }
  CHECK(previous < 1e-2);
}

TEST_CASE("recurrence of the finite bath") {
  QuadraticModel m = chain(2, 0.4, 0.2, 0.5, -0.5);
  CorrelationMatrix chi0 = gaussian_initial_state(InitialKind::vacuum, 2);
  DiscretizedBath bath{40, 20.0};  // recurrence time 2 pi L / W ~ 12.6
  std::vector<double> grid{0.0, 2.0, 4.0, 16.0};
  BathBenchmarkResult r = bath_benchmark(m, chi0, bath, grid);
  CHECK(r.recurrence_warning);
  CHECK(r.deviation[3] > 10 * r.deviation[1]);
}

TEST_CASE("oracle preconditions") {
  XYSpec x;
  x.M = 3;
  x.gamma_c = 0.5;
  x.Gamma_L = 0.3;
  QuadraticModel paired = xy_chain(x);
  CHECK_THROWS(build_extended_system(paired, gaussian_initial_state(InitialKind::vacuum, 3), {10, 5.0}));
  QuadraticModel big = chain(4, 0.3, 0.3, 0, 0);
  CHECK_THROWS(build_extended_system(big, gaussian_initial_state(InitialKind::vacuum, 4), {1000, 20.0}));
}
