#pragma once

#include <vector>

#include "nmq/evolve.hpp"

namespace nmq {

// chi(t) = U chi0 U^dag with U = exp(-i H t).
CMatrix closed_evolve(const HamiltonianMatrix& h_total, const CMatrix& chi0_total, double t);

// Uniform levels eps_k = -W/2 + (k + 1/2) W/L, flat couplings sqrt(g W / (pi L))
// to each eigen-channel g of Gamma_nu.
struct DiscretizedBath {
  int levels = 400;
  double bandwidth = 20.0;

  double recurrence_time() const;
};

inline constexpr int kMaxOracleModes = 2000;

// System plus discretized reservoirs, particle block only (no pairing anywhere).
struct ExtendedSystem {
  CMatrix h;           // single-particle Hamiltonian, system modes first
  CMatrix chi_pp;      // <c c^dag> at t = 0
  int system_modes = 0;
};

ExtendedSystem build_extended_system(const QuadraticModel& model, const CorrelationMatrix& chi0,
                                     const DiscretizedBath& bath);

// Evolves an ExtendedSystem and returns the Nambu correlation matrix of the system block.
class ExtendedEvolver {
 public:
  explicit ExtendedEvolver(const ExtendedSystem& ext);
  CMatrix system_chi(double t) const;

 private:
  int n_ = 0;
  Eigen::VectorXd energies_;
  CMatrix vsys_;  // system rows of the eigenvector matrix
  CMatrix x0_;    // initial state in the eigenbasis
};

struct BathBenchmarkResult {
  std::vector<double> t;
  std::vector<double> deviation;  // max |chi_ME - chi_bath| over the system block
  double recurrence_time = 0.0;
  bool recurrence_warning = false;
  int total_modes = 0;

  double max_deviation() const;
};

BathBenchmarkResult bath_benchmark(const QuadraticModel& model, const CorrelationMatrix& chi0,
                                   const DiscretizedBath& bath, const std::vector<double>& t_grid,
                                   const EvolveOptions& opt = {});

}  // namespace nmq
