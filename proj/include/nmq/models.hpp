#pragma once

#include "nmq/dynamics.hpp"
#include "nmq/evolve.hpp"

namespace nmq {

// Leads attach at sites 0 and M-1. Temperatures are physical; T = 0 is allowed.
struct TightBindingSpec {
  int M = 2;
  double hopping = 1.0;
  double Gamma_L = 0.0, Gamma_R = 0.0;
  double T_L = 0.0, T_R = 0.0;
  double mu_L = 0.0, mu_R = 0.0;
};

// Reservoir potentials are mu_L = +2 Delta_h, mu_R = -2 Delta_h.
struct XYSpec {
  int M = 2;
  double J_c = 1.0;
  double gamma_c = 0.0;
  double h_c = 0.0;
  double Delta_h = 0.0;
  double Gamma_L = 0.0, Gamma_R = 0.0;
  double T_L = 0.0, T_R = 0.0;
};

QuadraticModel tight_binding_chain(const TightBindingSpec& spec);

HamiltonianMatrix xy_hamiltonian(const XYSpec& spec);
QuadraticModel xy_chain(const XYSpec& spec);

enum class InitialKind { vacuum, filled, infinite_temperature, thermal };

struct InitialStateSpec {
  InitialKind kind = InitialKind::vacuum;
  double beta = 1.0;  // physical, thermal only; +inf allowed
  double mu = 0.0;
};

// chi(0) = [1 + exp(-Omega0)]^{-1}; thermal uses Omega0 = beta (H - mu diag(1,-1)).
CorrelationMatrix gaussian_initial_state(const InitialStateSpec& spec, const HamiltonianMatrix& h);
CorrelationMatrix gaussian_initial_state(InitialKind kind, int n);

}  // namespace nmq
