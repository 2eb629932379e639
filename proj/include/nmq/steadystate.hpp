#pragma once

#include <stdexcept>

#include "nmq/dynamics.hpp"
#include "nmq/evolve.hpp"

namespace nmq {

class SteadyStateError : public std::runtime_error {
 public:
  SteadyStateError(const std::string& what, double min_gap);
  double min_gap() const { return min_gap_; }

 private:
  double min_gap_;
};

struct SteadyStateResult {
  CorrelationMatrix chi_inf;
  CMatrix n_inf;
  double min_gap = 0.0;   // min |lambda_b - conj(lambda_c)|
  double residual = 0.0;  // max |-i K chi + i chi K^dag + N_inf|
};

// Sum of the stationary reservoir noises.
CMatrix n_infinity(const OpenSystem& system);
// Per-reservoir piece, useful to separate the contributions of each lead.
CMatrix n_infinity(const OpenSystem& system, std::size_t reservoir);

// Time after which noise(t) is expected to have converged: 50 / min |Im lambda|.
double settling_time(const OpenSystem& system);

// Solves -i K chi + i chi K^dag + n = 0 through the eigenbasis of K.
CMatrix solve_stationary(const OpenSystem& system, const CMatrix& n, double gap_threshold,
                         double* min_gap = nullptr);

SteadyStateResult steady_chi(const OpenSystem& system, double tolerance = 1e-10,
                             double gap_threshold = 1e-10);

}  // namespace nmq
