#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nmq/dynamics.hpp"
#include "nmq/quadrature.hpp"

namespace nmq {

// Deviations of chi from the structure of a valid correlation matrix.
struct InvariantReport {
  double hermiticity = 0.0;     // max |chi - chi^dag|
  double particle_hole = 0.0;   // max |hat(chi) - (1 - chi)|
  double trace = 0.0;           // |tr chi - n|
  double spectrum_below = 0.0;  // max(0, -min eig)
  double spectrum_above = 0.0;  // max(0, max eig - 1)

  double worst() const;
  std::string describe() const;
};

InvariantReport check_invariants(const CMatrix& chi, bool with_spectrum = true);

class InvariantViolation : public std::runtime_error {
 public:
  InvariantViolation(const std::string& where, InvariantReport report);
  const InvariantReport& report() const { return report_; }

 private:
  InvariantReport report_;
};

// chi = <C C^dag>
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  // Validates hermiticity/ph to 1e-10, trace to 1e-8, spectrum to 1e-8.
  explicit CorrelationMatrix(CMatrix chi);

  const CMatrix& matrix() const { return chi_; }
  int modes() const { return static_cast<int>(chi_.rows() / 2); }
  int dim() const { return static_cast<int>(chi_.rows()); }

 private:
  CMatrix chi_;
};

struct EvolveOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  double max_step = 1.0;
  double abort_defect = 1e-6;
  long max_steps = 50'000'000;
};

struct TrajectoryPoint {
  double t = 0.0;
  CMatrix chi;
  InvariantReport defects;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  long accepted_steps = 0;
  long rejected_steps = 0;
  double worst_step_defect = 0.0;  // cheap invariants checked on every accepted step
};

// d chi/dt = -i K chi + i chi K^dag + N(t), Dormand-Prince 5(4) with embedded error control.
Trajectory evolve_chi(const OpenSystem& system, const CorrelationMatrix& chi0,
                      const std::vector<double>& t_grid, const EvolveOptions& opt = {});

// Right-hand side, exposed for tests.
CMatrix chi_derivative(const OpenSystem& system, const CMatrix& chi, double t);

// chi(t) = U chi0 U^dag + int_0^t U(t-s) N(s) U(t-s)^dag ds, U(s) = exp(-iKs), by quadrature.
CMatrix propagate_chi(const OpenSystem& system, const CMatrix& chi0, double t,
                      const QuadratureOptions& opt = {1e-11, 1e-11, 20000});

}  // namespace nmq
