#include "nmq/evolve.hpp"
#include "nmq/special.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace nmq {

double InvariantReport::worst() const {
  return std::max({hermiticity, particle_hole, trace, spectrum_below, spectrum_above});
}

std::string InvariantReport::describe() const {
  std::ostringstream os;
  os << "hermiticity " << hermiticity << ", particle-hole " << particle_hole << ", trace " << trace
     << ", spectrum below 0 by " << spectrum_below << ", above 1 by " << spectrum_above;
  return os.str();
}

InvariantReport check_invariants(const CMatrix& chi, bool with_spectrum) {
  const Eigen::Index d = chi.rows();
  InvariantReport r;
  r.hermiticity = hermiticity_defect(chi);
  r.particle_hole = max_abs(ph_conjugate(chi) - (CMatrix::Identity(d, d) - chi));
  r.trace = std::abs(chi.trace() - cplx(double(d / 2)));
  if (with_spectrum) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (chi + chi.adjoint()), Eigen::EigenvaluesOnly);
    r.spectrum_below = std::max(0.0, -es.eigenvalues().minCoeff());
    r.spectrum_above = std::max(0.0, es.eigenvalues().maxCoeff() - 1.0);
  }
  return r;
}

InvariantViolation::InvariantViolation(const std::string& where, InvariantReport report)
    : std::runtime_error("correlation-matrix invariant violated " + where + ": " + report.describe()),
      report_(report) {}

CorrelationMatrix::CorrelationMatrix(CMatrix chi) : chi_(std::move(chi)) {
  if (chi_.rows() != chi_.cols() || chi_.rows() % 2 != 0 || chi_.rows() == 0)
    throw std::invalid_argument("correlation matrix must be square with even dimension");
  InvariantReport r = check_invariants(chi_);
  if (r.hermiticity > 1e-10 || r.particle_hole > 1e-10 || r.trace > 1e-8 || r.spectrum_below > 1e-8 ||
      r.spectrum_above > 1e-8)
    throw InvariantViolation("at construction", r);
}

CMatrix chi_derivative(const OpenSystem& system, const CMatrix& chi, double t) {
  const cplx i(0.0, 1.0);
  CMatrix kc = system.K() * chi;
  return -i * kc + i * kc.adjoint() + system.noise(t);
}

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const CMatrix& err, const CMatrix& y0, const CMatrix& y1, double atol, double rtol) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < err.size(); ++k) {
    double sc = atol + rtol * std::max(std::abs(y0(k)), std::abs(y1(k)));
    double q = std::abs(err(k)) / sc;
    acc += q * q;
  }
  return std::sqrt(acc / double(err.size()));
}

}  // namespace

Trajectory evolve_chi(const OpenSystem& system, const CorrelationMatrix& chi0,
                      const std::vector<double>& t_grid, const EvolveOptions& opt) {
  if (chi0.dim() != system.dim()) throw std::invalid_argument("initial state dimension mismatch");
  if (t_grid.empty()) return {};
  if (t_grid.front() < 0.0) throw std::invalid_argument("time grid must start at t >= 0");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("time grid must be increasing");

  Trajectory traj;
  auto record = [&](double t, const CMatrix& chi) {
    InvariantReport r = check_invariants(chi);
    if (r.worst() > opt.abort_defect) {
      std::ostringstream where;
      where << "at t = " << t;
      throw InvariantViolation(where.str(), r);
    }
    traj.points.push_back({t, chi, r});
  };

  double t = 0.0;
  CMatrix y = chi0.matrix();
  double h = opt.initial_step;
  CMatrix k1 = chi_derivative(system, y, t);
  for (double target : t_grid) {
    while (t < target) {
      if (traj.accepted_steps + traj.rejected_steps > opt.max_steps)
        throw std::runtime_error("evolve_chi: step budget exhausted");
      bool last = false;
      double step = std::min(h, opt.max_step);
      if (t + step >= target || target - (t + step) < 1e-12 * (1.0 + target)) {
        step = target - t;
        last = true;
      }
      CMatrix k2 = chi_derivative(system, y + step * (a21 * k1), t + c2 * step);
      CMatrix k3 = chi_derivative(system, y + step * (a31 * k1 + a32 * k2), t + c3 * step);
      CMatrix k4 = chi_derivative(system, y + step * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * step);
      CMatrix k5 =
          chi_derivative(system, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * step);
      CMatrix k6 = chi_derivative(system, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5),
                                  t + step);
      CMatrix y1 = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      double t1 = last ? target : t + step;
      CMatrix k7 = chi_derivative(system, y1, t1);
      CMatrix err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double en = error_norm(err, y, y1, opt.abs_tol, opt.rel_tol);
      if (!std::isfinite(en)) throw std::runtime_error("evolve_chi: non-finite error estimate");
      double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (en <= 1.0) {
        t = t1;
        y = 0.5 * (y1 + y1.adjoint());
        k1 = k7;
        ++traj.accepted_steps;
        InvariantReport cheap = check_invariants(y, false);
        traj.worst_step_defect = std::max(traj.worst_step_defect, cheap.worst());
        if (cheap.worst() > opt.abort_defect) {
          std::ostringstream where;
          where << "at t = " << t;
          throw InvariantViolation(where.str(), cheap);
        }
        // keep the unclipped proposal when the step was shortened to hit an output time
        if (!last || factor < 1.0) h = step * factor;
      } else {
        ++traj.rejected_steps;
        h = step * std::min(1.0, factor);
        if (h < opt.min_step) {
          std::ostringstream os;
          os << "evolve_chi: step size underflow at t = " << t << " (h = " << h << ")";
          throw std::runtime_error(os.str());
        }
      }
    }
    record(t, y);
  }
  return traj;
}

CMatrix propagate_chi(const OpenSystem& system, const CMatrix& chi0, double t, const QuadratureOptions& opt) {
  const SpectralDecomposition& sd = system.spectrum();
  const CVector& lam = sd.eigenvalues();
  const CMatrix& v = sd.right();
  const CMatrix& w = sd.left();
  const Eigen::Index d = lam.size();
  const cplx i(0.0, 1.0);

  auto conjugate_phase = [&](const CMatrix& x, double s) {
    CMatrix out(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b)
        out(a, b) = x(a, b) * std::exp(-i * (lam(a) - std::conj(lam(b))) * s);
    return out;
  };

  CMatrix y = conjugate_phase(w * chi0 * w.adjoint(), t);
  if (t > 0.0) {
    auto integrand = [&](double s) {
      return CMatrix(conjugate_phase(w * system.noise(s) * w.adjoint(), t - s));
    };
    auto norm = [](const CMatrix& m) { return max_abs(m); };
    double omega = 0.0;
    for (Eigen::Index a = 0; a < d; ++a) omega = std::max(omega, std::abs(lam(a).real()));
    int panels = 1 + static_cast<int>(std::min(5e3, 2.0 * omega * t / kPi));
    y += integrate_adaptive<CMatrix>(integrand, 0.0, t, norm, opt, panels);
  }
  CMatrix chi = v * y * v.adjoint();
  return 0.5 * (chi + chi.adjoint());
}

}  // namespace nmq
