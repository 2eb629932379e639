#include "nmq/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "nmq/special.hpp"

namespace nmq {

CMatrix closed_evolve(const HamiltonianMatrix& h_total, const CMatrix& chi0_total, double t) {
  if (chi0_total.rows() != h_total.dim() || chi0_total.cols() != h_total.dim())
    throw std::invalid_argument("closed_evolve: dimension mismatch");
  if (t == 0.0) return chi0_total;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h_total.matrix());
  const cplx mi(0.0, -1.0);
  CVector phase = (mi * t * es.eigenvalues().cast<cplx>()).array().exp();
  CMatrix u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  CMatrix chi = u * chi0_total * u.adjoint();
  return 0.5 * (chi + chi.adjoint());
}

double DiscretizedBath::recurrence_time() const { return 2.0 * kPi * levels / bandwidth; }

ExtendedSystem build_extended_system(const QuadraticModel& model, const CorrelationMatrix& chi0,
                                     const DiscretizedBath& bath) {
  if (bath.levels < 1 || !(bath.bandwidth > 0.0)) throw std::invalid_argument("invalid bath discretization");
  const int n = model.modes();
  if (max_abs(model.hamiltonian().delta()) > 0.0)
    throw std::invalid_argument("bath oracle supports number-conserving systems only");
  const CMatrix& chi = chi0.matrix();
  if (max_abs(chi.topRightCorner(n, n)) > 1e-12)
    throw std::invalid_argument("bath oracle needs an initial state without anomalous correlations");

  struct Channel {
    CVector u;
    double g;
    const Reservoir* r;
  };
  std::vector<Channel> channels;
  for (const auto& r : model.reservoirs()) {
    const CMatrix& g = r.gamma.matrix();
    if (max_abs(g.bottomRows(n)) > 0.0 || max_abs(g.rightCols(n)) > 0.0)
      throw std::invalid_argument("bath oracle needs hybridizations on the particle block");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g.topLeftCorner(n, n));
    for (int k = 0; k < n; ++k)
      if (es.eigenvalues()(k) > 1e-14) channels.push_back({es.eigenvectors().col(k), es.eigenvalues()(k), &r});
  }
  const int total = n + static_cast<int>(channels.size()) * bath.levels;
  if (total > kMaxOracleModes)
    throw std::invalid_argument("bath oracle capped at " + std::to_string(kMaxOracleModes) + " modes");

  ExtendedSystem ext;
  ext.system_modes = n;
  ext.h = CMatrix::Zero(total, total);
  ext.chi_pp = CMatrix::Zero(total, total);
  ext.h.topLeftCorner(n, n) = model.hamiltonian().h();
  ext.chi_pp.topLeftCorner(n, n) = chi.topLeftCorner(n, n);
  const double spacing = bath.bandwidth / bath.levels;
  int offset = n;
  for (const auto& ch : channels) {
    const double v = std::sqrt(ch.g * spacing / kPi);
    for (int k = 0; k < bath.levels; ++k) {
      const int b = offset + k;
      const double eps = -0.5 * bath.bandwidth + (k + 0.5) * spacing;
      ext.h(b, b) = eps;
      ext.h.block(0, b, n, 1) = v * ch.u;
      ext.h.block(b, 0, 1, n) = v * ch.u.adjoint();
      const double x = eps - ch.r->mu;
      double empty;  // <c c^dag> = 1 - n_F
      if (ch.r->beta == 0.0) empty = 0.5;
      else if (std::isinf(ch.r->beta)) empty = x > 0 ? 1.0 : (x < 0 ? 0.0 : 0.5);
      else empty = 1.0 / (1.0 + std::exp(-ch.r->beta * x));
      ext.chi_pp(b, b) = empty;
    }
    offset += bath.levels;
  }
  return ext;
}

ExtendedEvolver::ExtendedEvolver(const ExtendedSystem& ext) : n_(ext.system_modes) {
  CMatrix v;
  if (max_abs(CMatrix(ext.h.imag().cast<cplx>())) == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ext.h.real());
    energies_ = es.eigenvalues();
    v = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ext.h);
    energies_ = es.eigenvalues();
    v = es.eigenvectors();
  }
  vsys_ = v.topRows(n_);
  x0_ = v.adjoint() * ext.chi_pp * v;
}

CMatrix ExtendedEvolver::system_chi(double t) const {
  const Eigen::Index d = energies_.size();
  const cplx mi(0.0, -1.0);
  CVector phase(d);
  for (Eigen::Index a = 0; a < d; ++a) phase(a) = std::exp(mi * energies_(a) * t);
  CMatrix left = vsys_ * phase.asDiagonal();
  CMatrix pp = left * x0_ * left.adjoint();
  pp = 0.5 * (pp + pp.adjoint());
  CMatrix out = CMatrix::Zero(2 * n_, 2 * n_);
  out.topLeftCorner(n_, n_) = pp;
  out.bottomRightCorner(n_, n_) = CMatrix::Identity(n_, n_) - pp.transpose();
  return out;
}

double BathBenchmarkResult::max_deviation() const {
  double m = 0.0;
  for (double d : deviation) m = std::max(m, d);
  return m;
}

BathBenchmarkResult bath_benchmark(const QuadraticModel& model, const CorrelationMatrix& chi0,
                                   const DiscretizedBath& bath, const std::vector<double>& t_grid,
                                   const EvolveOptions& opt) {
  ExtendedSystem ext = build_extended_system(model, chi0, bath);
  ExtendedEvolver oracle(ext);
  OpenSystem system(model);
  Trajectory traj = evolve_chi(system, chi0, t_grid, opt);
  BathBenchmarkResult out;
  out.total_modes = static_cast<int>(ext.h.rows());
  out.recurrence_time = bath.recurrence_time();
  for (const auto& p : traj.points) {
    out.t.push_back(p.t);
    out.deviation.push_back(max_abs(p.chi - oracle.system_chi(p.t)));
  }
  if (!t_grid.empty() && t_grid.back() > 0.5 * out.recurrence_time) out.recurrence_warning = true;
  return out;
}

}  // namespace nmq
