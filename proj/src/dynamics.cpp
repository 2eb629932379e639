#include "nmq/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "nmq/kernels.hpp"

namespace nmq {

Reservoir make_reservoir(HybridizationMatrix gamma, double beta, double mu, std::string label) {
  if (std::isnan(beta) || beta < 0.0) throw std::invalid_argument("reservoir beta must be >= 0");
  if (!std::isfinite(mu)) throw std::invalid_argument("reservoir mu must be finite");
  return Reservoir{std::move(gamma), beta, mu, std::move(label)};
}

double beta_from_temperature(double temperature) {
  if (std::isnan(temperature) || temperature < 0.0)
    throw std::invalid_argument("temperature must be >= 0");
  if (temperature == 0.0) return kInf;
  if (std::isinf(temperature)) return 0.0;
  return 1.0 / temperature;
}

QuadraticModel::QuadraticModel(HamiltonianMatrix h, std::vector<Reservoir> reservoirs)
    : h_(std::move(h)), reservoirs_(std::move(reservoirs)) {
  for (std::size_t nu = 0; nu < reservoirs_.size(); ++nu) {
    const auto& r = reservoirs_[nu];
    if (r.gamma.dim() != h_.dim())
      throw std::invalid_argument("reservoir " + std::to_string(nu) + " has dimension " +
                                  std::to_string(r.gamma.dim()) + ", system has " +
                                  std::to_string(h_.dim()));
    if (std::isnan(r.beta) || r.beta < 0.0)
      throw std::invalid_argument("reservoir " + std::to_string(nu) + ": beta must be >= 0");
    if (!std::isfinite(r.mu))
      throw std::invalid_argument("reservoir " + std::to_string(nu) + ": mu must be finite");
  }
}

CMatrix QuadraticModel::total_gamma() const {
  CMatrix g = CMatrix::Zero(dim(), dim());
  for (const auto& r : reservoirs_) g += r.gamma.matrix() + ph_conjugate(r.gamma.matrix());
  return g;
}

CMatrix build_K(const QuadraticModel& model) {
  return model.hamiltonian().matrix() - cplx(0.0, 1.0) * model.total_gamma();
}

KernelError::KernelError(std::size_t reservoir, const std::string& what)
    : std::runtime_error("reservoir " + std::to_string(reservoir) + ": " + what),
      reservoir_(reservoir) {}

OpenSystem::OpenSystem(QuadraticModel model, double max_condition)
    : model_(std::move(model)), k_(build_K(model_)), gamma_(model_.total_gamma()) {
  spec_ = SpectralDecomposition::compute(k_, max_condition);
  const double scale = 1.0 + max_abs(k_);
  for (Eigen::Index a = 0; a < spec_.eigenvalues().size(); ++a)
    if (spec_.eigenvalues()(a).imag() > 1e-10 * scale)
      throw std::runtime_error("K has an eigenvalue in the upper half plane");
}

// N_nu = G + hat(G) - i{ A G - G A^dag + B hat(G) - hat(G) B^dag },
// A = f(K - mu), B = f(K + mu) for the kernel f at the reservoir temperature.
CMatrix OpenSystem::assemble(std::size_t nu, const CMatrix& minus, const CMatrix& plus) const {
  const CMatrix& g = model_.reservoirs()[nu].gamma.matrix();
  const CMatrix gh = ph_conjugate(g);
  CMatrix a = minus * g;
  CMatrix b = plus * gh;
  const cplx i(0.0, 1.0);
  return g + gh - i * (a - a.adjoint() + b - b.adjoint());
}

CMatrix OpenSystem::reservoir_noise(std::size_t nu, double t) const {
  const Reservoir& r = model_.reservoirs().at(nu);
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("noise requested at invalid time");
  if (r.beta == 0.0) return r.gamma.matrix() + ph_conjugate(r.gamma.matrix());
  const KernelParams p{0.5 * r.beta, t};
  try {
    CMatrix minus = spec_.apply([&](cplx l) { return kernel_R(l - r.mu, p); });
    CMatrix plus = spec_.apply([&](cplx l) { return kernel_R(l + r.mu, p); });
    return assemble(nu, minus, plus);
  } catch (const std::exception& e) {
    throw KernelError(nu, e.what());
  }
}

CMatrix OpenSystem::reservoir_noise_stationary(std::size_t nu) const {
  const Reservoir& r = model_.reservoirs().at(nu);
  if (r.beta == 0.0) return r.gamma.matrix() + ph_conjugate(r.gamma.matrix());
  const CMatrix& g = r.gamma.matrix();
  const CMatrix gh = ph_conjugate(g);
  const CVector& lam = spec_.eigenvalues();
  const CMatrix& w = spec_.left();
  const double scale = 1.0 + max_abs(k_);
  // Modes with no overlap on this reservoir drop out; decaying ones are required otherwise.
  CVector fm(lam.size()), fp(lam.size());
  for (Eigen::Index a = 0; a < lam.size(); ++a) {
    double overlap = std::max((w.row(a) * g).cwiseAbs().maxCoeff(), (w.row(a) * gh).cwiseAbs().maxCoeff());
    if (overlap < 1e-12 * scale) {
      fm(a) = fp(a) = 0.0;
      continue;
    }
    if (lam(a).imag() > -1e-8)
      throw std::runtime_error("reservoir " + std::to_string(nu) +
                               ": non-decaying mode couples to the reservoir, no steady state");
    fm(a) = kernel_R_stationary(lam(a) - r.mu, 0.5 * r.beta);
    fp(a) = kernel_R_stationary(lam(a) + r.mu, 0.5 * r.beta);
  }
  return assemble(nu, spec_.assemble(fm), spec_.assemble(fp));
}

CMatrix OpenSystem::noise(double t, double* hermiticity_defect_out) const {
  CMatrix n = CMatrix::Zero(dim(), dim());
  for (std::size_t nu = 0; nu < model_.reservoirs().size(); ++nu) n += reservoir_noise(nu, t);
  if (hermiticity_defect_out) *hermiticity_defect_out = hermiticity_defect(n);
  return 0.5 * (n + n.adjoint());
}

OpenSystem OpenSystem::with_reservoir(std::size_t nu, double beta, double mu) const {
  OpenSystem copy = *this;
  Reservoir& r = copy.model_.reservoir(nu);
  r = make_reservoir(r.gamma, beta, mu, r.label);
  return copy;
}

CMatrix noise_matrix(const QuadraticModel& model, double t) { return OpenSystem(model).noise(t); }

int RateDecomposition::null_count() const {
  int c = 0;
  for (Eigen::Index l = 0; l < rates.size(); ++l)
    if (std::abs(rates(l)) < zero_threshold) ++c;
  return c;
}

CMatrix RateDecomposition::reconstruct() const {
  return modes * rates.cast<cplx>().asDiagonal() * modes.adjoint();
}

RateDecomposition rate_decomposition(const CMatrix& n, double zero_threshold) {
  if (n.rows() != n.cols()) throw std::invalid_argument("rate decomposition needs a square matrix");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (n + n.adjoint()));
  if (es.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  const Eigen::Index d = n.rows();
  RateDecomposition rd;
  rd.zero_threshold = zero_threshold;
  rd.rates.resize(d);
  rd.modes.resize(d, d);
  // Eigen returns ascending order.
  for (Eigen::Index l = 0; l < d; ++l) {
    rd.rates(l) = es.eigenvalues()(d - 1 - l);
    rd.modes.col(l) = es.eigenvectors().col(d - 1 - l);
  }
  return rd;
}

double non_markovianity(std::span<const double> rates, double zero_threshold) {
  double f = 0.0;
  for (double g : rates)
    if (g < -zero_threshold) f -= g;
  return f;
}

double non_markovianity(const RateDecomposition& rd) {
  return non_markovianity(std::span<const double>(rd.rates.data(), rd.rates.size()), rd.zero_threshold);
}

std::string ModeLabel::name() const {
  std::string s = side == Side::left ? "L" : "R";
  s += sector == Sector::particle ? "p" : "h";
  return s;
}

ModeLabel label_mode(const CVector& mode) {
  const Eigen::Index d = mode.size();
  if (d % 2 != 0) throw std::invalid_argument("mode vector must have even dimension");
  const Eigen::Index n = d / 2;
  double norm2 = mode.squaredNorm();
  if (norm2 == 0.0) throw std::invalid_argument("zero mode vector");
  ModeLabel out;
  out.particle_weight = mode.head(n).squaredNorm() / norm2;
  double left = 0.0;
  for (Eigen::Index s = 0; s < n; ++s) {
    double w = std::norm(mode(s)) + std::norm(mode(n + s));
    // an odd chain splits its middle site evenly
    if (2 * s + 1 < n) left += w;
    else if (2 * s + 1 == n) left += 0.5 * w;
  }
  out.left_weight = left / norm2;
  out.sector = out.particle_weight > 0.5 ? Sector::particle : Sector::hole;
  out.side = out.left_weight > 0.5 ? Side::left : Side::right;
  return out;
}

std::vector<JumpOperator> jump_operators(const OpenSystem& system, double t, double zero_threshold) {
  RateDecomposition rd = rate_decomposition(system.noise(t), zero_threshold);
  std::vector<JumpOperator> out;
  out.reserve(rd.size());
  for (int l = 0; l < rd.size(); ++l) {
    CVector mode = rd.modes.col(l);
    out.push_back({rd.rates(l), mode.conjugate(), label_mode(mode)});
  }
  return out;
}

std::vector<RateRow> rate_trace(const OpenSystem& system, const std::vector<double>& times,
                                double zero_threshold) {
  std::vector<RateRow> rows;
  rows.reserve(times.size());
  for (double t : times) {
    RateDecomposition rd = rate_decomposition(system.noise(t), zero_threshold);
    rows.push_back({t, rd.rates, non_markovianity(rd)});
  }
  return rows;
}

std::vector<double> hybrid_time_grid(double t_max, int n_log, int n_lin, double t_min, double t_split) {
  if (!(t_max > 0.0) || !(t_min > 0.0) || n_log < 0 || n_lin < 0)
    throw std::invalid_argument("invalid time grid parameters");
  if (t_split <= 0.0) t_split = std::min(1.0, t_max);
  t_split = std::clamp(t_split, t_min, t_max);
  std::vector<double> g{0.0};
  for (int i = 0; i < n_log; ++i) {
    double f = n_log == 1 ? 1.0 : double(i) / (n_log - 1);
    g.push_back(t_min * std::pow(t_split / t_min, f));
  }
  const double lin_start = n_log == 0 ? 0.0 : t_split;
  for (int i = 1; i <= n_lin; ++i) g.push_back(lin_start + (t_max - lin_start) * double(i) / n_lin);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(), [](double a, double b) { return std::abs(a - b) < 1e-15 * (1 + b); }),
          g.end());
  return g;
}

}  // namespace nmq
