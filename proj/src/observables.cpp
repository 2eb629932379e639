#include "nmq/observables.hpp"

#include <cmath>
#include <sstream>

namespace nmq {

QuadraticObservable::QuadraticObservable(CMatrix o, std::string label) : o_(std::move(o)), label_(std::move(label)) {
  if (o_.rows() != o_.cols() || o_.rows() % 2 != 0 || o_.rows() == 0)
    throw std::invalid_argument("observable must be a square Nambu matrix");
  double scale = std::max(1.0, max_abs(o_));
  double tr = std::abs(o_.trace());
  if (tr > 1e-12 * scale * o_.rows()) throw SymmetryError("tr O = 0", tr);
  double herm = hermiticity_defect(o_);
  if (herm > 1e-12 * scale) throw SymmetryError("O = O^dagger", herm);
}

double quadratic_expectation(const CMatrix& chi, const QuadraticObservable& o) {
  if (chi.rows() != o.matrix().rows()) throw std::invalid_argument("observable/state dimension mismatch");
  const Eigen::Index d = chi.rows();
  cplx v = 0.5 * (o.matrix() * (CMatrix::Identity(d, d) - chi)).trace();
  if (std::abs(v.imag()) > 1e-10) {
    std::ostringstream os;
    os << "expectation value has imaginary residue " << v.imag();
    throw std::runtime_error(os.str());
  }
  return v.real();
}

cplx connected_correlator(const CMatrix& chi, const CMatrix& o1, const CMatrix& o2) {
  const Eigen::Index d = chi.rows();
  return 0.5 * (o1 * chi * o2 * (CMatrix::Identity(d, d) - chi)).trace();
}

QuadraticObservable spin_z(int n, int m) {
  if (m < 0 || m >= n) throw std::out_of_range("site index out of range");
  CMatrix s = CMatrix::Zero(2 * n, 2 * n);
  s(m, m) = 1.0;
  s(n + m, n + m) = -1.0;
  return QuadraticObservable(std::move(s), "S_" + std::to_string(m));
}

QuadraticObservable number_operator(int n) {
  CMatrix s = CMatrix::Zero(2 * n, 2 * n);
  s.diagonal().head(n).setOnes();
  s.diagonal().tail(n).setConstant(-1.0);
  return QuadraticObservable(std::move(s), "N");
}

double zz_correlator(const CMatrix& chi, int l, int m) {
  const int n = static_cast<int>(chi.rows() / 2);
  if (l < 0 || l >= n || m < 0 || m >= n) throw std::out_of_range("zz_correlator: site index out of range");
  // S_l, S_m are diagonal, so only the four (l, l^) x (m, m^) entries contribute.
  const int li[2] = {l, n + l}, mi[2] = {m, n + m};
  const double sg[2] = {1.0, -1.0};
  cplx c = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      cplx one_minus = (li[a] == mi[b] ? 1.0 : 0.0) - chi(mi[b], li[a]);
      c += sg[a] * sg[b] * chi(li[a], mi[b]) * one_minus;
    }
  return 0.5 * c.real();
}

double averaged_correlation(const CMatrix& chi, int r) {
  const int M = static_cast<int>(chi.rows() / 2);
  if (r < 0) throw std::out_of_range("averaged_correlation: r must be >= 0");
  double sum = 0.0;
  int count = 0;
  for (int m = M / 2; m + r <= M - 1; ++m) {
    sum += std::abs(zz_correlator(chi, r + m, m));
    ++count;
  }
  if (count == 0) throw std::out_of_range("averaged_correlation: no valid site pair for this r");
  return sum / count;
}

std::vector<double> correlation_profile(const CMatrix& chi) {
  const int M = static_cast<int>(chi.rows() / 2);
  std::vector<double> out;
  for (int r = 0; r <= M - 1 - M / 2; ++r) out.push_back(averaged_correlation(chi, r));
  return out;
}

std::string to_string(DecayKind k) { return k == DecayKind::algebraic ? "algebraic" : "exponential"; }

DecayOptions DecayOptions::for_chain(int M) {
  DecayOptions o;
  o.tail_exclude = M / 10;
  return o;
}

namespace {

// Least squares y = a + b x; returns slope and residual sum of squares.
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  double mx = sx / n, my = sy / n, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  double b = sxy / sxx, a = my - b * mx, rss = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double e = y[k] - a - b * x[k];
    rss += e * e;
  }
  return {b, rss};
}

}  // namespace

DecayFit classify_decay(const std::vector<double>& profile, const DecayOptions& opt) {
  const int r_end = static_cast<int>(profile.size()) - 1 - opt.tail_exclude;
  std::vector<double> xr, xl, y;
  bool truncated = false;
  for (int r = std::max(opt.r_min, 1); r <= r_end; ++r) {
    if (!(profile[r] > opt.floor)) {
      truncated = true;
      break;
    }
    xr.push_back(r);
    xl.push_back(std::log(double(r)));
    y.push_back(std::log(profile[r]));
  }
  const int pts = static_cast<int>(y.size());
  if (pts < opt.min_points && !(truncated && pts >= opt.min_points_truncated)) {
    std::ostringstream os;
    os << "classify_decay: only " << pts << " usable points above " << opt.floor;
    throw InsufficientPointsError(os.str());
  }
  DecayFit fit;
  auto [slope_alg, rss_alg] = line_fit(xl, y);
  auto [slope_exp, rss_exp] = line_fit(xr, y);
  fit.exponent = -slope_alg;
  fit.length = slope_exp < 0 ? -1.0 / slope_exp : kInf;
  fit.rss_algebraic = rss_alg;
  fit.rss_exponential = rss_exp;
  fit.kind = rss_alg <= rss_exp ? DecayKind::algebraic : DecayKind::exponential;
  fit.points = pts;
  fit.r_first = static_cast<int>(xr.front());
  fit.r_last = static_cast<int>(xr.back());
  fit.truncated_by_floor = truncated && pts < opt.min_points;
  return fit;
}

QuadraticObservable energy_current_xy(const XYSpec& s, int m) {
  if (m < 1 || m > s.M - 2) throw std::out_of_range("energy_current_xy: need 1 <= m <= M-2");
  const int n = s.M;
  const double J = s.J_c, g = s.gamma_c, h = s.h_c;
  const cplx i(0.0, 1.0);
  const double a = J * J * (1.0 - g * g);
  CMatrix j = CMatrix::Zero(2 * n, 2 * n);
  auto hat = [n](int k) { return n + k; };
  // particle-particle
  j(m - 1, m + 1) += -i * a;
  j(m + 1, m - 1) += i * a;
  j(m - 1, m) += -2.0 * i * h * J;
  j(m, m - 1) += 2.0 * i * h * J;
  // hole-hole
  j(hat(m + 1), hat(m - 1)) += i * a;
  j(hat(m - 1), hat(m + 1)) += -i * a;
  j(hat(m), hat(m - 1)) += 2.0 * i * h * J;
  j(hat(m - 1), hat(m)) += -2.0 * i * h * J;
  // hole-particle
  j(hat(m), m - 1) += 2.0 * i * g * h * J;
  j(hat(m - 1), m) += -2.0 * i * g * h * J;
  // particle-hole
  j(m - 1, hat(m)) += -2.0 * i * g * h * J;
  j(m, hat(m - 1)) += 2.0 * i * g * h * J;
  return QuadraticObservable(std::move(j), "J_E(" + std::to_string(m) + ")");
}

NonConservedError::NonConservedError(double defect)
    : std::runtime_error("quantity is not conserved inside the partition (commutator " +
                         std::to_string(defect) + ")"),
      defect_(defect) {}

namespace {

Eigen::VectorXd site_mask(int n, int first, int last) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2 * n);
  for (int k = std::max(first, 0); k <= std::min(last, n - 1); ++k) p(k) = p(n + k) = 1.0;
  return p;
}

}  // namespace

CMatrix restrict_to_sites(const CMatrix& a, SiteRange sigma) {
  const int n = static_cast<int>(a.rows() / 2);
  Eigen::VectorXd p = site_mask(n, sigma.first, sigma.last);
  return p.cast<cplx>().asDiagonal() * a * p.cast<cplx>().asDiagonal();
}

BoundaryCurrents boundary_current(const HamiltonianMatrix& h, SiteRange sigma, const QuadraticObservable& q,
                                  double tol) {
  const int n = h.modes();
  if (q.modes() != n) throw std::invalid_argument("observable/Hamiltonian dimension mismatch");
  if (sigma.first < 0 || sigma.last >= n || sigma.first > sigma.last)
    throw std::out_of_range("boundary_current: invalid site range");
  const CMatrix& H = h.matrix();
  auto diag = [](const Eigen::VectorXd& p) { return p.cast<cplx>().asDiagonal(); };
  Eigen::VectorXd ps = site_mask(n, sigma.first, sigma.last);
  Eigen::VectorXd pl = site_mask(n, 0, sigma.first - 1);
  Eigen::VectorXd pr = site_mask(n, sigma.last + 1, n - 1);
  CMatrix hs = diag(ps) * H * diag(ps);
  CMatrix qs = diag(ps) * q.matrix() * diag(ps);
  BoundaryCurrents out;
  out.conservation_defect = max_abs(hs * qs - qs * hs);
  if (out.conservation_defect > tol) throw NonConservedError(out.conservation_defect);
  const cplx mi(0.0, -1.0);
  CMatrix hl = diag(pl) * H * diag(ps) + diag(ps) * H * diag(pl);
  CMatrix hr = diag(pr) * H * diag(ps) + diag(ps) * H * diag(pr);
  CMatrix jl = mi * (hl * qs - qs * hl);
  CMatrix jr = mi * (hr * qs - qs * hr);
  out.left = QuadraticObservable(jl, "J_left");
  out.right = QuadraticObservable(jr, "J_right");
  out.total = QuadraticObservable(jl + jr, "J");
  return out;
}

}  // namespace nmq
