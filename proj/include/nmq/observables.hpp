#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nmq/models.hpp"
#include "nmq/nambu.hpp"

namespace nmq {

// O = 1/2 C^dag O C with O traceless and Hermitian.
class QuadraticObservable {
 public:
  QuadraticObservable() = default;
  QuadraticObservable(CMatrix o, std::string label = {});

  const CMatrix& matrix() const { return o_; }
  const std::string& label() const { return label_; }
  int modes() const { return static_cast<int>(o_.rows() / 2); }

 private:
  CMatrix o_;
  std::string label_;
};

// 1/2 tr{O (1 - chi)}; throws when the imaginary residue exceeds 1e-10.
double quadratic_expectation(const CMatrix& chi, const QuadraticObservable& o);

// 1/2 tr{O1 chi O2 (1 - chi)}
cplx connected_correlator(const CMatrix& chi, const CMatrix& o1, const CMatrix& o2);

// S_m = |m><m| - |m^><m^|
QuadraticObservable spin_z(int n, int m);
// Total particle number, 1/2 C^dag diag(1,-1) C.
QuadraticObservable number_operator(int n);

double zz_correlator(const CMatrix& chi, int l, int m);

// Mean of |C_{r+m,m}| over m in [M/2, M-1] with r + m <= M-1.
double averaged_correlation(const CMatrix& chi, int r);
// averaged_correlation for r = 0 .. M-1-M/2.
std::vector<double> correlation_profile(const CMatrix& chi);

enum class DecayKind { algebraic, exponential };
std::string to_string(DecayKind k);

struct DecayOptions {
  int r_min = 3;
  int tail_exclude = 0;  // number of trailing r values left out of the fit
  double floor = 1e-13;
  int min_points = 8;
  int min_points_truncated = 3;

  static DecayOptions for_chain(int M);  // tail_exclude = M/10
};

struct DecayFit {
  DecayKind kind = DecayKind::algebraic;
  double exponent = 0.0;  // C ~ r^-exponent
  double length = 0.0;    // C ~ exp(-r/length)
  double rss_algebraic = 0.0;
  double rss_exponential = 0.0;
  int points = 0;
  int r_first = 0, r_last = 0;
  bool truncated_by_floor = false;  // profile reached the floor inside the window
};

class InsufficientPointsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// profile[r] for r = 0, 1, ...
DecayFit classify_decay(const std::vector<double>& profile, const DecayOptions& opt = {});

// Energy current through bond (m-1, m) of the XY chain, 1 <= m <= M-2.
QuadraticObservable energy_current_xy(const XYSpec& spec, int m);

struct SiteRange {
  int first = 0, last = 0;  // inclusive
};

struct BoundaryCurrents {
  QuadraticObservable left;   // through the boundary at `first`
  QuadraticObservable right;  // through the boundary at `last`
  QuadraticObservable total;
  double conservation_defect = 0.0;  // max |[H_Sigma, Q_Sigma]|
};

class NonConservedError : public std::runtime_error {
 public:
  NonConservedError(double defect);
  double defect() const { return defect_; }

 private:
  double defect_;
};

// Current of Q leaving Sigma, -i[H_dSigma, Q_Sigma], split into the two boundaries.
BoundaryCurrents boundary_current(const HamiltonianMatrix& h, SiteRange sigma, const QuadraticObservable& q,
                                  double tol = 1e-10);

// Restriction of a Nambu matrix to the sites of a range (both blocks).
CMatrix restrict_to_sites(const CMatrix& a, SiteRange sigma);

}  // namespace nmq
