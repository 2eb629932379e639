#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmq/nambu.hpp"
#include "nmq/spectral.hpp"

namespace nmq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// beta is the physical inverse temperature: +inf is T = 0, 0 is T = inf.
struct Reservoir {
  HybridizationMatrix gamma;
  double beta = kInf;
  double mu = 0.0;
  std::string label;
};

Reservoir make_reservoir(HybridizationMatrix gamma, double beta, double mu, std::string label = {});
double beta_from_temperature(double temperature);

class QuadraticModel {
 public:
  QuadraticModel() = default;
  QuadraticModel(HamiltonianMatrix h, std::vector<Reservoir> reservoirs);

  int modes() const { return h_.modes(); }
  int dim() const { return h_.dim(); }
  const HamiltonianMatrix& hamiltonian() const { return h_; }
  const std::vector<Reservoir>& reservoirs() const { return reservoirs_; }
  Reservoir& reservoir(std::size_t nu) { return reservoirs_.at(nu); }

  // sum_nu (Gamma_nu + hat(Gamma_nu))
  CMatrix total_gamma() const;

 private:
  HamiltonianMatrix h_;
  std::vector<Reservoir> reservoirs_;
};

// K = H_c - i Gamma
CMatrix build_K(const QuadraticModel& model);

class KernelError : public std::runtime_error {
 public:
  KernelError(std::size_t reservoir, const std::string& what);
  std::size_t reservoir() const { return reservoir_; }

 private:
  std::size_t reservoir_;
};

// Model plus the cached decomposition of K. Immutable; safe to share across threads.
class OpenSystem {
 public:
  explicit OpenSystem(QuadraticModel model, double max_condition = kMaxCondition);

  const QuadraticModel& model() const { return model_; }
  int modes() const { return model_.modes(); }
  int dim() const { return model_.dim(); }
  const CMatrix& K() const { return k_; }
  const CMatrix& gamma() const { return gamma_; }
  const SpectralDecomposition& spectrum() const { return spec_; }

  // Noise of reservoir nu at time t >= 0, not symmetrized.
  CMatrix reservoir_noise(std::size_t nu, double t) const;
  // Stationary (t -> inf) noise of reservoir nu.
  CMatrix reservoir_noise_stationary(std::size_t nu) const;

  // Total N(t), symmetrized. The pre-symmetrization defect is optionally returned.
  CMatrix noise(double t, double* hermiticity_defect = nullptr) const;

  // Same system with a different chemical potential / temperature on one reservoir.
  // K does not depend on them, so the decomposition is reused.
  OpenSystem with_reservoir(std::size_t nu, double beta, double mu) const;

 private:
  CMatrix assemble(std::size_t nu, const CMatrix& minus, const CMatrix& plus) const;

  QuadraticModel model_;
  CMatrix k_;
  CMatrix gamma_;
  SpectralDecomposition spec_;
};

CMatrix noise_matrix(const QuadraticModel& model, double t);

struct RateDecomposition {
  Eigen::VectorXd rates;  // descending
  CMatrix modes;          // column l is |l>
  double zero_threshold = 1e-10;

  int size() const { return static_cast<int>(rates.size()); }
  int null_count() const;
  int active_count() const { return size() - null_count(); }
  CMatrix reconstruct() const;
};

RateDecomposition rate_decomposition(const CMatrix& n, double zero_threshold = 1e-10);

// f_nM = 1/2 sum_l (|gamma_l| - gamma_l); rates within the zero threshold count as zero.
double non_markovianity(const RateDecomposition& rd);
double non_markovianity(std::span<const double> rates, double zero_threshold = 0.0);

enum class Side { left, right };

struct ModeLabel {
  Sector sector = Sector::particle;
  Side side = Side::left;
  double particle_weight = 0.0;
  double left_weight = 0.0;

  std::string name() const;  // "Lp", "Rh", ...
};

// Weight on the particle block and on the left half of the sites, threshold 0.5.
ModeLabel label_mode(const CVector& mode);

struct JumpOperator {
  double rate = 0.0;
  CVector coefficients;  // L = sum_i coefficients(i) C_i
  ModeLabel label;
};

std::vector<JumpOperator> jump_operators(const OpenSystem& system, double t,
                                         double zero_threshold = 1e-10);

struct RateRow {
  double t = 0.0;
  Eigen::VectorXd rates;
  double f_nm = 0.0;
};

std::vector<RateRow> rate_trace(const OpenSystem& system, const std::vector<double>& times,
                                double zero_threshold = 1e-10);

// 0, then n_log geometric points in [t_min, t_split], then n_lin linear points up to t_max.
// Without geometric points the linear part starts at 0.
std::vector<double> hybrid_time_grid(double t_max, int n_log, int n_lin, double t_min = 1e-3,
                                     double t_split = -1.0);

}  // namespace nmq
