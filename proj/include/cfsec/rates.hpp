#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cfsec/channel.hpp"
#include "cfsec/effective_matrix.hpp"
#include "cfsec/lattice.hpp"

namespace cfsec {

/// Successive cancellation order. `to_equation[l]` is the equation index
/// pi(l) assigned to user l; `to_user` is the inverse map. Zero-based.
struct Permutation {
  std::vector<int> to_equation;
  std::vector<int> to_user;

  static Permutation from_users(std::vector<int> user_order);
  static Permutation identity(int k);
  [[nodiscard]] int size() const { return static_cast<int>(to_equation.size()); }
  bool operator==(const Permutation&) const = default;
};

struct RateReport {
  Eigen::VectorXd r_comb;         // per equation, bits, under best_pi
  Permutation best_pi;
  double r_sum_secure = 0.0;
  Eigen::VectorXd allocation;     // per user
  double r_baseline = 0.0;
  double r_nonsecure_sum = 0.0;   // sum of r_comb
  double capacity_sum = 0.0;      // 0.5 log2(1 + ||h||^2 P)
  CoefficientMatrix coefficients;
  std::vector<Permutation> admissible;
};

/// max(0.5 log2(snr / a^T G a), 0).
double rate_comb(const EffectiveMatrix& f, const IntVector& a, double snr);

/// Per-equation computation rates when equation k is decoded for user pi^{-1}(k).
Eigen::VectorXd computation_rates(const EffectiveMatrix& f, const CoefficientMatrix& a, const Permutation& pi);

/// Orders under which elimination of the equations, taken in their fixed
/// order and without row swaps, recovers user pi^{-1}(k) at step k: every
/// leading k x k minor of A restricted to columns pi^{-1}(1..k) is nonzero.
std::vector<Permutation> admissible_orders(const IntMatrix& a);

/// Largest secure sum rate over admissible orders, with per-user allocation.
RateReport secure_sum_rate(const ChannelInstance& inst, const PowerPolicy& policy, const EffectiveMatrix& f,
                           const CoefficientMatrix& a);

/// Greedy fill of `budget` into users by decreasing cap.
Eigen::VectorXd allocate_user_rates(double budget, const Eigen::VectorXd& caps);

/// Gaussian random-coding secure sum rate: max(0.5 log2((1+||h||^2 P)/(1+||g||^2 P)), 0).
double baseline_random_coding(const ChannelInstance& inst);

double capacity_sum(const ChannelInstance& inst);

struct CombBound {
  double lhs;  // sum of computation rates
  double rhs;  // 0.5 log2(1 + ||h||^2 P) - (K/2) log2 K
};

CombBound sum_comb_lower_bound(const ChannelInstance& inst, const PowerPolicy& policy,
                               const SearchOptions& opts = {});

/// Secrecy policy, effective matrix, coefficient search and secure sum rate in one call.
RateReport evaluate(const ChannelInstance& inst, const SearchOptions& opts = {});

/// Least-squares slope of y against x.
double fitted_slope(std::span<const double> x, std::span<const double> y);

struct DofFit {
  double secure_slope;
  double baseline_slope;
  std::vector<double> snr_db;
  std::vector<double> r_sum;
  std::vector<double> r_baseline;
};

/// Slopes of R_sum and the baseline against 0.5 log2(1+P) over the top half
/// of `snr_grid_db`, for fixed gains. The grid must span >= 40 dB with >= 8 points.
DofFit dof_slope(const Eigen::VectorXd& h, const Eigen::VectorXd& g, std::span<const double> snr_grid_db,
                 const SearchOptions& opts = {});

nlohmann::json to_json(const RateReport& report);

}  // namespace cfsec
