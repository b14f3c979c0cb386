#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace cfsec {

/// K independent vectors s_l, uniform over the cubic Voronoi cells of
/// beta_l Z^n with beta_l^2 / 12 = g_l^2 P, summed and quantized to beta_j Z^n.
struct QuantizerExperiment {
  int n = 1;
  Eigen::VectorXd g;
  double power = 1.0;
  double epsilon = 0.1;
  std::size_t trials = 100'000;

  [[nodiscard]] int users() const { return static_cast<int>(g.size()); }
  [[nodiscard]] Eigen::VectorXd betas() const { return g.cwiseAbs() * std::sqrt(12.0 * power); }
};

QuantizerExperiment make_experiment(int n, Eigen::VectorXd g, double power, double epsilon, std::size_t trials);

/// One draw of u_j = Q_{beta_j Z^n}(sum_l s_l), ties rounded to even.
Eigen::VectorXd quantize_sum(const QuantizerExperiment& exp, int j, std::mt19937_64& rng);

/// CDF of a sum of independent uniforms on [-w_l/2, w_l/2].
double uniform_sum_cdf(const Eigen::VectorXd& widths, double x);

/// Exact per-coordinate pmf of u_j / beta_j; `offset` is the lattice index of pmf[0].
struct LatticePmf {
  long long offset = 0;
  std::vector<double> p;
};
LatticePmf quantized_sum_pmf(const QuantizerExperiment& exp, int j);

double entropy_bits(const std::vector<double>& pmf);

struct EntropyEstimate {
  double exact = 0.0;        // (1/n) H(u_j), bits per dimension
  double mc = 0.0;           // plug-in with Miller-Madow correction
  double mc_se = 0.0;
  bool pooled = false;       // estimated from pooled coordinates instead of whole vectors
  [[nodiscard]] bool agrees() const { return std::abs(mc - exact) <= 3.0 * mc_se; }
};

EntropyEstimate entropy_per_dim(const QuantizerExperiment& exp, int j, std::uint64_t seed);

double unit_ball_volume(int n);

/// Cube cell of side beta: covering radius (sqrt(n)/2) beta and equal-volume ball radius.
double covering_radius(int n, double beta);
double effective_radius(int n, double beta);

/// 0.5 log2((sum_l (rcov/reff)^2 g_l^2 + eps) / ((reff_j/rcov_j)^2 g_j^2)).
double ratio_bound(const QuantizerExperiment& exp, int j);

/// Same bound with every covering/effective ratio set to 1.
double clean_bound(const QuantizerExperiment& exp, int j);

/// sum_l (rcov_l/reff_l)^2 g_l^2 P.
double equivalent_noise_variance(const QuantizerExperiment& exp);

/// Per-dimension second moment of the ball of radius r in R^n: r^2 / (n + 2).
double ball_second_moment(int n, double radius);

/// Monte Carlo Pr(||sum s_l||^2 > n (sigma_eq^2 + eps)).
double tail_probability(const QuantizerExperiment& exp, std::size_t samples, std::uint64_t seed);

}  // namespace cfsec
