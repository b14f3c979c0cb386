#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cfsec/channel.hpp"
#include "cfsec/effective_matrix.hpp"

namespace cfsec {

struct Fraction {
  long long num;
  long long den;
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Continued-fraction convergents of x > 0 with denominators up to max_den.
std::vector<Fraction> convergents(double x, long long max_den);

/// Centered reduction into [-m/2, m/2) for an even modulus m (integer grid units).
long long mod_centered(long long v, long long m);

/// [x mod beta Z] in [-beta/2, beta/2).
double mod_lattice(double x, double beta);

/// Scalar nested lattice chain, one coarse lattice beta_l Z per user on a
/// common fine lattice gamma Z. All codec arithmetic happens on the integer
/// grid of step gamma / dither_steps, so sums are exact.
struct LatticeChain {
  Eigen::VectorXd g;
  double power = 1.0;
  Eigen::VectorXd betas;
  double gamma = 1.0;
  std::vector<long long> ratios;     // beta_l / gamma, i.e. |L_l| per dimension
  std::vector<int> nesting_order;    // users by increasing |g|; front() owns the densest coarse lattice
  bool coarse_nested = false;        // every coarse lattice contains the next one in nesting order
  bool approximable = true;          // gain ratios met the tolerance with integers <= max_ratio
  double approx_error = 0.0;         // max relative error of beta_l / beta_first against |g_l| / |g_first|
  int n = 1;
  int blocks = 1;
  long long dither_steps = 4096;     // grid steps per gamma; even

  [[nodiscard]] int users() const { return static_cast<int>(ratios.size()); }
  [[nodiscard]] int length() const { return n * blocks; }
  [[nodiscard]] double unit() const { return gamma / static_cast<double>(dither_steps); }
  [[nodiscard]] long long coarse_units(int user) const { return ratios[static_cast<std::size_t>(user)] * dither_steps; }
};

struct ChainOptions {
  double tolerance = 0.01;
  long long max_ratio = 10'000;
  long long dither_steps = 4096;
};

/// Coarse scalings proportional to |g_l| (second moment g_l^2 P per
/// dimension, never above it), approximated by continued-fraction
/// convergents so that every beta_l is an integer multiple of gamma. The
/// smallest ratio is `grid_ratio` times the common denominator.
LatticeChain build_chain(const ChannelInstance& inst, int n, int blocks, int grid_ratio, const ChainOptions& opts = {});

/// Random equal-size binning of the outer codebook (r^N codewords) into
/// 2^bits bins through a seeded affine permutation of codeword indices.
struct Binning {
  int user = 0;
  unsigned __int128 codebook_size = 0;
  int bits = 0;
  unsigned __int128 multiplier = 1;
  unsigned __int128 offset = 0;
  double rate_loss = 0.0;  // requested rate minus bits / N

  [[nodiscard]] std::uint64_t bins() const { return std::uint64_t{1} << bits; }
};

Binning make_binning(const LatticeChain& chain, int user, double rate_bits, std::uint64_t seed);

/// Bin that an outer codeword (fine-grid indices in [0, r)) falls into.
std::uint64_t bin_of(const Binning& bins, const LatticeChain& chain, const IntVector& indices);

struct Codeword {
  int user = 0;
  IntVector t;        // inner codewords, grid units
  IntVector dither;   // grid units
  IntVector aligned;  // [t + d] mod Lambda_l, grid units
  Eigen::VectorXd x;  // transmitted signal
};

/// Block-wise [t + d] mod Lambda_l scaled by 1/g_l. Inputs are in grid units, length N.
Codeword transmit(const LatticeChain& chain, int user, const IntVector& t, const IntVector& dither);

/// Dither for one block of n symbols, uniform over the Voronoi cell on the grid.
IntVector draw_dither(const LatticeChain& chain, int user, int block, std::uint64_t seed);

/// Fine-grid indices in [0, r) to inner codeword coordinates in grid units, and back.
IntVector codeword_from_indices(const LatticeChain& chain, int user, const IntVector& indices);
IntVector indices_from_codeword(const LatticeChain& chain, int user, const IntVector& t);

/// Picks a uniform codeword from bin w, dithers it and transmits.
Codeword encode(const LatticeChain& chain, const Binning& bins, std::uint64_t w, std::uint64_t seed);

struct EavesdropperView {
  Eigen::VectorXd y;
  IntVector aligned_sum;        // sum_l round(g_l x_l / unit)
  IntVector codeword_sum;       // sum_l [t_l + d_l] mod Lambda_l
  long long alignment_residual = 0;   // max |aligned_sum - codeword_sum|, grid units
  double float_residual = 0.0;        // max |sum g_l x_l - sum t~_l|
  long long mod_identity_mismatches = 0;  // coordinates where [sum g x - sum d] != [sum t] mod the densest coarse lattice
};

EavesdropperView eavesdropper_observation(const LatticeChain& chain, const std::vector<Codeword>& codewords,
                                          std::uint64_t noise_seed, bool noiseless = false);

struct CryptoLemmaReport {
  long long alphabet = 0;       // |L_1|
  bool exact_checked = false;
  bool exact_uniform = false;   // every conditional row exactly uniform
  std::size_t trials = 0;
  double uniform_p = 1.0;       // chi-square, marginal of the mod-sum
  double independence_p = 1.0;  // chi-square, mod-sum vs sum of the others
};

/// ([t_1 + sum_{l>=2} t_l] mod Lambda_1, sum_{l>=2} t_l) must be uniform in the
/// first coordinate and independent of the second. Exact enumeration when the
/// joint alphabet is small, plus a seeded Monte Carlo chi-square check.
CryptoLemmaReport crypto_lemma_check(const LatticeChain& chain, std::size_t trials, std::uint64_t seed);

struct PowerStats {
  double mean = 0.0;
  double sd = 0.0;
  double limit = 0.0;
  std::size_t trials = 0;
  [[nodiscard]] bool within_limit() const {
    return mean <= limit + 3.0 * sd / std::sqrt(static_cast<double>(trials));
  }
};

/// (1/N)||x_l||^2 over independent dithers and uniform codewords.
PowerStats power_statistics(const LatticeChain& chain, int user, std::size_t trials, std::uint64_t seed);

/// Chi-square p-value that x_l is uniform over (1/g_l) V_l for a fixed codeword.
double dither_uniformity_p(const LatticeChain& chain, int user, long long t_units, std::size_t samples, int cells,
                           std::uint64_t seed);

nlohmann::json to_json(const LatticeChain& chain);

}  // namespace cfsec
