#include "cfsec/lemma1.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "cfsec/stats.hpp"

namespace cfsec {

namespace {

void require_index(const QuantizerExperiment& exp, int j) {
  if (j < 0 || j >= exp.users()) throw std::out_of_range("lemma1: lattice index out of range");
}

double log_ball_volume(int n) {
  const double half = 0.5 * n;
  return half * std::log(std::numbers::pi) - std::lgamma(half + 1.0);
}

double cube_ratio_sq(int n) {
  const double r = covering_radius(n, 1.0) / effective_radius(n, 1.0);
  return r * r;
}

}  // namespace

QuantizerExperiment make_experiment(int n, Eigen::VectorXd g, double power, double epsilon, std::size_t trials) {
  if (n < 1) throw std::invalid_argument("lemma1: n must be >= 1");
  if (g.size() < 1 || (g.array() == 0.0).any() || !g.array().isFinite().all())
    throw std::invalid_argument("lemma1: gains must be finite and nonzero");
  if (!(power > 0.0)) throw std::invalid_argument("lemma1: power must be > 0");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("lemma1: epsilon must be >= 0");
  return QuantizerExperiment{n, std::move(g), power, epsilon, trials};
}

Eigen::VectorXd quantize_sum(const QuantizerExperiment& exp, int j, std::mt19937_64& rng) {
  require_index(exp, j);
  const Eigen::VectorXd beta = exp.betas();
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(exp.n);
  for (int l = 0; l < exp.users(); ++l)
    for (int i = 0; i < exp.n; ++i) s[i] += beta[l] * unit(rng);
  // std::nearbyint follows the default rounding mode: nearest, ties to even.
  return s.unaryExpr([bj = beta[j]](double v) { return bj * std::nearbyint(v / bj); });
}

double uniform_sum_cdf(const Eigen::VectorXd& widths, double x) {
  const auto k = static_cast<int>(widths.size());
  const double lo = -0.5 * widths.sum();
  if (x <= lo) return 0.0;
  if (x >= -lo) return 1.0;
  // Inclusion-exclusion over subsets of the upper endpoints.
  double acc = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    double shift = 0.0;
    int bits = 0;
    for (int l = 0; l < k; ++l)
      if (mask & (1u << l)) {
        shift += widths[l];
        ++bits;
      }
    const double t = x - lo - shift;
    if (t > 0.0) acc += ((bits % 2) ? -1.0 : 1.0) * std::pow(t, k);
  }
  return std::clamp(acc / (std::tgamma(k + 1.0) * widths.prod()), 0.0, 1.0);
}

LatticePmf quantized_sum_pmf(const QuantizerExperiment& exp, int j) {
  require_index(exp, j);
  // Work in units of beta_j; the pmf is scale-free.
  const Eigen::VectorXd w = exp.betas() / exp.betas()[j];
  const double half = 0.5 * w.sum();
  LatticePmf out;
  out.offset = static_cast<long long>(std::floor(-half + 0.5));
  const auto last = static_cast<long long>(std::ceil(half - 0.5));
  for (long long m = out.offset; m <= last; ++m)
    out.p.push_back(std::max(uniform_sum_cdf(w, m + 0.5) - uniform_sum_cdf(w, m - 0.5), 0.0));
  return out;
}

double entropy_bits(const std::vector<double>& pmf) {
  double h = 0.0;
  for (double p : pmf)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

EntropyEstimate entropy_per_dim(const QuantizerExperiment& exp, int j, std::uint64_t seed) {
  require_index(exp, j);
  if (exp.trials < 2) throw std::invalid_argument("lemma1: need at least two trials");
  EntropyEstimate est;
  const auto pmf = quantized_sum_pmf(exp, j);
  est.exact = entropy_bits(pmf.p);

  // Coordinates are i.i.d. for product lattices; whole-vector histograms are
  // used only while the support is small against the sample count.
  const std::size_t support = std::count_if(pmf.p.begin(), pmf.p.end(), [](double p) { return p > 0.0; });
  const double vector_support = std::pow(static_cast<double>(support), exp.n);
  est.pooled = vector_support * 10.0 > static_cast<double>(exp.trials);

  auto rng = derived_rng(seed, {static_cast<std::uint64_t>(j), 0x1Eu});
  const double bj = exp.betas()[j];
  std::map<std::vector<long long>, std::size_t> hist;
  std::size_t total = 0;
  for (std::size_t t = 0; t < exp.trials; ++t) {
    const Eigen::VectorXd u = quantize_sum(exp, j, rng);
    if (est.pooled) {
      for (double v : u) {
        ++hist[{std::llround(v / bj)}];
        ++total;
      }
    } else {
      std::vector<long long> key(static_cast<std::size_t>(exp.n));
      for (int i = 0; i < exp.n; ++i) key[static_cast<std::size_t>(i)] = std::llround(u[i] / bj);
      ++hist[key];
      ++total;
    }
  }

  const auto nt = static_cast<double>(total);
  double h = 0.0, second = 0.0;
  for (const auto& [key, c] : hist) {
    const double p = static_cast<double>(c) / nt;
    h -= p * std::log2(p);
    second += p * std::log2(p) * std::log2(p);
  }
  const double var = std::max(second - h * h, 0.0);
  const double miller_madow = (static_cast<double>(hist.size()) - 1.0) / (2.0 * nt * std::numbers::ln2);
  const double dims = est.pooled ? 1.0 : static_cast<double>(exp.n);
  est.mc = (h + miller_madow) / dims;
  est.mc_se = std::sqrt(var / nt) / dims;
  return est;
}

double unit_ball_volume(int n) { return std::exp(log_ball_volume(n)); }

double covering_radius(int n, double beta) { return 0.5 * std::sqrt(static_cast<double>(n)) * beta; }

double effective_radius(int n, double beta) { return beta * std::exp(-log_ball_volume(n) / n); }

double ratio_bound(const QuantizerExperiment& exp, int j) {
  require_index(exp, j);
  const double rho2 = cube_ratio_sq(exp.n);
  const Eigen::ArrayXd g2 = exp.g.array().square();
  return 0.5 * std::log2((rho2 * g2.sum() + exp.epsilon) / (g2[j] / rho2));
}

double clean_bound(const QuantizerExperiment& exp, int j) {
  require_index(exp, j);
  const Eigen::ArrayXd g2 = exp.g.array().square();
  return 0.5 * std::log2((g2.sum() + exp.epsilon) / g2[j]);
}

double equivalent_noise_variance(const QuantizerExperiment& exp) {
  return cube_ratio_sq(exp.n) * exp.g.squaredNorm() * exp.power;
}

double ball_second_moment(int n, double radius) { return radius * radius / (n + 2.0); }

double tail_probability(const QuantizerExperiment& exp, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("lemma1: need samples for the tail estimate");
  const Eigen::VectorXd beta = exp.betas();
  const double threshold = exp.n * (equivalent_noise_variance(exp) + exp.epsilon);
  auto rng = derived_rng(seed, {static_cast<std::uint64_t>(exp.n), 0x7Au});
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::size_t outside = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    double norm2 = 0.0;
    for (int i = 0; i < exp.n; ++i) {
      double s = 0.0;
      for (int l = 0; l < exp.users(); ++l) s += beta[l] * unit(rng);
      norm2 += s * s;
    }
    if (norm2 > threshold) ++outside;
  }
  return static_cast<double>(outside) / static_cast<double>(samples);
}

}  // namespace cfsec
