#include "cfsec/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "cfsec/stats.hpp"

namespace cfsec {

namespace {

using u128 = unsigned __int128;

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

u128 mod_inverse(u128 a, u128 m) {
  __int128 t = 0, new_t = 1;
  __int128 r = static_cast<__int128>(m), new_r = static_cast<__int128>(a % m);
  while (new_r != 0) {
    const __int128 q = r / new_r;
    t = std::exchange(new_t, t - q * new_t);
    r = std::exchange(new_r, r - q * new_r);
  }
  if (r != 1) throw std::logic_error("binning: multiplier not invertible");
  if (t < 0) t += static_cast<__int128>(m);
  return static_cast<u128>(t);
}

u128 gcd128(u128 a, u128 b) {
  while (b != 0) a = std::exchange(b, a % b);
  return a;
}

std::uint64_t uniform_below(std::mt19937_64& rng, u128 bound) {
  std::uniform_int_distribution<std::uint64_t> dist(0, static_cast<std::uint64_t>(bound - 1));
  return dist(rng);
}

long long alphabet(const LatticeChain& chain, int user) { return chain.ratios[static_cast<std::size_t>(user)]; }

void require_user(const LatticeChain& chain, int user) {
  if (user < 0 || user >= chain.users()) throw std::out_of_range("codec: user index out of range");
}

}  // namespace

std::vector<Fraction> convergents(double x, long long max_den) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("convergents: need finite x > 0");
  std::vector<Fraction> out;
  long long h_prev = 1, h_prev2 = 0, k_prev = 0, k_prev2 = 1;
  double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_real = std::floor(rest);
    if (a_real > 1e15) break;
    const auto a = static_cast<long long>(a_real);
    const long long h = a * h_prev + h_prev2;
    const long long k = a * k_prev + k_prev2;
    if (k > max_den) break;
    out.push_back({h, k});
    h_prev2 = std::exchange(h_prev, h);
    k_prev2 = std::exchange(k_prev, k);
    const double frac = rest - a_real;
    if (frac < 1e-12) break;
    rest = 1.0 / frac;
  }
  return out;
}

long long mod_centered(long long v, long long m) {
  if (m <= 0) throw std::invalid_argument("mod_centered: modulus must be positive");
  return v - m * floor_div(v + m / 2, m);
}

double mod_lattice(double x, double beta) { return x - beta * std::floor(x / beta + 0.5); }

LatticeChain build_chain(const ChannelInstance& inst, int n, int blocks, int grid_ratio, const ChainOptions& opts) {
  if (n < 1 || blocks < 1) throw std::invalid_argument("chain: n and blocks must be >= 1");
  if (grid_ratio < 2) throw std::invalid_argument("chain: grid_ratio must be >= 2");
  if (opts.dither_steps < 2 || opts.dither_steps % 2 != 0) throw std::invalid_argument("chain: dither_steps must be even");
  if ((inst.g.array() == 0.0).any()) throw std::invalid_argument("chain: zero eavesdropper gain");

  const auto k = static_cast<int>(inst.users());
  LatticeChain chain;
  chain.g = inst.g;
  chain.power = inst.power;
  chain.n = n;
  chain.blocks = blocks;
  chain.dither_steps = opts.dither_steps;
  chain.nesting_order.resize(static_cast<std::size_t>(k));
  std::iota(chain.nesting_order.begin(), chain.nesting_order.end(), 0);
  std::stable_sort(chain.nesting_order.begin(), chain.nesting_order.end(),
                   [&](int a, int b) { return std::abs(inst.g[a]) < std::abs(inst.g[b]); });

  const double base = std::abs(inst.g[chain.nesting_order.front()]);
  std::vector<Fraction> approx(static_cast<std::size_t>(k));
  for (int u = 0; u < k; ++u) {
    const double rho = std::abs(inst.g[u]) / base;
    const auto cands = convergents(rho, opts.max_ratio);
    auto hit = std::find_if(cands.begin(), cands.end(),
                            [&](const Fraction& f) { return std::abs(f.value() / rho - 1.0) <= opts.tolerance; });
    if (hit == cands.end()) {
      chain.approximable = false;
      approx[static_cast<std::size_t>(u)] = cands.empty() ? Fraction{std::llround(rho), 1} : cands.back();
    } else {
      approx[static_cast<std::size_t>(u)] = *hit;
    }
  }

  long long common = 1;
  for (const auto& f : approx) common = std::lcm(common, f.den);
  chain.ratios.resize(static_cast<std::size_t>(k));
  for (int u = 0; u < k; ++u) {
    const auto& f = approx[static_cast<std::size_t>(u)];
    chain.ratios[static_cast<std::size_t>(u)] = grid_ratio * f.num * (common / f.den);
  }
  if (*std::max_element(chain.ratios.begin(), chain.ratios.end()) > opts.max_ratio * grid_ratio)
    chain.approximable = false;

  const double r_first = static_cast<double>(chain.ratios[static_cast<std::size_t>(chain.nesting_order.front())]);
  chain.gamma = std::numeric_limits<double>::infinity();
  for (int u = 0; u < k; ++u) {
    const double r = static_cast<double>(chain.ratios[static_cast<std::size_t>(u)]);
    chain.gamma = std::min(chain.gamma, std::abs(inst.g[u]) * std::sqrt(12.0 * inst.power) / r);
    chain.approx_error = std::max(chain.approx_error, std::abs((r / r_first) / (std::abs(inst.g[u]) / base) - 1.0));
  }
  chain.betas.resize(k);
  for (int u = 0; u < k; ++u) chain.betas[u] = static_cast<double>(chain.ratios[static_cast<std::size_t>(u)]) * chain.gamma;

  chain.coarse_nested = true;
  for (std::size_t i = 1; i < chain.nesting_order.size(); ++i)
    if (chain.ratios[static_cast<std::size_t>(chain.nesting_order[i])] %
            chain.ratios[static_cast<std::size_t>(chain.nesting_order[i - 1])] != 0)
      chain.coarse_nested = false;
  return chain;
}

Binning make_binning(const LatticeChain& chain, int user, double rate_bits, std::uint64_t seed) {
  require_user(chain, user);
  if (rate_bits < 0.0) throw std::invalid_argument("binning: negative rate");
  const u128 r = static_cast<u128>(alphabet(chain, user));
  u128 size = 1;
  for (int i = 0; i < chain.length(); ++i) {
    size *= r;
    if (size > (u128{1} << 63)) throw std::invalid_argument("binning: outer codebook too large for the scalar demo");
  }
  int cap = 0;
  while ((u128{1} << (cap + 1)) <= size) ++cap;

  Binning b;
  b.user = user;
  b.codebook_size = size;
  const double requested = rate_bits * chain.length();
  b.bits = std::min(cap, static_cast<int>(std::floor(requested + 1e-9)));
  b.rate_loss = rate_bits - static_cast<double>(b.bits) / chain.length();

  auto rng = derived_rng(seed, {static_cast<std::uint64_t>(user), 0xB1u});
  do {
    b.multiplier = 1 + uniform_below(rng, size - 1 > 0 ? size - 1 : 1);
  } while (gcd128(b.multiplier, size) != 1);
  b.offset = uniform_below(rng, size);
  return b;
}

std::uint64_t bin_of(const Binning& bins, const LatticeChain& chain, const IntVector& indices) {
  const u128 r = static_cast<u128>(alphabet(chain, bins.user));
  u128 index = 0;
  for (Eigen::Index i = indices.size() - 1; i >= 0; --i) index = index * r + static_cast<u128>(indices[i]);
  const u128 sigma = (bins.multiplier * index + bins.offset) % bins.codebook_size;
  return static_cast<std::uint64_t>(sigma * bins.bins() / bins.codebook_size);
}

IntVector codeword_from_indices(const LatticeChain& chain, int user, const IntVector& indices) {
  const long long r = alphabet(chain, user);
  return (indices.array() - r / 2).matrix() * chain.dither_steps;
}

IntVector indices_from_codeword(const LatticeChain& chain, int user, const IntVector& t) {
  const long long r = alphabet(chain, user);
  return (t.array() / chain.dither_steps + r / 2).matrix();
}

Codeword transmit(const LatticeChain& chain, int user, const IntVector& t, const IntVector& dither) {
  require_user(chain, user);
  if (t.size() != dither.size()) throw std::invalid_argument("transmit: codeword and dither lengths differ");
  const long long m = chain.coarse_units(user);
  Codeword cw;
  cw.user = user;
  cw.t = t;
  cw.dither = dither;
  cw.aligned.resize(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) cw.aligned[i] = mod_centered(t[i] + dither[i], m);
  cw.x = cw.aligned.cast<double>() * (chain.unit() / chain.g[user]);
  return cw;
}

IntVector draw_dither(const LatticeChain& chain, int user, int block, std::uint64_t seed) {
  require_user(chain, user);
  const long long half = chain.coarse_units(user) / 2;
  auto rng = derived_rng(seed, {static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(block), 0xD1u});
  std::uniform_int_distribution<long long> dist(-half, half - 1);
  IntVector d(chain.n);
  for (auto& v : d) v = dist(rng);
  return d;
}

Codeword encode(const LatticeChain& chain, const Binning& bins, std::uint64_t w, std::uint64_t seed) {
  const int user = bins.user;
  if (w >= bins.bins()) throw std::invalid_argument("encode: bin index out of range");
  const u128 size = bins.codebook_size, nb = bins.bins();
  const u128 lo = (w * size + nb - 1) / nb;
  const u128 hi = ((w + 1) * size + nb - 1) / nb;
  if (hi <= lo) throw std::runtime_error("encode: empty bin");

  auto rng = derived_rng(seed, {static_cast<std::uint64_t>(user), 0xE1u});
  const u128 sigma = lo + uniform_below(rng, hi - lo);
  const u128 inv = mod_inverse(bins.multiplier, size);
  u128 index = ((sigma + size - bins.offset) % size) * inv % size;

  const long long r = alphabet(chain, user);
  IntVector indices(chain.length());
  for (auto& v : indices) {
    v = static_cast<long long>(index % static_cast<u128>(r));
    index /= static_cast<u128>(r);
  }
  IntVector dither(chain.length());
  for (int b = 0; b < chain.blocks; ++b) dither.segment(b * chain.n, chain.n) = draw_dither(chain, user, b, seed);
  return transmit(chain, user, codeword_from_indices(chain, user, indices), dither);
}

EavesdropperView eavesdropper_observation(const LatticeChain& chain, const std::vector<Codeword>& codewords,
                                          std::uint64_t noise_seed, bool noiseless) {
  const Eigen::Index len = chain.length();
  EavesdropperView view;
  Eigen::VectorXd exact_sum = Eigen::VectorXd::Zero(len);
  view.y = Eigen::VectorXd::Zero(len);
  view.aligned_sum = IntVector::Zero(len);
  view.codeword_sum = IntVector::Zero(len);
  IntVector t_sum = IntVector::Zero(len), d_sum = IntVector::Zero(len);
  for (const auto& cw : codewords) {
    if (cw.x.size() != len) throw std::invalid_argument("eavesdropper: codeword length mismatch");
    const Eigen::VectorXd scaled = chain.g[cw.user] * cw.x;
    view.y += scaled;
    for (Eigen::Index i = 0; i < len; ++i) view.aligned_sum[i] += std::llround(scaled[i] / chain.unit());
    view.codeword_sum += cw.aligned;
    exact_sum += cw.aligned.cast<double>() * chain.unit();
    t_sum += cw.t;
    d_sum += cw.dither;
  }
  view.alignment_residual = len == 0 ? 0 : (view.aligned_sum - view.codeword_sum).cwiseAbs().maxCoeff();
  view.float_residual = len == 0 ? 0.0 : (view.y - exact_sum).cwiseAbs().maxCoeff();

  const long long m1 = chain.coarse_units(chain.nesting_order.front());
  for (Eigen::Index i = 0; i < len; ++i)
    if (mod_centered(view.codeword_sum[i] - d_sum[i], m1) != mod_centered(t_sum[i], m1)) ++view.mod_identity_mismatches;

  if (!noiseless) {
    auto rng = derived_rng(noise_seed, {0x2Eu});
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto& v : view.y) v += noise(rng);
  }
  return view;
}

CryptoLemmaReport crypto_lemma_check(const LatticeChain& chain, std::size_t trials, std::uint64_t seed) {
  if (chain.users() < 2) throw std::invalid_argument("crypto lemma: need at least two users");
  const int first = chain.nesting_order.front();
  const long long m = alphabet(chain, first);

  std::vector<int> others;
  long long s_min = 0, s_max = 0;
  double joint = static_cast<double>(m);
  for (int u = 0; u < chain.users(); ++u) {
    if (u == first) continue;
    others.push_back(u);
    const long long r = alphabet(chain, u);
    s_min += -(r / 2);
    s_max += r - 1 - r / 2;
    joint *= static_cast<double>(r);
  }
  const auto cols = static_cast<std::size_t>(s_max - s_min + 1);
  const auto rows = static_cast<std::size_t>(m);
  const auto cell = [&](long long v, long long s) {
    return static_cast<std::size_t>(v + m / 2) * cols + static_cast<std::size_t>(s - s_min);
  };

  CryptoLemmaReport rep;
  rep.alphabet = m;

  if (joint <= 1e7) {
    std::vector<std::uint64_t> table(rows * cols, 0);
    std::vector<long long> digits(others.size(), 0);
    while (true) {
      long long s = 0;
      for (std::size_t i = 0; i < others.size(); ++i) s += digits[i] - alphabet(chain, others[i]) / 2;
      for (long long t1 = -(m / 2); t1 < m - m / 2; ++t1) ++table[cell(mod_centered(t1 + s, m), s)];
      std::size_t i = 0;
      while (i < digits.size() && ++digits[i] == alphabet(chain, others[i])) digits[i++] = 0;
      if (i == digits.size()) break;
    }
    rep.exact_checked = true;
    rep.exact_uniform = true;
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 1; i < rows; ++i)
        if (table[i * cols + j] != table[j]) rep.exact_uniform = false;
  }

  if (trials > 0) {
    if (trials < 5 * rows * cols) throw std::invalid_argument("crypto lemma: too few trials for the chi-square table");
    auto rng = derived_rng(seed, {0xC1u});
    std::vector<std::uint64_t> table(rows * cols, 0), marginal(rows, 0);
    std::uniform_int_distribution<long long> first_dist(-(m / 2), m - 1 - m / 2);
    for (std::size_t n = 0; n < trials; ++n) {
      long long s = 0;
      for (int u : others) {
        const long long r = alphabet(chain, u);
        s += std::uniform_int_distribution<long long>(-(r / 2), r - 1 - r / 2)(rng);
      }
      const long long v = mod_centered(first_dist(rng) + s, m);
      ++table[cell(v, s)];
      ++marginal[static_cast<std::size_t>(v + m / 2)];
    }
    rep.trials = trials;
    rep.uniform_p = chi_square_uniform_p(marginal);
    rep.independence_p = chi_square_independence_p(table, rows, cols);
  }
  return rep;
}

PowerStats power_statistics(const LatticeChain& chain, int user, std::size_t trials, std::uint64_t seed) {
  require_user(chain, user);
  if (trials < 2) throw std::invalid_argument("power: need at least two trials");
  const long long r = alphabet(chain, user);
  std::vector<double> power(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    auto rng = derived_rng(seed, {static_cast<std::uint64_t>(user), i, 0x90u});
    std::uniform_int_distribution<long long> pick(0, r - 1);
    IntVector indices(chain.length());
    for (auto& v : indices) v = pick(rng);
    const std::uint64_t dither_seed = rng();
    IntVector dither(chain.length());
    for (int b = 0; b < chain.blocks; ++b) dither.segment(b * chain.n, chain.n) = draw_dither(chain, user, b, dither_seed);
    const auto cw = transmit(chain, user, codeword_from_indices(chain, user, indices), dither);
    power[i] = cw.x.squaredNorm() / static_cast<double>(chain.length());
  }
  PowerStats st;
  st.trials = trials;
  st.limit = chain.power;
  st.mean = std::accumulate(power.begin(), power.end(), 0.0) / static_cast<double>(trials);
  double ss = 0.0;
  for (double p : power) ss += (p - st.mean) * (p - st.mean);
  st.sd = std::sqrt(ss / static_cast<double>(trials - 1));
  return st;
}

double dither_uniformity_p(const LatticeChain& chain, int user, long long t_units, std::size_t samples, int cells,
                           std::uint64_t seed) {
  require_user(chain, user);
  if (cells < 2) throw std::invalid_argument("dither uniformity: need >= 2 cells");
  const long long m = chain.coarse_units(user);
  auto rng = derived_rng(seed, {static_cast<std::uint64_t>(user), 0xD2u});
  std::uniform_int_distribution<long long> dist(-(m / 2), m / 2 - 1);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(cells), 0);
  for (std::size_t i = 0; i < samples; ++i) {
    const long long aligned = mod_centered(t_units + dist(rng), m);
    // Position of x = aligned * unit / g inside (1/g) V, measured along the cell.
    const long long pos = chain.g[user] > 0 ? aligned + m / 2 : m / 2 - 1 - aligned;
    ++counts[static_cast<std::size_t>(pos * cells / m)];
  }
  return chi_square_uniform_p(counts);
}

nlohmann::json to_json(const LatticeChain& chain) {
  return {{"betas", std::vector<double>(chain.betas.begin(), chain.betas.end())},
          {"gamma", chain.gamma},
          {"ratios", chain.ratios},
          {"nesting_order", chain.nesting_order},
          {"coarse_nested", chain.coarse_nested},
          {"approximable", chain.approximable},
          {"approx_error", chain.approx_error},
          {"n", chain.n},
          {"blocks", chain.blocks},
          {"dither_steps", chain.dither_steps}};
}

}  // namespace cfsec
