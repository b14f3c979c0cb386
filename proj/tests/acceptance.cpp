// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cfsec/codec.hpp"
#include "cfsec/experiment.hpp"
#include "cfsec/lattice.hpp"
#include "cfsec/lemma1.hpp"
#include "cfsec/rates.hpp"
#include "cfsec/stats.hpp"

using namespace cfsec;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Outcome&)> run;
};

void point_to_point(Outcome& o) {
  double worst = 0.0;
  for (double p : {1.0, 15.0, 1e3}) {
    const auto inst = make_instance(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), p);
    const auto f = build_effective_matrix(inst, unit_power_policy(inst));
    worst = std::max(worst, std::abs(rate_comb(f, IntVector::Ones(1), p) - 0.5 * std::log2(1.0 + p)));
  }
  o.detail << "max error " << worst;
  o.require(worst < 1e-9, "error >= 1e-9");
}

// The box |a_i| <= 8 provably holds every vector of norm <= lambda when
// lambda (G^-1)_ii <= 64 for all i.
bool box_certified(const Eigen::MatrixXd& gram, double lambda, int radius) {
  const Eigen::VectorXd d = gram.inverse().diagonal();
  return (lambda * d.array()).maxCoeff() <= static_cast<double>(radius) * radius;
}

void oracle_equivalence(Outcome& o) {
  int mismatches = 0, degraded = 0, certified = 0, worse = 0;
  std::uint64_t seed = 0;
  for (; certified < 200 && seed < 10'000; ++seed) {
    const int k = 2 + static_cast<int>(seed % 2);
    auto rng = derived_rng(seed, {0xACCu});
    auto [h, g] = gaussian_gains(k, rng());
    const double db = std::uniform_real_distribution<double>(0.0, 30.0)(rng);
    const auto inst = make_instance(h, g, db_to_linear(db));
    const auto f = build_effective_matrix(inst, secrecy_power_policy(inst));
    const auto fast = shortest_independent_vectors(f.gram);
    const auto slow = brute_force_minima(f.gram, 8);
    if (fast.degraded) ++degraded;
    if ((fast.norms.array() > slow.norms.array() * (1.0 + 1e-12)).any()) ++worse;
    if (!box_certified(f.gram, slow.norms[k - 1], 8)) continue;
    ++certified;
    if (fast.norms != slow.norms) ++mismatches;
  }
  o.detail << mismatches << "/" << certified << " norm mismatches on box-certified instances (" << seed
           << " drawn), " << worse << " where enumeration is longer than the box search, " << degraded << " degraded";
  o.require(certified == 200, "fewer than 200 certified instances");
  o.require(mismatches == 0, "norms differ from brute force");
  o.require(worse == 0, "enumeration worse than brute force");
}

void dof(Outcome& o) {
  std::vector<double> grid;
  for (double db = 20.0; db <= 100.0; db += 5.0) grid.push_back(db);
  const double c2 = std::cbrt(2.0);
  const struct {
    int k;
    Eigen::VectorXd h, g;
  } families[] = {
      {2, Eigen::Vector2d(1.0, std::numbers::sqrt2), Eigen::Vector2d(1.0, 1.0)},
      {3, Eigen::Vector3d(1.0, c2, c2 * c2), Eigen::Vector3d(1.0, 1.0, 1.0)},
  };
  for (const auto& fam : families) {
    const auto fit = dof_slope(fam.h, fam.g, grid);
    const double target = (fam.k - 1.0) / fam.k;
    o.detail << "K=" << fam.k << " slope " << fit.secure_slope << " (target " << target << "), baseline "
             << fit.baseline_slope << "; ";
    o.require(std::abs(fit.secure_slope - target) <= 0.05, "secure slope off for K=" + std::to_string(fam.k));
    o.require(std::abs(fit.baseline_slope) <= 0.02, "baseline slope off for K=" + std::to_string(fam.k));
  }
}

void scaling_bound(Outcome& o) {
  int violations = 0;
  double min_gap = INFINITY;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto [h, g] = gaussian_gains(3, derived_rng(seed, {0x5CAu})());
    for (double db : {20.0, 40.0, 60.0}) {
      const auto inst = make_instance(h, g, db_to_linear(db));
      const auto b = sum_comb_lower_bound(inst, secrecy_power_policy(inst));
      min_gap = std::min(min_gap, b.lhs - b.rhs);
      if (b.lhs < b.rhs) ++violations;
    }
  }
  o.detail << violations << "/300 violations, min slack " << min_gap << " bits";
  o.require(violations == 0, "lower bound violated");
}

void theta_sweep(Outcome& o) {
  SweepConfig cfg;
  cfg.grid = SnrGrid::parse("25");
  cfg.points = 512;
  const auto rows = run_theta_sweep(cfg);
  int positive = 0, nonzero_baseline = 0;
  for (const auto& r : rows) {
    if (r.r_sum_secure > 0.0) ++positive;
    if (r.r_baseline != 0.0) ++nonzero_baseline;
  }
  const double frac = positive / 512.0;
  o.detail << "secure > 0 on " << positive << "/512 (" << 100.0 * frac << "%), nonzero baseline at "
           << nonzero_baseline << " points";
  o.require(nonzero_baseline == 0, "baseline not exactly zero");
  o.require(frac >= 0.9, "positive fraction below 90%");
}

void snr_sweep(Outcome& o) {
  SweepConfig cfg;
  cfg.users = 3;
  cfg.grid = SnrGrid::parse("0:60:2");
  cfg.trials = 50;
  cfg.seed = 1;
  const auto rows = run_snr_sweep(cfg);
  int beaten = 0, above_cap = 0, checked = 0;
  for (const auto& r : rows) {
    if (r.r_sum_secure > r.capacity_sum || r.r_baseline > r.capacity_sum) ++above_cap;
    if (r.trial != -1 || r.x < 30.0) continue;
    ++checked;
    if (!(r.r_sum_secure > r.r_baseline)) ++beaten;
  }
  o.detail << checked << " points >= 30 dB, " << beaten << " where secure <= baseline, " << above_cap
           << " rows above capacity";
  o.require(beaten == 0, "mean secure rate does not exceed baseline");
  o.require(above_cap == 0, "rate above capacity");
}

void lemma_one(Outcome& o) {
  for (int k : {2, 3}) {
    for (int n : {1, 2, 4, 8, 16}) {
      const auto e = make_experiment(n, Eigen::VectorXd::Ones(k), 1.0, 0.1, 100'000);
      const double h = entropy_per_dim(e, 0, 1).exact;
      const double bound = ratio_bound(e, 0);
      if (h > bound) {
        o.detail << " H=" << h << ">bound=" << bound << " at n=" << n << ",K=" << k << ";";
        o.require(false, "entropy above ratio bound");
      }
    }
  }
  const double closed = -2 * 0.125 * std::log2(0.125) - 0.75 * std::log2(0.75);
  const auto est = entropy_per_dim(make_experiment(1, Eigen::Vector2d::Ones(), 1.0, 0.1, 100'000), 0, 7);
  o.detail << " n=1,K=2 exact " << est.exact << " mc " << est.mc << " +- " << est.mc_se << ";";
  o.require(std::abs(est.exact - closed) < 1e-6, "exact entropy off the closed form");
  o.require(std::abs(est.mc - closed) <= 3.0 * est.mc_se, "MC entropy outside 3 SE");
  double prev = 1.0;
  o.detail << " tail";
  for (int n : {4, 16, 64, 256}) {
    const double t = tail_probability(make_experiment(n, Eigen::Vector2d::Ones(), 1.0, 0.1, 100'000), 100'000, 3);
    o.detail << " n=" << n << ":" << t;
    o.require(t <= prev, "tail increased at n=" + std::to_string(n));
    prev = t;
  }
  o.require(prev < 0.1, "tail at n=256 not below 0.1");
}

void codec(Outcome& o) {
  long long worst_alignment = 0;
  int power_failures = 0;
  for (const auto& gains : {std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 1.0},
                            std::vector<double>{1.0, 2.0, 4.0}, std::vector<double>{2.0, 3.0}}) {
    Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(gains.data(), static_cast<Eigen::Index>(gains.size()));
    const auto chain = build_chain(make_instance(g, g, 100.0), 1, 8, 4);
    std::vector<Binning> bins;
    for (int u = 0; u < chain.users(); ++u) bins.push_back(make_binning(chain, u, 0.5, 11 + u));
    for (std::uint64_t w = 0; w < 16; ++w) {
      std::vector<Codeword> words;
      for (int u = 0; u < chain.users(); ++u) words.push_back(encode(chain, bins[u], (w + u) % 16, 100 * w + u));
      worst_alignment = std::max(worst_alignment, eavesdropper_observation(chain, words, w, true).alignment_residual);
    }
    for (int u = 0; u < chain.users(); ++u) {
      if (!power_statistics(chain, u, 1000, 5 + u).within_limit()) ++power_failures;
    }
  }
  o.detail << "max alignment residual " << worst_alignment << " grid units, power failures " << power_failures
           << ", crypto";
  o.require(worst_alignment == 0, "alignment residual nonzero");
  o.require(power_failures == 0, "power above P + 3 SE");
  for (int r : {2, 4, 8}) {
    const auto chain = build_chain(make_instance(Eigen::Vector2d::Ones(), Eigen::Vector2d::Ones(), 1.0), 1, 1, r);
    const auto rep = crypto_lemma_check(chain, 100'000, static_cast<std::uint64_t>(r));
    o.detail << " |L|=" << rep.alphabet << (rep.exact_uniform ? " exact" : " NOT-exact") << " p=" << rep.uniform_p;
    o.require(rep.alphabet == r && rep.exact_checked && rep.exact_uniform, "crypto lemma enumeration");
    o.require(rep.uniform_p > 0.01, "crypto lemma chi-square");
  }
}

// Gaussian elimination over Q on the columns in user order, without row swaps.
bool eliminates_in_order(const IntMatrix& a, const std::vector<int>& order) {
  using boost::multiprecision::cpp_rational;
  const auto k = order.size();
  std::vector<std::vector<cpp_rational>> m(k, std::vector<cpp_rational>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m[i][j] = cpp_rational(a(static_cast<Eigen::Index>(i), order[j]));
  for (std::size_t p = 0; p < k; ++p) {
    if (m[p][p] == 0) return false;
    for (std::size_t i = p + 1; i < k; ++i) {
      const cpp_rational f = m[i][p] / m[p][p];
      for (std::size_t j = p; j < k; ++j) m[i][j] -= f * m[p][j];
    }
  }
  return true;
}

void admissible(Outcome& o) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<long long> coef(-3, 3);
  int mismatch = 0, empty = 0, tested = 0;
  for (int t = 0; t < 2000; ++t) {
    const int k = 1 + t % 4;
    IntMatrix a(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) a(i, j) = coef(rng);
    if (integer_rank(a) < k) continue;
    ++tested;
    const auto got = admissible_orders(a);
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::size_t expected = 0;
    do {
      if (eliminates_in_order(a, order)) {
        ++expected;
        bool found = false;
        for (const auto& p : got) found = found || p.to_user == order;
        if (!found) ++mismatch;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    if (expected != got.size()) ++mismatch;
    if (got.empty()) ++empty;
  }
  o.detail << mismatch << " mismatches over " << tested << " full-rank matrices, " << empty << " with no order";
  o.require(mismatch == 0, "admissible set differs");
  o.require(empty == 0, "empty admissible set for full rank");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "point-to-point anchor", 1.0, point_to_point},
      {2, "enumeration equals brute force", 60.0, oracle_equivalence},
      {3, "secure DoF slope", 30.0, dof},
      {4, "sum computation rate lower bound", 10.0, scaling_bound},
      {5, "angle sweep at 25 dB", 60.0, theta_sweep},
      {6, "SNR sweep, three users", 300.0, snr_sweep},
      {7, "quantizer entropy bound", 120.0, lemma_one},
      {8, "codec invariants", 60.0, codec},
      {9, "admissible orders", 10.0, admissible},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.limit_s, "runtime over limit");
    if (!o.pass) ++failed;
    std::printf("%s [%d] %s (%.2f s / %.0f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, c.limit_s,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
