#include "cfsec/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cfsec {

Permutation Permutation::from_users(std::vector<int> user_order) {
  Permutation p;
  p.to_equation.assign(user_order.size(), -1);
  for (std::size_t k = 0; k < user_order.size(); ++k) {
    const int u = user_order[k];
    if (u < 0 || u >= static_cast<int>(user_order.size()) || p.to_equation[u] != -1)
      throw std::invalid_argument("permutation: not a bijection");
    p.to_equation[u] = static_cast<int>(k);
  }
  p.to_user = std::move(user_order);
  return p;
}

Permutation Permutation::identity(int k) {
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  return from_users(std::move(order));
}

double rate_comb(const EffectiveMatrix& f, const IntVector& a, double snr) {
  if (a.isZero()) throw std::invalid_argument("rate_comb: zero coefficient vector");
  if (!(snr > 0.0)) throw std::invalid_argument("rate_comb: snr must be > 0");
  const double norm = gram_norm(f.gram, a);
  if (!(norm > 0.0)) return 0.0;
  return std::max(0.5 * std::log2(snr / norm), 0.0);
}

Eigen::VectorXd computation_rates(const EffectiveMatrix& f, const CoefficientMatrix& a, const Permutation& pi) {
  const Eigen::Index k = a.size();
  Eigen::VectorXd r(k);
  for (Eigen::Index eq = 0; eq < k; ++eq) {
    const int user = pi.to_user[static_cast<std::size_t>(eq)];
    r[eq] = rate_comb(f, a.rows.row(eq).transpose(), f.snr[user]);
  }
  return r;
}

std::vector<Permutation> admissible_orders(const IntMatrix& a) {
  const auto k = static_cast<int>(a.rows());
  if (a.cols() != k || integer_rank(a) != k) throw std::invalid_argument("admissible_orders: A must be square and full rank");

  std::vector<Permutation> out;
  std::vector<int> order;
  std::vector<bool> used(k, false);
  // Depth-first over user orders; a prefix survives only if its leading minor is nonzero.
  auto extend = [&](auto&& self) -> void {
    const auto depth = static_cast<int>(order.size());
    if (depth == k) {
      out.push_back(Permutation::from_users(order));
      return;
    }
    for (int u = 0; u < k; ++u) {
      if (used[u]) continue;
      order.push_back(u);
      IntMatrix minor(depth + 1, depth + 1);
      for (int i = 0; i <= depth; ++i)
        for (int j = 0; j <= depth; ++j) minor(i, j) = a(i, order[j]);
      if (integer_rank(minor) == depth + 1) {
        used[u] = true;
        self(self);
        used[u] = false;
      }
      order.pop_back();
    }
  };
  extend(extend);
  return out;
}

Eigen::VectorXd allocate_user_rates(double budget, const Eigen::VectorXd& caps) {
  if (budget < 0.0) throw std::invalid_argument("allocate: negative budget");
  if ((caps.array() < 0.0).any()) throw std::invalid_argument("allocate: negative cap");
  if (budget > caps.sum() * (1.0 + 1e-12) + 1e-12) throw std::invalid_argument("allocate: budget exceeds total caps");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(caps.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return caps[x] > caps[y]; });

  Eigen::VectorXd out = Eigen::VectorXd::Zero(caps.size());
  double remaining = budget;
  for (const auto u : order) {
    out[u] = std::min(caps[u], remaining);
    remaining -= out[u];
  }
  // Rounding residue goes to the user with the most headroom.
  if (remaining > 0.0 && caps.size() > 0) out[order.front()] += remaining;
  return out;
}

RateReport secure_sum_rate(const ChannelInstance& inst, const PowerPolicy& policy, const EffectiveMatrix& f,
                           const CoefficientMatrix& a) {
  const Eigen::Index k = inst.users();
  if (a.size() != k || f.users() != k) throw std::invalid_argument("secure_sum_rate: dimension mismatch");
  if (((policy.alphas - inst.g.array().square().matrix()).array().abs() >
       1e-12 * inst.g.array().square().maxCoeff()).any())
    throw std::invalid_argument("secure_sum_rate: requires the secrecy power policy alpha = g^2");

  RateReport rep;
  rep.coefficients = a;
  rep.admissible = admissible_orders(a.rows);
  const double g_total = inst.g.squaredNorm();

  double best = -1.0;
  for (const auto& pi : rep.admissible) {
    const Eigen::VectorXd r = computation_rates(f, a, pi);
    const double first_gain = inst.g[pi.to_user[0]];
    const double candidate = std::max(r.tail(k - 1).sum() - 0.5 * std::log2(g_total / (first_gain * first_gain)), 0.0);
    if (candidate > best) {
      best = candidate;
      rep.best_pi = pi;
      rep.r_comb = r;
    }
  }
  rep.r_sum_secure = best;

  Eigen::VectorXd caps(k);
  for (Eigen::Index u = 0; u < k; ++u) caps[u] = rep.r_comb[rep.best_pi.to_equation[static_cast<std::size_t>(u)]];
  rep.allocation = allocate_user_rates(rep.r_sum_secure, caps);
  rep.r_baseline = baseline_random_coding(inst);
  rep.r_nonsecure_sum = rep.r_comb.sum();
  rep.capacity_sum = capacity_sum(inst);
  return rep;
}

double baseline_random_coding(const ChannelInstance& inst) {
  const double p = inst.power;
  const double hn = inst.h.squaredNorm(), gn = inst.g.squaredNorm();
  // Norms equal up to rounding (e.g. 3cos^2 + 3sin^2) count as a degraded channel.
  if (hn <= gn + 16.0 * std::numeric_limits<double>::epsilon() * std::max(hn, gn)) return 0.0;
  return std::max(0.5 * std::log2((1.0 + hn * p) / (1.0 + gn * p)), 0.0);
}

double capacity_sum(const ChannelInstance& inst) { return 0.5 * std::log2(1.0 + inst.h.squaredNorm() * inst.power); }

CombBound sum_comb_lower_bound(const ChannelInstance& inst, const PowerPolicy& policy, const SearchOptions& opts) {
  const auto f = build_effective_matrix(inst, policy);
  const auto a = shortest_independent_vectors(f.gram, opts);
  const auto k = static_cast<double>(inst.users());
  // Without clamping the sum is the same for every order; the first admissible one is used.
  const auto orders = admissible_orders(a.rows);
  return {computation_rates(f, a, orders.front()).sum(), capacity_sum(inst) - 0.5 * k * std::log2(k)};
}

RateReport evaluate(const ChannelInstance& inst, const SearchOptions& opts) {
  const auto policy = secrecy_power_policy(inst);
  const auto f = build_effective_matrix(inst, policy);
  const auto a = shortest_independent_vectors(f.gram, opts);
  return secure_sum_rate(inst, policy, f, a);
}

double fitted_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fitted_slope: need >= 2 paired points");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fitted_slope: degenerate abscissae");
  return sxy / sxx;
}

DofFit dof_slope(const Eigen::VectorXd& h, const Eigen::VectorXd& g, std::span<const double> snr_grid_db,
                 const SearchOptions& opts) {
  if (snr_grid_db.size() < 8) throw std::invalid_argument("dof_slope: need at least 8 grid points");
  const auto [lo, hi] = std::minmax_element(snr_grid_db.begin(), snr_grid_db.end());
  if (*hi - *lo < 40.0) throw std::invalid_argument("dof_slope: grid must span at least 40 dB");

  DofFit fit{};
  fit.snr_db.assign(snr_grid_db.begin(), snr_grid_db.end());
  std::sort(fit.snr_db.begin(), fit.snr_db.end());
  for (double db : fit.snr_db) {
    const auto rep = evaluate(make_instance(h, g, db_to_linear(db)), opts);
    fit.r_sum.push_back(rep.r_sum_secure);
    fit.r_baseline.push_back(rep.r_baseline);
  }

  const std::size_t start = fit.snr_db.size() / 2;
  std::vector<double> x;
  for (std::size_t i = start; i < fit.snr_db.size(); ++i) x.push_back(0.5 * std::log2(1.0 + db_to_linear(fit.snr_db[i])));
  const auto tail = [start](const std::vector<double>& v) { return std::span<const double>(v).subspan(start); };
  fit.secure_slope = fitted_slope(x, tail(fit.r_sum));
  fit.baseline_slope = fitted_slope(x, tail(fit.r_baseline));
  return fit;
}

nlohmann::json to_json(const RateReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < rep.coefficients.rows.rows(); ++i) {
    const IntVector r = rep.coefficients.rows.row(i).transpose();
    rows.push_back(std::vector<long long>(r.begin(), r.end()));
  }
  std::vector<std::vector<int>> orders;
  for (const auto& p : rep.admissible) orders.push_back(p.to_user);
  return {{"r_comb", std::vector<double>(rep.r_comb.begin(), rep.r_comb.end())},
          {"best_pi_user_order", rep.best_pi.to_user},
          {"r_sum_secure", rep.r_sum_secure},
          {"allocation", std::vector<double>(rep.allocation.begin(), rep.allocation.end())},
          {"r_baseline", rep.r_baseline},
          {"r_nonsecure_sum", rep.r_nonsecure_sum},
          {"capacity_sum", rep.capacity_sum},
          {"coefficients", rows},
          {"norms", std::vector<double>(rep.coefficients.norms.begin(), rep.coefficients.norms.end())},
          {"admissible_user_orders", orders},
          {"search_degraded", rep.coefficients.degraded}};
}

}  // namespace cfsec
