#include "cfsec/stats.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace cfsec {

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

double chi_square_uniform_p(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi-square: need at least two cells");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (total == 0.0) throw std::invalid_argument("chi-square: no samples");
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return chi_square_sf(stat, static_cast<double>(counts.size() - 1));
}

double chi_square_independence_p(std::span<const std::uint64_t> table, std::size_t rows, std::size_t cols) {
  if (table.size() != rows * cols) throw std::invalid_argument("chi-square: table shape mismatch");
  std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const auto c = static_cast<double>(table[i * cols + j]);
      row_sum[i] += c;
      col_sum[j] += c;
      total += c;
    }
  if (total == 0.0) throw std::invalid_argument("chi-square: no samples");
  double stat = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      if (row_sum[i] == 0.0 || col_sum[j] == 0.0) continue;
      const double e = row_sum[i] * col_sum[j] / total;
      const double d = static_cast<double>(table[i * cols + j]) - e;
      stat += d * d / e;
    }
  const auto live = [](const std::vector<double>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [](double s) { return s > 0.0; }));
  };
  return chi_square_sf(stat, (live(row_sum) - 1.0) * (live(col_sum) - 1.0));
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  const auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace cfsec
