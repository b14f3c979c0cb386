#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace cfsec {

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

/// Pearson goodness-of-fit p-value against equal expected counts.
double chi_square_uniform_p(std::span<const std::uint64_t> counts);

/// Pearson independence p-value for a rows x cols contingency table (row-major).
/// Empty rows and columns are dropped before counting degrees of freedom.
double chi_square_independence_p(std::span<const std::uint64_t> table, std::size_t rows, std::size_t cols);

/// Independent stream for (seed, stream...) tuples.
std::mt19937_64 derived_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

}  // namespace cfsec
