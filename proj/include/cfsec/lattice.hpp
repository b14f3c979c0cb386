#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cfsec/effective_matrix.hpp"

namespace cfsec {

/// K linearly independent integer equation coefficients a_1..a_K (rows),
/// sorted by effective norm a_k^T G a_k.
struct CoefficientMatrix {
  IntMatrix rows;
  Eigen::VectorXd norms;
  bool degraded = false;           // enumeration budget ran out; rows are best-found
  std::size_t nodes_visited = 0;

  [[nodiscard]] Eigen::Index size() const { return rows.rows(); }
};

struct SearchOptions {
  double delta = 0.99;                     // Lovasz parameter
  std::size_t node_budget = 10'000'000;    // enumeration tree nodes
  int fallback_radius = 8;                 // coordinate box for the brute-force fallback
};

/// Flips the sign so that the first nonzero entry is positive.
IntVector canonical_sign(IntVector a);
bool is_canonical(const IntVector& a);

/// Exact rank of an integer matrix (fraction-free elimination, arbitrary precision).
Eigen::Index integer_rank(const IntMatrix& m);

/// LLL reduction of the integer lattice under the inner product <x, y> = x^T G y.
/// Returns the reduced basis as rows of a unimodular matrix.
IntMatrix lll_reduce(const Eigen::MatrixXd& gram, double delta = 0.99);

/// Successive minima of the lattice Z^K with Gram matrix G: LLL, then
/// Fincke-Pohst enumeration inside the ellipsoid bounded by the current K-th
/// best independent norm.
CoefficientMatrix shortest_independent_vectors(const Eigen::MatrixXd& gram, const SearchOptions& opts = {});

/// Exhaustive successive minima over the box |a_i| <= radius. Test oracle; K <= 4, radius <= 32.
CoefficientMatrix brute_force_minima(const Eigen::MatrixXd& gram, int radius);

namespace detail {

struct Candidate {
  IntVector a;
  double norm;
};

/// Orders by norm, breaking near-ties (relative 1e-12) by descending
/// lexicographic order of the coefficient vector, then greedily keeps
/// linearly independent vectors until K are found.
CoefficientMatrix select_independent(std::vector<Candidate> pool, Eigen::Index k);

}  // namespace detail

}  // namespace cfsec
