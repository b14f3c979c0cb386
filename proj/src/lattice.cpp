#include "cfsec/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace cfsec {

namespace {

using BigInt = boost::multiprecision::cpp_int;

void require_spd(const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) throw std::invalid_argument("lattice: Gram matrix must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("lattice: Gram matrix is not positive definite");
}

struct Gso {
  Eigen::MatrixXd mu;
  Eigen::VectorXd bstar;  // squared norms of the Gram-Schmidt vectors
};

Gso gram_schmidt(const Eigen::MatrixXd& gb) {
  const Eigen::Index k = gb.rows();
  Gso out{Eigen::MatrixXd::Zero(k, k), Eigen::VectorXd::Zero(k)};
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      double s = gb(i, j);
      for (Eigen::Index l = 0; l < j; ++l) s -= out.mu(j, l) * out.mu(i, l) * out.bstar[l];
      out.mu(i, j) = s / out.bstar[j];
    }
    double s = gb(i, i);
    for (Eigen::Index l = 0; l < i; ++l) s -= out.mu(i, l) * out.mu(i, l) * out.bstar[l];
    out.bstar[i] = s;
    out.mu(i, i) = 1.0;
  }
  return out;
}

Eigen::MatrixXd basis_gram(const IntMatrix& basis, const Eigen::MatrixXd& gram) {
  const Eigen::MatrixXd b = basis.cast<double>();
  Eigen::MatrixXd gb = b * gram * b.transpose();
  return (gb + gb.transpose()) / 2.0;
}

// Descending lexicographic order on coefficient vectors.
bool lex_greater(const IntVector& x, const IntVector& y) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) return x[i] > y[i];
  return false;
}

class Enumerator {
 public:
  Enumerator(const Eigen::MatrixXd& gram, const IntMatrix& basis, const SearchOptions& opts)
      : gram_(gram), basis_(basis), opts_(opts), k_(gram.rows()) {
    Eigen::LLT<Eigen::MatrixXd> llt(basis_gram(basis, gram));
    if (llt.info() != Eigen::Success) throw std::invalid_argument("lattice: reduced Gram lost definiteness");
    r_ = llt.matrixU();
    for (Eigen::Index i = 0; i < k_; ++i) radius_ = std::max(radius_, gram_norm(gram_, IntVector(basis_.row(i).transpose())));
    x_ = IntVector::Zero(k_);
    partial_ = Eigen::VectorXd::Zero(k_ + 1);
  }

  void run() { descend(k_ - 1); }

  [[nodiscard]] bool exhausted() const { return exhausted_; }
  [[nodiscard]] std::size_t nodes() const { return nodes_; }
  [[nodiscard]] std::vector<detail::Candidate> pool() const { return pool_; }

 private:
  // Pruning keeps a small slack above the exact radius so rounding in the
  // Cholesky partial sums never drops a tie.
  [[nodiscard]] double prune_radius() const { return radius_ * (1.0 + 1e-9) + 1e-300; }

  void descend(Eigen::Index level) {
    if (exhausted_) return;
    double center = 0.0;
    for (Eigen::Index j = level + 1; j < k_; ++j) center -= r_(level, j) * static_cast<double>(x_[j]);
    center /= r_(level, level);
    const double rii2 = r_(level, level) * r_(level, level);

    const double budget = prune_radius() - partial_[level + 1];
    if (budget < 0.0) return;
    const double width = std::sqrt(budget / rii2);
    const auto lo = static_cast<long long>(std::ceil(center - width));
    const auto hi = static_cast<long long>(std::floor(center + width));
    for (long long v = lo; v <= hi; ++v) {
      if (++nodes_ > opts_.node_budget) {
        exhausted_ = true;
        return;
      }
      const double d = static_cast<double>(v) - center;
      const double dist = partial_[level + 1] + rii2 * d * d;
      if (dist > prune_radius()) continue;
      x_[level] = v;
      partial_[level] = dist;
      if (level == 0)
        visit();
      else
        descend(level - 1);
      if (exhausted_) return;
    }
    x_[level] = 0;
  }

  void visit() {
    if (x_.isZero()) return;
    IntVector a = basis_.transpose() * x_;
    if (!is_canonical(a)) return;
    const double norm = gram_norm(gram_, a);
    if (norm > radius_ * (1.0 + 1e-9)) return;
    pool_.push_back({a, norm});

    // Greedy minimum bases are closed under insertion (matroid exchange), so
    // the running best set plus the newcomer is enough to update it.
    best_.push_back({std::move(a), norm});
    const auto best = detail::select_independent(best_, k_);
    best_.clear();
    for (Eigen::Index i = 0; i < best.rows.rows(); ++i) best_.push_back({best.rows.row(i).transpose(), best.norms[i]});
    if (best.rows.rows() == k_ && best.norms[k_ - 1] < radius_) {
      radius_ = best.norms[k_ - 1];
      const double keep = radius_ * (1.0 + 1e-9);
      std::erase_if(pool_, [keep](const detail::Candidate& c) { return c.norm > keep; });
    }
  }

  const Eigen::MatrixXd& gram_;
  const IntMatrix& basis_;
  const SearchOptions& opts_;
  Eigen::Index k_;
  Eigen::MatrixXd r_;
  double radius_ = 0.0;
  IntVector x_;
  Eigen::VectorXd partial_;
  std::vector<detail::Candidate> pool_;
  std::vector<detail::Candidate> best_;
  std::size_t nodes_ = 0;
  bool exhausted_ = false;
};

std::vector<detail::Candidate> box_candidates(const Eigen::MatrixXd& gram, int radius) {
  const Eigen::Index k = gram.rows();
  std::vector<detail::Candidate> out;
  IntVector a = IntVector::Constant(k, -radius);
  while (true) {
    if (!a.isZero() && is_canonical(a)) out.push_back({a, gram_norm(gram, a)});
    Eigen::Index i = k - 1;
    while (i >= 0 && a[i] == radius) a[i--] = -radius;
    if (i < 0) break;
    ++a[i];
  }
  return out;
}

}  // namespace

IntVector canonical_sign(IntVector a) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != 0) {
      if (a[i] < 0) a = -a;
      break;
    }
  }
  return a;
}

bool is_canonical(const IntVector& a) {
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] != 0) return a[i] > 0;
  return true;
}

Eigen::Index integer_rank(const IntMatrix& m) {
  // Bareiss fraction-free elimination with row pivoting.
  const Eigen::Index rows = m.rows(), cols = m.cols();
  std::vector<std::vector<BigInt>> a(rows, std::vector<BigInt>(cols));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a[i][j] = m(i, j);

  BigInt prev = 1;
  Eigen::Index rank = 0;
  for (Eigen::Index col = 0; col < cols && rank < rows; ++col) {
    Eigen::Index piv = rank;
    while (piv < rows && a[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[rank]);
    for (Eigen::Index i = rank + 1; i < rows; ++i) {
      for (Eigen::Index j = col + 1; j < cols; ++j) a[i][j] = (a[i][j] * a[rank][col] - a[i][col] * a[rank][j]) / prev;
      a[i][col] = 0;
    }
    prev = a[rank][col];
    ++rank;
  }
  return rank;
}

IntMatrix lll_reduce(const Eigen::MatrixXd& gram, double delta) {
  if (!(delta > 0.25 && delta < 1.0)) throw std::invalid_argument("lll: delta must lie in (1/4, 1)");
  require_spd(gram);
  const Eigen::Index k = gram.rows();
  IntMatrix basis = IntMatrix::Identity(k, k);
  if (k == 1) return basis;

  Gso gso = gram_schmidt(basis_gram(basis, gram));
  Eigen::Index cur = 1;
  for (long iter = 0; cur < k && iter < 1'000'000; ++iter) {
    for (Eigen::Index j = cur - 1; j >= 0; --j) {
      const long long q = std::llround(gso.mu(cur, j));
      if (q == 0) continue;
      basis.row(cur) -= q * basis.row(j);
      for (Eigen::Index l = 0; l <= j; ++l) gso.mu(cur, l) -= static_cast<double>(q) * gso.mu(j, l);
    }
    gso = gram_schmidt(basis_gram(basis, gram));
    const double m = gso.mu(cur, cur - 1);
    if (gso.bstar[cur] >= (delta - m * m) * gso.bstar[cur - 1]) {
      ++cur;
    } else {
      basis.row(cur).swap(basis.row(cur - 1));
      gso = gram_schmidt(basis_gram(basis, gram));
      cur = std::max<Eigen::Index>(cur - 1, 1);
    }
  }
  return basis;
}

namespace detail {

CoefficientMatrix select_independent(std::vector<Candidate> pool, Eigen::Index k) {
  std::sort(pool.begin(), pool.end(), [](const Candidate& x, const Candidate& y) {
    if (x.norm != y.norm) return x.norm < y.norm;
    return lex_greater(x.a, y.a);
  });
  // Reorder runs of numerically tied norms purely by coefficient vector.
  for (std::size_t i = 0; i < pool.size();) {
    std::size_t j = i + 1;
    while (j < pool.size() && pool[j].norm - pool[i].norm <= 1e-12 * std::max(1.0, std::abs(pool[i].norm))) ++j;
    std::sort(pool.begin() + static_cast<std::ptrdiff_t>(i), pool.begin() + static_cast<std::ptrdiff_t>(j),
              [](const Candidate& x, const Candidate& y) { return lex_greater(x.a, y.a); });
    i = j;
  }

  const Eigen::Index dim = pool.empty() ? k : pool.front().a.size();
  IntMatrix chosen(0, dim);
  std::vector<double> norms;
  for (const auto& c : pool) {
    if (chosen.rows() == k) break;
    IntMatrix trial(chosen.rows() + 1, dim);
    trial.topRows(chosen.rows()) = chosen;
    trial.row(chosen.rows()) = c.a.transpose();
    if (integer_rank(trial) == trial.rows()) {
      chosen = std::move(trial);
      norms.push_back(c.norm);
    }
  }
  CoefficientMatrix out;
  out.rows = std::move(chosen);
  out.norms = Eigen::Map<Eigen::VectorXd>(norms.data(), static_cast<Eigen::Index>(norms.size()));
  return out;
}

}  // namespace detail

CoefficientMatrix shortest_independent_vectors(const Eigen::MatrixXd& gram, const SearchOptions& opts) {
  require_spd(gram);
  const Eigen::Index k = gram.rows();
  const IntMatrix basis = lll_reduce(gram, opts.delta);

  Enumerator en(gram, basis, opts);
  en.run();
  auto pool = en.pool();
  if (en.exhausted()) {
    for (Eigen::Index i = 0; i < k; ++i) {
      IntVector b = canonical_sign(basis.row(i).transpose());
      pool.push_back({b, gram_norm(gram, b)});
    }
    const double boxes = std::pow(2.0 * opts.fallback_radius + 1.0, static_cast<double>(k));
    if (k <= 4 && boxes <= static_cast<double>(opts.node_budget)) {
      auto extra = box_candidates(gram, opts.fallback_radius);
      pool.insert(pool.end(), extra.begin(), extra.end());
    }
    // Duplicates are harmless for the greedy pass but waste rank checks.
    std::sort(pool.begin(), pool.end(), [](const auto& x, const auto& y) { return lex_greater(x.a, y.a); });
    pool.erase(std::unique(pool.begin(), pool.end(), [](const auto& x, const auto& y) { return x.a == y.a; }),
               pool.end());
  }

  auto out = detail::select_independent(std::move(pool), k);
  if (out.rows.rows() != k) throw std::runtime_error("lattice: enumeration did not span the lattice");
  out.degraded = en.exhausted();
  out.nodes_visited = en.nodes();
  return out;
}

CoefficientMatrix brute_force_minima(const Eigen::MatrixXd& gram, int radius) {
  require_spd(gram);
  const Eigen::Index k = gram.rows();
  if (k > 4 || radius < 1 || radius > 32) throw std::invalid_argument("brute force: need K <= 4 and 1 <= radius <= 32");
  auto out = detail::select_independent(box_candidates(gram, radius), k);
  if (out.rows.rows() != k) throw std::runtime_error("brute force: box does not span the lattice");
  return out;
}

}  // namespace cfsec
