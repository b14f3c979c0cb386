#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "cfsec/channel.hpp"

namespace cfsec {

using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;
using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Inverse square root of a symmetric positive-definite matrix, by symmetric
/// eigendecomposition. Rejects inputs that are asymmetric beyond `sym_tol`
/// (relative to the largest entry) or whose smallest eigenvalue falls below
/// `floor` times the largest.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
inv_sqrt_spd(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar sym_tol = 1e-10,
             typename Derived::Scalar floor = 1e-12) {
  using Scalar = typename Derived::Scalar;
  using Result = Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  if (m.rows() != m.cols() || m.rows() == 0) throw std::invalid_argument("inv_sqrt_spd: matrix must be square");
  const Scalar scale = std::max<Scalar>(m.cwiseAbs().maxCoeff(), Scalar(1));
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
    throw std::invalid_argument("inv_sqrt_spd: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Result> es(m.derived());
  if (es.info() != Eigen::Success) throw std::runtime_error("inv_sqrt_spd: eigendecomposition failed");
  const auto& lambda = es.eigenvalues();
  const Scalar top = lambda.maxCoeff();
  if (!(top > Scalar(0)) || lambda.minCoeff() <= floor * top)
    throw std::domain_error("inv_sqrt_spd: matrix is singular or indefinite");

  const auto& v = es.eigenvectors();
  Result s = v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  return (s + s.transpose()) / Scalar(2);
}

/// Quadratic form a^T G a for an integer coefficient vector.
template <typename GramDerived, typename VecDerived>
typename GramDerived::Scalar gram_norm(const Eigen::MatrixBase<GramDerived>& gram,
                                       const Eigen::MatrixBase<VecDerived>& a) {
  using Scalar = typename GramDerived::Scalar;
  const auto v = a.template cast<Scalar>().eval();
  return v.dot(gram * v);
}

/// F = ((1/P) I + h h^T)^{-1/2} diag(sqrt(SNR_l / P)) and its Gram matrix G = F^T F.
///
/// ||F a||^2 = a^T G a is the effective noise variance of the integer
/// combination a at the legitimate receiver.
struct EffectiveMatrix {
  Eigen::MatrixXd f;
  Eigen::MatrixXd gram;
  Eigen::VectorXd snr;

  [[nodiscard]] Eigen::Index users() const { return gram.rows(); }
};

EffectiveMatrix build_effective_matrix(const ChannelInstance& inst, const PowerPolicy& policy);

/// det(G) = prod(SNR_l / P) / det((1/P) I + h h^T), evaluated in closed form.
double gram_determinant_closed_form(const ChannelInstance& inst, const PowerPolicy& policy);

}  // namespace cfsec
