#include "cfsec/effective_matrix.hpp"

namespace cfsec {

EffectiveMatrix build_effective_matrix(const ChannelInstance& inst, const PowerPolicy& policy) {
  const Eigen::Index k = inst.users();
  if (policy.alphas.size() != k) throw std::invalid_argument("effective matrix: policy length mismatch");

  const double p = inst.power;
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k) / p + inst.h * inst.h.transpose();
  const Eigen::MatrixXd s = inv_sqrt_spd(m);

  EffectiveMatrix out;
  out.snr = policy.snr(p);
  out.f = s * policy.alphas.cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd gram = out.f.transpose() * out.f;
  out.gram = (gram + gram.transpose()) / 2.0;
  return out;
}

double gram_determinant_closed_form(const ChannelInstance& inst, const PowerPolicy& policy) {
  // det((1/P) I + h h^T) = P^{-K} (1 + P ||h||^2) by the matrix determinant lemma.
  const double p = inst.power;
  const auto k = static_cast<double>(inst.users());
  return policy.alphas.prod() * std::pow(p, k) / (1.0 + p * inst.h.squaredNorm());
}

}  // namespace cfsec
