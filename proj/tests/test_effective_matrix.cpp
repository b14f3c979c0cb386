#include <cmath>
#include <random>

#include <doctest.h>

#include "cfsec/effective_matrix.hpp"

using namespace cfsec;

namespace {

Eigen::MatrixXd random_spd(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = n(rng);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(k, k);
}

// G = D ((1/P) I + h h^T)^{-1} D with the inverse by Sherman-Morrison.
Eigen::MatrixXd gram_oracle(const ChannelInstance& inst, const PowerPolicy& pol) {
  const double p = inst.power;
  const auto k = inst.users();
  const Eigen::MatrixXd inv =
      p * (Eigen::MatrixXd::Identity(k, k) - p * inst.h * inst.h.transpose() / (1.0 + p * inst.h.squaredNorm()));
  const Eigen::VectorXd d = pol.alphas.cwiseSqrt();
  return d.asDiagonal() * inv * d.asDiagonal();
}

}  // namespace

TEST_CASE("inv_sqrt_spd closed forms") {
  CHECK(inv_sqrt_spd(Eigen::Matrix3d::Identity()).isApprox(Eigen::Matrix3d::Identity(), 1e-14));
  const Eigen::Matrix2d s = inv_sqrt_spd(Eigen::Vector2d(4, 9).asDiagonal().toDenseMatrix());
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(s(0, 1)) < 1e-15);
}

TEST_CASE("inv_sqrt_spd residual S M S = I") {
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity() + Eigen::Vector2d(1, 1) * Eigen::RowVector2d(1, 1);
  Eigen::Matrix2d s = inv_sqrt_spd(m);
  CHECK((s * m * s - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(5);
  for (int k = 1; k <= 5; ++k) {
    const Eigen::MatrixXd a = random_spd(k, rng);
    const Eigen::MatrixXd r = inv_sqrt_spd(a);
    CHECK((r * a * r - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("inv_sqrt_spd rejects bad input") {
  Eigen::Matrix2d asym;
  asym << 2, 1, 0, 2;
  CHECK_THROWS_AS(inv_sqrt_spd(asym), std::invalid_argument);
  Eigen::Matrix2d singular;
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(inv_sqrt_spd(singular), std::domain_error);
  CHECK_THROWS_AS(inv_sqrt_spd(Eigen::MatrixXd(2, 3)), std::invalid_argument);
}

TEST_CASE("single-user effective matrix") {
  auto inst = make_instance(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 7.0, GainCheck::plain);
  auto f = build_effective_matrix(inst, unit_power_policy(inst));
  CHECK(f.f(0, 0) == doctest::Approx(std::sqrt(7.0)).epsilon(1e-14));

  inst = make_instance(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), 15.0);
  f = build_effective_matrix(inst, unit_power_policy(inst));
  CHECK(f.f(0, 0) == doctest::Approx(std::sqrt(15.0 / 16.0)).epsilon(1e-14));
}

TEST_CASE("gram matches the quadratic form of F") {
  const auto inst = make_instance(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), 1.0);
  const auto f = build_effective_matrix(inst, unit_power_policy(inst));
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long long> coef(-20, 20);
  for (int t = 0; t < 100; ++t) {
    IntVector a(2);
    a << coef(rng), coef(rng);
    const double direct = (f.f * a.cast<double>()).squaredNorm();
    CHECK(gram_norm(f.gram, a) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("gram agrees with the Sherman-Morrison oracle and determinant closed form") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int k = 1 + static_cast<int>(seed % 4);
    auto [h, g] = gaussian_gains(k, seed);
    const auto inst = make_instance(h, g, std::pow(10.0, static_cast<double>(seed % 7)));
    const auto pol = secrecy_power_policy(inst);
    const auto f = build_effective_matrix(inst, pol);
    const Eigen::MatrixXd oracle = gram_oracle(inst, pol);
    CHECK((f.gram - oracle).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, oracle.cwiseAbs().maxCoeff()));
    CHECK(f.gram.determinant() == doctest::Approx(gram_determinant_closed_form(inst, pol)).epsilon(1e-7));
    CHECK(f.snr.isApprox(pol.snr(inst.power)));
  }
}
