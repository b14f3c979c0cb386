#include <cmath>
#include <numbers>

#include <doctest.h>

#include "cfsec/channel.hpp"

using namespace cfsec;

TEST_CASE("make_instance accepts the two-user angle family") {
  for (double theta : {0.1, 1.0, 2.5, 4.0}) {
    Eigen::Vector2d h(1.0, std::numbers::sqrt2);
    Eigen::Vector2d g = std::numbers::sqrt3 * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    const auto inst = make_instance(h, g, std::pow(10.0, 2.5));
    CHECK(inst.users() == 2);
    CHECK(linear_to_db(inst.power) == doctest::Approx(25.0).epsilon(1e-12));
    const auto snr = secrecy_power_policy(inst).snr(inst.power);
    CHECK(snr.sum() == doctest::Approx(3.0 * inst.power).epsilon(1e-12));
  }
}

TEST_CASE("make_instance validates its inputs") {
  CHECK_NOTHROW(make_instance(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), 1.0));
  CHECK_THROWS_AS(make_instance(Eigen::Vector2d(1, 2), Eigen::Vector2d(0, 1), 1.0), std::invalid_argument);
  CHECK_NOTHROW(make_instance(Eigen::Vector2d(1, 2), Eigen::Vector2d(0, 1), 1.0, GainCheck::plain));
  CHECK_THROWS_AS(make_instance(Eigen::Vector2d(1, 2), Eigen::Vector3d(1, 1, 1), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_instance(Eigen::VectorXd(), Eigen::VectorXd(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_instance(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_instance(Eigen::Vector2d(1, NAN), Eigen::Vector2d(1, 1), 1.0), std::invalid_argument);
}

TEST_CASE("secrecy power policy") {
  auto snr = secrecy_power_policy(make_instance(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), 4.0)).snr(4.0);
  CHECK(snr[0] == 4.0);
  CHECK(snr[1] == 4.0);
  snr = secrecy_power_policy(make_instance(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Constant(1, 2.0), 1.0)).snr(1.0);
  CHECK(snr[0] == 4.0);
  const auto inst = make_instance(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), 1.0);
  CHECK_THROWS(make_policy(inst, Eigen::Vector2d(1, 0)));
  CHECK_THROWS(make_policy(inst, Eigen::Vector3d(1, 1, 1)));
  CHECK(unit_power_policy(inst).alphas == Eigen::Vector2d(1, 1));
}

TEST_CASE("gain draws are reproducible") {
  const auto a = gaussian_gains(3, 42);
  const auto b = gaussian_gains(3, 42);
  const auto c = gaussian_gains(3, 43);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first != c.first);
}

TEST_CASE("json instances") {
  const auto inst = instance_from_json(nlohmann::json{{"h", {1.0, 2.0}}, {"g", {0.5, 1.0}}, {"snr_db", 20.0}});
  CHECK(inst.power == doctest::Approx(100.0));
  const auto back = instance_from_json(to_json(inst));
  CHECK(back.h == inst.h);
  CHECK(back.g == inst.g);
  CHECK(back.power == doctest::Approx(inst.power).epsilon(1e-14));

  const auto drawn = instance_from_json(nlohmann::json{{"K", 3}, {"gain_seed", 7}, {"snr_db", 10.0}});
  CHECK(drawn.h == gaussian_gains(3, 7).first);
  CHECK_THROWS(instance_from_json(nlohmann::json{{"h", {1.0}}}));
}
