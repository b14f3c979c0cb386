#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace cfsec {

/// Whether an instance must support the 1/g transmit scaling of the secrecy scheme.
enum class GainCheck { plain, secrecy };

/// Real K-user Gaussian wiretap MAC with unit-variance noise at both receivers.
///
/// `h` are the gains to the legitimate receiver, `g` the gains to the
/// eavesdropper, `power` the per-user power P on a linear scale.
struct ChannelInstance {
  Eigen::VectorXd h;
  Eigen::VectorXd g;
  double power = 1.0;

  [[nodiscard]] Eigen::Index users() const { return h.size(); }
};

/// Per-user power fractions: SNR_l = alpha_l * P.
struct PowerPolicy {
  Eigen::VectorXd alphas;

  [[nodiscard]] Eigen::VectorXd snr(double power) const { return alphas * power; }
};

/// Validates and builds an instance. Throws std::invalid_argument on a length
/// mismatch, an empty or non-finite vector, P <= 0, or (in secrecy mode) a zero
/// eavesdropper gain.
ChannelInstance make_instance(Eigen::VectorXd h, Eigen::VectorXd g, double power,
                              GainCheck check = GainCheck::secrecy);

/// alpha_l = g_l^2, so that the scaled codeword x_l = x~_l / g_l meets the power constraint.
PowerPolicy secrecy_power_policy(const ChannelInstance& inst);

/// alpha_l = 1 for every user.
PowerPolicy unit_power_policy(const ChannelInstance& inst);

/// Validates an arbitrary policy against an instance (length, alpha > 0).
PowerPolicy make_policy(const ChannelInstance& inst, Eigen::VectorXd alphas);

double db_to_linear(double db);
double linear_to_db(double linear);

/// i.i.d. N(0,1) gain vectors (h then g) drawn from a seeded stream.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gaussian_gains(Eigen::Index users, std::uint64_t seed);

/// Parses {"h": [..], "g": [..], "snr_db": x} or {"K": n, "gain_seed": s, "snr_db": x}.
ChannelInstance instance_from_json(const nlohmann::json& doc, GainCheck check = GainCheck::secrecy);
ChannelInstance load_instance(const std::string& path, GainCheck check = GainCheck::secrecy);

nlohmann::json to_json(const ChannelInstance& inst);

}  // namespace cfsec
