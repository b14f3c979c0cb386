#include "cfsec/channel.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <vector>

namespace cfsec {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.array().isFinite().all(); }

Eigen::VectorXd vector_from_json(const nlohmann::json& arr, const char* name) {
  if (!arr.is_array()) throw std::invalid_argument(std::string("instance: '") + name + "' must be an array");
  auto values = arr.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

ChannelInstance make_instance(Eigen::VectorXd h, Eigen::VectorXd g, double power, GainCheck check) {
  if (h.size() == 0) throw std::invalid_argument("instance: need at least one user");
  if (h.size() != g.size()) throw std::invalid_argument("instance: h and g differ in length");
  if (!all_finite(h) || !all_finite(g)) throw std::invalid_argument("instance: non-finite gain");
  if (!std::isfinite(power) || power <= 0.0) throw std::invalid_argument("instance: power must be finite and > 0");
  if (check == GainCheck::secrecy && (g.array() == 0.0).any())
    throw std::invalid_argument("instance: zero eavesdropper gain, 1/g scaling undefined");
  return ChannelInstance{std::move(h), std::move(g), power};
}

PowerPolicy secrecy_power_policy(const ChannelInstance& inst) {
  if ((inst.g.array() == 0.0).any()) throw std::invalid_argument("secrecy policy: zero eavesdropper gain");
  return PowerPolicy{inst.g.array().square().matrix()};
}

PowerPolicy unit_power_policy(const ChannelInstance& inst) {
  return PowerPolicy{Eigen::VectorXd::Ones(inst.users())};
}

PowerPolicy make_policy(const ChannelInstance& inst, Eigen::VectorXd alphas) {
  if (alphas.size() != inst.users()) throw std::invalid_argument("policy: alpha length mismatch");
  if (!all_finite(alphas) || (alphas.array() <= 0.0).any())
    throw std::invalid_argument("policy: alphas must be finite and > 0");
  return PowerPolicy{std::move(alphas)};
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

std::pair<Eigen::VectorXd, Eigen::VectorXd> gaussian_gains(Eigen::Index users, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd h(users), g(users);
  for (Eigen::Index i = 0; i < users; ++i) h[i] = normal(rng);
  for (Eigen::Index i = 0; i < users; ++i) g[i] = normal(rng);
  return {h, g};
}

ChannelInstance instance_from_json(const nlohmann::json& doc, GainCheck check) {
  if (!doc.contains("snr_db")) throw std::invalid_argument("instance: missing 'snr_db'");
  const double power = db_to_linear(doc.at("snr_db").get<double>());
  if (doc.contains("h") || doc.contains("g")) {
    if (!doc.contains("h") || !doc.contains("g")) throw std::invalid_argument("instance: need both 'h' and 'g'");
    return make_instance(vector_from_json(doc.at("h"), "h"), vector_from_json(doc.at("g"), "g"), power, check);
  }
  if (!doc.contains("K") || !doc.contains("gain_seed"))
    throw std::invalid_argument("instance: need either h/g or K/gain_seed");
  const auto users = doc.at("K").get<long>();
  if (users < 1) throw std::invalid_argument("instance: K must be >= 1");
  auto [h, g] = gaussian_gains(users, doc.at("gain_seed").get<std::uint64_t>());
  return make_instance(std::move(h), std::move(g), power, check);
}

ChannelInstance load_instance(const std::string& path, GainCheck check) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  return instance_from_json(nlohmann::json::parse(in), check);
}

nlohmann::json to_json(const ChannelInstance& inst) {
  return {{"h", std::vector<double>(inst.h.begin(), inst.h.end())},
          {"g", std::vector<double>(inst.g.begin(), inst.g.end())},
          {"snr_db", linear_to_db(inst.power)}};
}

}  // namespace cfsec
