#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cfsec/channel.hpp"
#include "cfsec/codec.hpp"
#include "cfsec/experiment.hpp"
#include "cfsec/rates.hpp"
#include "cfsec/stats.hpp"

using namespace cfsec;

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find(',', pos);
    out.push_back(std::stoi(text.substr(pos, next - pos)));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

void finish(const std::filesystem::path& out, const nlohmann::json& config) {
  write_sidecar(out, config);
  std::cout << out.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure compute-and-forward rates, sweeps and lattice codec demos"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  // rates
  auto* rates = app.add_subcommand("rates", "Rates for one channel instance, printed as JSON");
  std::vector<double> h, g;
  double snr_db = 20.0;
  std::string instance;
  SearchOptions search;
  rates->add_option("--h", h, "Legitimate receiver gains")->delimiter(',');
  rates->add_option("--g", g, "Eavesdropper gains")->delimiter(',');
  rates->add_option("--snr-db", snr_db, "Transmit SNR in dB");
  rates->add_option("--instance", instance, "JSON instance file instead of --h/--g/--snr-db");
  rates->add_option("--node-budget", search.node_budget, "Enumeration node budget");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Average rates over random gains across an SNR grid");
  SweepConfig sweep_cfg;
  std::string grid_text = "0:60:2";
  std::string sweep_out = "snr_sweep.csv";
  sweep->add_option("--users", sweep_cfg.users, "Number of users K");
  sweep->add_option("--snr-db", grid_text, "start:stop:step in dB");
  sweep->add_option("--trials", sweep_cfg.trials, "Gain draws");
  sweep->add_option("--seed", sweep_cfg.seed, "Master seed");
  sweep->add_option("--h", sweep_cfg.h, "Fixed legitimate gains")->delimiter(',');
  sweep->add_option("--g", sweep_cfg.g, "Fixed eavesdropper gains")->delimiter(',');
  sweep->add_option("--out", sweep_out, "Output CSV");

  // theta-sweep
  auto* theta = app.add_subcommand("theta-sweep", "Rates against the eavesdropper gain angle for two users");
  SweepConfig theta_cfg;
  theta_cfg.mode = "theta-sweep";
  double theta_snr = 25.0;
  std::string theta_out = "theta_sweep.csv";
  theta->add_option("--snr-db", theta_snr, "Transmit SNR in dB");
  theta->add_option("--points", theta_cfg.points, "Grid points over [0, 2 pi)");
  theta->add_option("--out", theta_out, "Output CSV");

  // lemma1
  auto* lemma = app.add_subcommand("lemma1", "Entropy of the quantized sum of cube-lattice dithers");
  std::string dims_text = "1,2,4,8,16";
  int lemma_users = 2;
  std::vector<double> lemma_gains;
  double epsilon = 0.1;
  std::size_t lemma_trials = 100'000;
  std::uint64_t lemma_seed = 1;
  std::string lemma_out = "lemma1.csv";
  lemma->add_option("--n", dims_text, "Comma separated dimensions");
  lemma->add_option("--users", lemma_users, "Number of users with unit gains");
  lemma->add_option("--gains", lemma_gains, "Explicit gains, overrides --users")->delimiter(',');
  lemma->add_option("--epsilon", epsilon, "Slack epsilon");
  lemma->add_option("--trials", lemma_trials, "Monte Carlo samples");
  lemma->add_option("--seed", lemma_seed, "Seed");
  lemma->add_option("--out", lemma_out, "Output CSV");

  // codec-demo
  auto* codec = app.add_subcommand("codec-demo", "Encode one message per user with scalar nested lattices");
  std::vector<double> codec_h{2.0, 3.0}, codec_g{1.0, 2.0};
  double codec_snr = 20.0;
  int codec_n = 1, codec_blocks = 8, grid_ratio = 4;
  std::size_t codec_trials = 4000;
  std::uint64_t codec_seed = 1;
  codec->add_option("--h", codec_h, "Legitimate receiver gains")->delimiter(',');
  codec->add_option("--g", codec_g, "Eavesdropper gains")->delimiter(',');
  codec->add_option("--snr-db", codec_snr, "Transmit SNR in dB");
  codec->add_option("--n", codec_n, "Lattice dimension per block");
  codec->add_option("--blocks", codec_blocks, "Blocks per codeword");
  codec->add_option("--grid-ratio", grid_ratio, "Smallest coarse-to-fine index before scaling");
  codec->add_option("--trials", codec_trials, "Monte Carlo samples for the checks");
  codec->add_option("--seed", codec_seed, "Seed");

  // plot
  auto* plot = app.add_subcommand("plot", "Render a sweep CSV as SVG");
  std::string plot_in, plot_out;
  PlotSpec spec;
  plot->add_option("csv", plot_in, "Input CSV")->required();
  plot->add_option("--out", plot_out, "Output SVG (default: input with .svg)");
  plot->add_option("--title", spec.title, "Plot title");
  plot->add_option("--columns", spec.columns, "Columns to draw")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rates) {
      const auto inst = instance.empty() ? make_instance(to_vector(h), to_vector(g), db_to_linear(snr_db))
                                         : load_instance(instance);
      std::cout << to_json(evaluate(inst, search)).dump(2) << '\n';
    } else if (*sweep) {
      sweep_cfg.grid = SnrGrid::parse(grid_text);
      const auto out = resolve_output(sweep_out);
      write_sweep_csv(run_snr_sweep(sweep_cfg), "cfsec/snr-sweep/1", "snr_db", out);
      finish(out, sweep_cfg.to_json());
    } else if (*theta) {
      theta_cfg.grid = SnrGrid{theta_snr, theta_snr, 1.0};
      const auto out = resolve_output(theta_out);
      write_sweep_csv(run_theta_sweep(theta_cfg), "cfsec/theta-sweep/1", "theta", out);
      finish(out, theta_cfg.to_json());
    } else if (*lemma) {
      if (lemma_gains.empty()) lemma_gains.assign(static_cast<std::size_t>(lemma_users), 1.0);
      const auto dims = parse_ints(dims_text);
      const auto out = resolve_output(lemma_out);
      write_lemma1_csv(run_lemma1(dims, lemma_gains, epsilon, lemma_trials, lemma_seed), out);
      finish(out, {{"mode", "lemma1"}, {"n", dims}, {"gains", lemma_gains}, {"epsilon", epsilon},
                   {"trials", lemma_trials}, {"seed", lemma_seed}, {"power", 1.0}});
    } else if (*codec) {
      const auto inst = make_instance(to_vector(codec_h), to_vector(codec_g), db_to_linear(codec_snr));
      const auto report = evaluate(inst);
      const auto chain = build_chain(inst, codec_n, codec_blocks, grid_ratio);
      std::mt19937_64 rng = derived_rng(codec_seed, {0xC0DEu});
      std::vector<Codeword> words;
      nlohmann::json users = nlohmann::json::array();
      for (int l = 0; l < chain.users(); ++l) {
        const double rate = report.allocation.size() > l ? report.allocation[l] : 0.0;
        const auto bins = make_binning(chain, l, rate, rng());
        const std::uint64_t w = std::uniform_int_distribution<std::uint64_t>(0, bins.bins() - 1)(rng);
        words.push_back(encode(chain, bins, w, rng()));
        const auto ps = power_statistics(chain, l, codec_trials, rng());
        users.push_back({{"user", l},
                         {"requested_rate", rate},
                         {"bin_bits", bins.bits},
                         {"rate_loss", bins.rate_loss},
                         {"message", w},
                         {"power_mean", ps.mean},
                         {"power_limit", ps.limit},
                         {"power_ok", ps.within_limit()}});
      }
      const auto view = eavesdropper_observation(chain, words, rng(), true);
      const auto crypto = crypto_lemma_check(chain, codec_trials, rng());
      nlohmann::json doc = {{"scalar_lattices", true},
                            {"chain", to_json(chain)},
                            {"users", users},
                            {"alignment_residual", view.alignment_residual},
                            {"float_residual", view.float_residual},
                            {"mod_identity_mismatches", view.mod_identity_mismatches},
                            {"crypto_lemma",
                             {{"alphabet", crypto.alphabet},
                              {"exact_checked", crypto.exact_checked},
                              {"exact_uniform", crypto.exact_uniform},
                              {"uniform_p", crypto.uniform_p},
                              {"independence_p", crypto.independence_p}}}};
      std::cout << doc.dump(2) << '\n';
    } else if (*plot) {
      std::filesystem::path in(plot_in);
      std::filesystem::path out = plot_out.empty() ? std::filesystem::path(in).replace_extension(".svg")
                                                   : resolve_output(plot_out);
      if (spec.x_label.empty()) {
        const auto header = read_csv(in).header;
        spec.x_label = header.front() == "snr_db" ? "SNR (dB)" : header.front();
      }
      emit_plot(in, out, spec);
      std::cout << out.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
