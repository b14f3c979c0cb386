#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <doctest.h>

#include "cfsec/experiment.hpp"
#include "cfsec/rates.hpp"
#include "cfsec/stats.hpp"

using namespace cfsec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "cfsec_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("snr grid parsing") {
  const auto g = SnrGrid::parse("0:60:2").points();
  CHECK(g.size() == 31);
  CHECK(g.back() == 60.0);
  CHECK(SnrGrid::parse("25").points() == std::vector<double>{25.0});
  CHECK(SnrGrid::parse("0:1:0.1").points().size() == 11);
  CHECK_THROWS(SnrGrid::parse("0:10"));
  CHECK_THROWS(SnrGrid::parse("10:0:1"));
  CHECK_THROWS(SnrGrid::parse("0:10:0"));
  CHECK_THROWS(SnrGrid::parse("a:b:c"));
}

TEST_CASE("snr sweep rows and means") {
  SweepConfig cfg;
  cfg.grid = SnrGrid::parse("10:30:10");
  cfg.trials = 4;
  cfg.seed = 9;
  const auto rows = run_snr_sweep(cfg);
  REQUIRE(rows.size() == 3 * 5);
  for (std::size_t p = 0; p < 3; ++p) {
    double sum = 0.0;
    for (std::size_t t = 0; t < 4; ++t) {
      const auto& r = rows[p * 5 + t];
      CHECK(r.trial == static_cast<long>(t));
      CHECK(r.x == 10.0 * (p + 1));
      CHECK(r.r_sum_secure <= r.capacity_sum);
      sum += r.r_sum_secure;
    }
    CHECK(rows[p * 5 + 4].trial == -1);
    CHECK(rows[p * 5 + 4].r_sum_secure == doctest::Approx(sum / 4.0));
  }
  const auto again = run_snr_sweep(cfg);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].r_sum_secure == rows[i].r_sum_secure);

  // Gains stay fixed per trial across the grid.
  auto [h, g] = gaussian_gains(3, derived_rng(9, {0x6A1Au, 2})());
  CHECK(rows[5 + 2].r_sum_secure == evaluate(make_instance(h, g, db_to_linear(20.0))).r_sum_secure);
}

TEST_CASE("fixed gains run a single trial") {
  SweepConfig cfg;
  cfg.users = 2;
  cfg.h = {1.0, std::sqrt(2.0)};
  cfg.g = {1.0, 1.0};
  cfg.grid = SnrGrid::parse("20:40:20");
  const auto rows = run_snr_sweep(cfg);
  CHECK(rows.size() == 4);
  cfg.g = {1.0};
  CHECK_THROWS(run_snr_sweep(cfg));
}

TEST_CASE("theta sweep") {
  SweepConfig cfg;
  cfg.grid = SnrGrid::parse("25");
  cfg.points = 32;
  const auto rows = run_theta_sweep(cfg);
  REQUIRE(rows.size() == 32);
  CHECK(rows[0].x == doctest::Approx(std::numbers::pi / 32.0));
  for (const auto& r : rows) CHECK(r.r_baseline == 0.0);
}

TEST_CASE("rational angle points give rational gain ratios") {
  for (double theta : rational_theta_points()) {
    const double g1 = std::sqrt(3.0) * std::cos(theta), g2 = std::sqrt(3.0) * std::sin(theta);
    const double r1 = 1.0 / g1, r2 = std::sqrt(2.0) / g2;
    CHECK(std::abs(r1 * 15.0 - std::round(r1 * 15.0)) < 1e-9);
    CHECK(std::abs(r2 * 15.0 - std::round(r2 * 15.0)) < 1e-9);
  }
}

TEST_CASE("rational angles stop the secure rate from growing") {
  const Eigen::Vector2d h(1.0, std::sqrt(2.0));
  const auto rate = [&](double theta, double db) {
    const Eigen::Vector2d g = std::sqrt(3.0) * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    return evaluate(make_instance(h, g, db_to_linear(db))).r_sum_secure;
  };
  const auto pts = rational_theta_points();
  CHECK(rate(pts[0], 25.0) == 0.0);
  for (double theta : pts) {
    CHECK(rate(theta, 75.0) - rate(theta, 25.0) < 0.01);
    CHECK(rate(theta + 0.01, 75.0) - rate(theta + 0.01, 25.0) > 1.0);
  }
}

TEST_CASE("capacity column is the closed form") {
  SweepConfig cfg;
  cfg.users = 2;
  cfg.h = {0.5, 1.5};
  cfg.g = {1.0, 0.2};
  cfg.grid = SnrGrid::parse("0:40:10");
  for (const auto& r : run_snr_sweep(cfg))
    CHECK(r.capacity_sum == doctest::Approx(0.5 * std::log2(1.0 + 2.5 * db_to_linear(r.x))).epsilon(1e-12));
}

TEST_CASE("sweep output is byte-identical across reruns and plots four series") {
  SweepConfig cfg;
  cfg.grid = SnrGrid::parse("0:20:5");
  cfg.trials = 3;
  const auto a = scratch("rerun_a.csv"), b = scratch("rerun_b.csv");
  write_sweep_csv(run_snr_sweep(cfg), "cfsec/snr-sweep/1", "snr_db", a);
  write_sweep_csv(run_snr_sweep(cfg), "cfsec/snr-sweep/1", "snr_db", b);
  CHECK(slurp(a) == slurp(b));
  const auto svg = render_plot(read_csv(a), {});
  std::size_t lines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++lines;
  CHECK(lines == 4);
}

TEST_CASE("lemma1 rows") {
  const auto rows = run_lemma1({1, 4}, {1.0, 1.0}, 0.1, 20'000, 3);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].entropy == doctest::Approx(1.0612781244591327));
  CHECK(rows[0].ratio_bound == doctest::Approx(rows[0].clean_bound));
  CHECK(rows[1].ratio_bound > rows[1].clean_bound);
  CHECK(rows[1].tail < rows[0].tail);
}

TEST_CASE("csv round trip with schema line and sidecar") {
  const auto path = scratch("sweep.csv");
  SweepConfig cfg;
  cfg.grid = SnrGrid::parse("0:20:10");
  cfg.trials = 2;
  write_sweep_csv(run_snr_sweep(cfg), "cfsec/snr-sweep/1", "snr_db", path);
  write_sidecar(path, cfg.to_json());
  const auto t = read_csv(path);
  CHECK(t.schema == "cfsec/snr-sweep/1");
  CHECK(t.header.front() == "snr_db");
  CHECK(t.header[1] == "trial");
  CHECK(t.rows.size() == 9);
  CHECK(t.rows[2][1] == "mean");
  const auto side = nlohmann::json::parse(slurp(path.string() + ".json"));
  CHECK(side["trials"] == 2);

  const auto lpath = scratch("lemma.csv");
  write_lemma1_csv(run_lemma1({2}, {1.0, 1.0}, 0.1, 1000, 1), lpath);
  const auto l = read_csv(lpath);
  CHECK(l.header == std::vector<std::string>{"n", "K", "epsilon", "entropy_bits_per_dim", "ratio_bound_bits",
                                             "clean_bound_bits", "tail_prob", "entropy_mc_bits", "entropy_mc_se"});
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678})
    CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("output directory from the environment") {
  ::setenv(kOutputDirEnv, "/tmp/cfsec_out", 1);
  CHECK(resolve_output("a.csv") == fs::path("/tmp/cfsec_out/a.csv"));
  CHECK(resolve_output("/abs/a.csv") == fs::path("/abs/a.csv"));
  ::unsetenv(kOutputDirEnv);
  CHECK(resolve_output("a.csv") == fs::path("a.csv"));
}

TEST_CASE("plots are deterministic and skip empty series") {
  CsvTable t;
  t.header = {"snr_db", "trial", "a", "b"};
  t.rows = {{"0", "0", "1", ""}, {"0", "mean", "1", ""}, {"10", "mean", "2", ""}};
  PlotSpec spec;
  spec.title = "demo <1>";
  const auto svg = render_plot(t, spec);
  CHECK(svg == render_plot(t, spec));
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find(">a</text>") != std::string::npos);
  CHECK(svg.find(">b</text>") == std::string::npos);
  CHECK(svg.find("demo &lt;1&gt;") != std::string::npos);
  CHECK(svg.find("points=\"60,") != std::string::npos);

  const auto csv = scratch("plot.csv");
  std::ofstream(csv) << "# schema: x\nsnr_db,trial,a\n0,mean,1\n10,mean,2\n";
  emit_plot(csv, scratch("plot.svg"), {});
  CHECK(slurp(scratch("plot.svg")).find("<svg") == 0);
}

TEST_CASE("parallel_for visits each index once") {
  std::vector<std::atomic<int>> seen(1000);
  parallel_for(seen.size(), [&](std::size_t i) { seen[i]++; });
  for (auto& s : seen) CHECK(s.load() == 1);
  CHECK_THROWS(parallel_for(10, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
}
