#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfsec/lattice.hpp"

namespace cfsec {

inline constexpr const char* kOutputDirEnv = "CFSEC_OUTPUT_DIR";

struct SnrGrid {
  double start = 0.0;
  double stop = 60.0;
  double step = 2.0;

  /// "start:stop:step" or a single value.
  static SnrGrid parse(const std::string& text);
  [[nodiscard]] std::vector<double> points() const;
};

struct SweepConfig {
  std::string mode = "snr-sweep";
  SnrGrid grid;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  int users = 3;
  int points = 512;                   // theta grid size
  std::vector<double> h;              // fixed gains; empty means drawn per trial
  std::vector<double> g;
  SearchOptions search;

  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

struct SweepRow {
  double x = 0.0;                     // snr_db or theta
  long trial = -1;                    // -1 marks a per-point mean
  double r_sum_secure = 0.0;
  double r_baseline = 0.0;
  double r_nonsecure_cf = 0.0;
  double capacity_sum = 0.0;
  bool degraded = false;
};

/// Gains fixed per trial across the whole grid, i.i.d. N(0,1) unless given.
/// Rows are ordered by (snr, trial) with the mean row after each point's trials.
std::vector<SweepRow> run_snr_sweep(const SweepConfig& cfg);

/// h = [1, sqrt 2], g = sqrt 3 [cos theta, sin theta] at one SNR, theta on
/// cell midpoints of [0, 2 pi).
std::vector<SweepRow> run_theta_sweep(const SweepConfig& cfg);

/// Eavesdropper gains sqrt 3 [cos theta, sin theta] with h_l / g_l rational for both users.
std::vector<double> rational_theta_points();

struct Lemma1Row {
  int n = 1;
  int users = 2;
  double epsilon = 0.1;
  double entropy = 0.0;
  double ratio_bound = 0.0;
  double clean_bound = 0.0;
  double tail = 0.0;
  double entropy_mc = 0.0;
  double entropy_mc_se = 0.0;
};

std::vector<Lemma1Row> run_lemma1(const std::vector<int>& dims, const std::vector<double>& gains, double epsilon,
                                  std::size_t trials, std::uint64_t seed);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& schema, const std::string& x_name,
                     const std::filesystem::path& path);
void write_lemma1_csv(const std::vector<Lemma1Row>& rows, const std::filesystem::path& path);

/// Writes the config JSON next to an output file (`<path>.json`).
void write_sidecar(const std::filesystem::path& path, const nlohmann::json& config);

/// Resolves relative output paths against $CFSEC_OUTPUT_DIR when it is set.
std::filesystem::path resolve_output(const std::string& path);

struct CsvTable {
  std::string schema;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label = "rate (bits per channel use)";
  std::vector<std::string> columns;   // empty: every numeric column after the first
  int width = 640;
  int height = 400;
};

/// Line plot, one series per column, as SVG text. Rows whose `trial` column is
/// not "mean" are skipped when that column exists.
std::string render_plot(const CsvTable& table, const PlotSpec& spec);
void emit_plot(const std::filesystem::path& csv, const std::filesystem::path& svg, PlotSpec spec);

/// Runs fn(i) for i in [0, count) on a few worker threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

std::string format_number(double v);

}  // namespace cfsec
