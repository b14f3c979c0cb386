#include "cfsec/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cfsec/channel.hpp"
#include "cfsec/lemma1.hpp"
#include "cfsec/rates.hpp"
#include "cfsec/stats.hpp"

namespace cfsec {

namespace {

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: " + s);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

SweepRow row_from(const RateReport& r, double x, long trial) {
  SweepRow row;
  row.x = x;
  row.trial = trial;
  row.r_sum_secure = r.r_sum_secure;
  row.r_baseline = r.r_baseline;
  row.r_nonsecure_cf = r.r_nonsecure_sum;
  row.capacity_sum = r.capacity_sum;
  row.degraded = r.coefficients.degraded;
  return row;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SnrGrid SnrGrid::parse(const std::string& text) {
  const auto parts = split(text, ':');
  SnrGrid grid;
  if (parts.size() == 1) {
    grid.start = grid.stop = parse_double(parts[0]);
    grid.step = 1.0;
  } else if (parts.size() == 3) {
    grid.start = parse_double(parts[0]);
    grid.stop = parse_double(parts[1]);
    grid.step = parse_double(parts[2]);
  } else {
    throw std::invalid_argument("SNR grid must be 'start:stop:step' or a single value");
  }
  if (!(grid.step > 0.0) || grid.stop < grid.start) throw std::invalid_argument("SNR grid: need step > 0 and stop >= start");
  return grid;
}

std::vector<double> SnrGrid::points() const {
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

void SweepConfig::validate() const {
  if (users < 1) throw std::invalid_argument("sweep: users must be >= 1");
  if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  if (points < 1) throw std::invalid_argument("sweep: points must be >= 1");
  if (h.size() != g.size()) throw std::invalid_argument("sweep: h and g differ in length");
  if (!h.empty() && static_cast<int>(h.size()) != users) throw std::invalid_argument("sweep: gains do not match users");
}

nlohmann::json SweepConfig::to_json() const {
  return {{"mode", mode},
          {"snr_db", {{"start", grid.start}, {"stop", grid.stop}, {"step", grid.step}}},
          {"trials", trials},
          {"seed", seed},
          {"users", users},
          {"points", points},
          {"h", h},
          {"g", g},
          {"search", {{"delta", search.delta}, {"node_budget", search.node_budget},
                      {"fallback_radius", search.fallback_radius}}}};
}

std::vector<SweepRow> run_snr_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto snrs = cfg.grid.points();
  const std::size_t trials = cfg.h.empty() ? cfg.trials : 1;
  std::vector<std::vector<SweepRow>> per_trial(trials);

  parallel_for(trials, [&](std::size_t t) {
    Eigen::VectorXd h, g;
    if (cfg.h.empty()) {
      auto rng = derived_rng(cfg.seed, {0x6A1Au, t});
      std::tie(h, g) = gaussian_gains(cfg.users, rng());
    } else {
      h = Eigen::Map<const Eigen::VectorXd>(cfg.h.data(), static_cast<Eigen::Index>(cfg.h.size()));
      g = Eigen::Map<const Eigen::VectorXd>(cfg.g.data(), static_cast<Eigen::Index>(cfg.g.size()));
    }
    for (double db : snrs) {
      const auto inst = make_instance(h, g, db_to_linear(db));
      per_trial[t].push_back(row_from(evaluate(inst, cfg.search), db, static_cast<long>(t)));
    }
  });

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < snrs.size(); ++i) {
    SweepRow mean;
    mean.x = snrs[i];
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& r = per_trial[t][i];
      rows.push_back(r);
      mean.r_sum_secure += r.r_sum_secure;
      mean.r_baseline += r.r_baseline;
      mean.r_nonsecure_cf += r.r_nonsecure_cf;
      mean.capacity_sum += r.capacity_sum;
      mean.degraded = mean.degraded || r.degraded;
    }
    const auto n = static_cast<double>(trials);
    mean.r_sum_secure /= n;
    mean.r_baseline /= n;
    mean.r_nonsecure_cf /= n;
    mean.capacity_sum /= n;
    rows.push_back(mean);
  }
  return rows;
}

std::vector<SweepRow> run_theta_sweep(const SweepConfig& cfg) {
  if (cfg.points < 1) throw std::invalid_argument("theta sweep: points must be >= 1");
  const double power = db_to_linear(cfg.grid.start);
  Eigen::Vector2d h(1.0, std::numbers::sqrt2);
  std::vector<SweepRow> rows(static_cast<std::size_t>(cfg.points));
  parallel_for(rows.size(), [&](std::size_t i) {
    const double theta = 2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / cfg.points;
    const Eigen::Vector2d g = std::numbers::sqrt3 * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    rows[i] = row_from(evaluate(make_instance(h, g, power), cfg.search), theta, -1);
  });
  return rows;
}

std::vector<double> rational_theta_points() {
  // g = [1, sqrt 2] and g = [5/3, sqrt 2 / 3], both on the radius sqrt 3 circle.
  return {std::atan2(std::numbers::sqrt2, 1.0), std::atan2(std::numbers::sqrt2, 5.0)};
}

std::vector<Lemma1Row> run_lemma1(const std::vector<int>& dims, const std::vector<double>& gains, double epsilon,
                                  std::size_t trials, std::uint64_t seed) {
  if (gains.empty()) throw std::invalid_argument("lemma1: need gains");
  const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(gains.data(), static_cast<Eigen::Index>(gains.size()));
  Eigen::Index j = 0;
  g.cwiseAbs().minCoeff(&j);
  std::vector<Lemma1Row> rows(dims.size());
  parallel_for(dims.size(), [&](std::size_t i) {
    const auto exp = make_experiment(dims[i], g, 1.0, epsilon, trials);
    const auto est = entropy_per_dim(exp, static_cast<int>(j), seed);
    auto& row = rows[i];
    row.n = dims[i];
    row.users = exp.users();
    row.epsilon = epsilon;
    row.entropy = est.exact;
    row.entropy_mc = est.mc;
    row.entropy_mc_se = est.mc_se;
    row.ratio_bound = ratio_bound(exp, static_cast<int>(j));
    row.clean_bound = clean_bound(exp, static_cast<int>(j));
    row.tail = tail_probability(exp, trials, seed);
  });
  return rows;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& schema, const std::string& x_name,
                     const std::filesystem::path& path) {
  auto out = open_output(path);
  const bool with_trial = schema.find("snr") != std::string::npos;
  out << "# schema: " << schema << '\n';
  out << x_name << (with_trial ? ",trial" : "") << ",r_sum_secure,r_baseline,r_nonsecure_cf,capacity_sum,degraded\n";
  for (const auto& r : rows) {
    out << format_number(r.x);
    if (with_trial) out << ',' << (r.trial < 0 ? std::string("mean") : std::to_string(r.trial));
    out << ',' << format_number(r.r_sum_secure) << ',' << format_number(r.r_baseline) << ','
        << format_number(r.r_nonsecure_cf) << ',' << format_number(r.capacity_sum) << ',' << (r.degraded ? 1 : 0)
        << '\n';
  }
}

void write_lemma1_csv(const std::vector<Lemma1Row>& rows, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "# schema: cfsec/lemma1/1\n";
  out << "n,K,epsilon,entropy_bits_per_dim,ratio_bound_bits,clean_bound_bits,tail_prob,entropy_mc_bits,entropy_mc_se\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.users << ',' << format_number(r.epsilon) << ',' << format_number(r.entropy) << ','
        << format_number(r.ratio_bound) << ',' << format_number(r.clean_bound) << ',' << format_number(r.tail) << ','
        << format_number(r.entropy_mc) << ',' << format_number(r.entropy_mc_se) << '\n';
}

void write_sidecar(const std::filesystem::path& path, const nlohmann::json& config) {
  auto sidecar = path;
  sidecar += ".json";
  auto out = open_output(sidecar);
  out << config.dump(2) << '\n';
}

std::filesystem::path resolve_output(const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') return std::filesystem::path(dir) / p;
  return p;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string key = "# schema: ";
      if (line.rfind(key, 0) == 0) table.schema = line.substr(key.size());
      continue;
    }
    auto cells = split(line, ',');
    if (table.header.empty()) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size()) throw std::runtime_error("csv: ragged row in " + path.string());
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) throw std::runtime_error("csv: no header in " + path.string());
  return table;
}

std::string render_plot(const CsvTable& table, const PlotSpec& spec) {
  const auto col_of = [&](const std::string& name) -> long {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    return it == table.header.end() ? -1 : static_cast<long>(it - table.header.begin());
  };
  const long trial_col = col_of("trial");
  std::vector<std::string> names = spec.columns;
  if (names.empty())
    for (std::size_t c = 1; c < table.header.size(); ++c)
      if (static_cast<long>(c) != trial_col && table.header[c] != "degraded") names.push_back(table.header[c]);

  struct Series {
    std::string name;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  for (const auto& name : names) {
    const long c = col_of(name);
    if (c < 0) throw std::invalid_argument("plot: no column " + name);
    Series s{name, {}};
    for (const auto& row : table.rows) {
      if (trial_col >= 0 && row[static_cast<std::size_t>(trial_col)] != "mean") continue;
      const auto& cell = row[static_cast<std::size_t>(c)];
      if (cell.empty()) continue;
      const double y = parse_double(cell);
      if (!std::isfinite(y)) continue;
      s.pts.emplace_back(parse_double(row[0]), y);
    }
    if (!s.pts.empty()) series.push_back(std::move(s));
  }

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = 0.0, y1 = -x0;
  for (const auto& s : series)
    for (auto [x, y] : s.pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (series.empty()) x0 = 0.0, x1 = 1.0, y1 = 1.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;

  const double left = 60, right = spec.width - 170.0, top = 30, bottom = spec.height - 45.0;
  const auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (right - left); };
  const auto sy = [&](double y) { return bottom - (y - y0) / (y1 - y0) * (bottom - top); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream svg;
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << spec.width << R"(" height=")" << spec.height
      << R"(" font-family="sans-serif" font-size="12">)" << '\n';
  svg << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  svg << "<text x=\"" << (left + right) / 2 << "\" y=\"18\" text-anchor=\"middle\">" << escape_xml(spec.title)
      << "</text>\n";
  svg << "<path d=\"M" << left << ',' << top << " V" << bottom << " H" << right
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    svg << "<text x=\"" << format_number(sx(xv)) << "\" y=\"" << bottom + 15 << "\" text-anchor=\"middle\">"
        << format_number(std::round(xv * 100.0) / 100.0) << "</text>\n";
    svg << "<text x=\"" << left - 5 << "\" y=\"" << format_number(sy(yv) + 4) << "\" text-anchor=\"end\">"
        << format_number(std::round(yv * 100.0) / 100.0) << "</text>\n";
  }
  svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << spec.height - 8 << "\" text-anchor=\"middle\">"
      << escape_xml(spec.x_label.empty() ? table.header[0] : spec.x_label) << "</text>\n";
  svg << "<text transform=\"translate(15," << (top + bottom) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(spec.y_label) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* colour = palette[i % std::size(palette)];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[i].pts.size(); ++k)
      svg << (k ? " " : "") << format_number(sx(series[i].pts[k].first)) << ','
          << format_number(sy(series[i].pts[k].second));
    svg << "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(i);
    svg << "<line x1=\"" << right + 10 << "\" y1=\"" << ly << "\" x2=\"" << right + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << right + 35 << "\" y=\"" << ly + 4 << "\">" << escape_xml(series[i].name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const std::filesystem::path& csv, const std::filesystem::path& svg, PlotSpec spec) {
  const auto table = read_csv(csv);
  if (spec.title.empty()) spec.title = table.schema.empty() ? csv.filename().string() : table.schema;
  auto out = open_output(svg);
  out << render_plot(table, spec);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace cfsec
