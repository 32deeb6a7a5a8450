// gridrisk: scenario-driven front end for the allocation, reserve-planning,
// and hedging schemes. Configs are JSON; outputs are CSV plus a JSON run
// summary. Identical configs (seed included) produce byte-identical CSVs.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gridrisk/alloc.hpp"
#include "gridrisk/errors.hpp"
#include "gridrisk/gbm.hpp"
#include "gridrisk/hedge.hpp"
#include "gridrisk/reserve.hpp"
#include "gridrisk/rng.hpp"
#include "presets_data.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest round-trip representation; keeps CSV output byte-stable.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw config_error(path.string() + ": cannot open file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(path.string() + ": cannot open for writing");
  }
  out << content;
}

// Parses JSON, converting nlohmann's byte offsets into line:column anchors.
json parse_config_text(const std::string& text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min(e.byte, text.size());
    for (std::size_t i = 0; i + 1 <= stop && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw config_error(name + ":" + std::to_string(line) + ":" +
                       std::to_string(col) + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Scenario configuration

struct ScenarioConfig {
  std::string scheme;  // allocate | reserve | hedge | montecarlo-hedge
  std::string source_name;

  gridrisk::gbm::GbmParams gbm{1.0, 0.0, 0.0};
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<std::vector<double>> covariance;
  double demand = 0.0;
  double block_power = 1.0;
  double horizon = 0.0;
  double maturity = 0.0;
  std::size_t n_steps = 0;
  std::size_t rebalance_every = 1;
  double epsilon = 0.0;
  double base_power = 25.0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::size_t n_paths = 1;
  std::string convention = "markov";
  bool integer_blocks = false;
  std::string output_dir = "gridrisk-out";
};

[[noreturn]] void fail_key(const ScenarioConfig& cfg, const std::string& key,
                           const std::string& what) {
  throw config_error(cfg.source_name + ": " + key + ": " + what);
}

double need_number(const ScenarioConfig& cfg, const json& j,
                   const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    fail_key(cfg, key, "required number is missing or not numeric");
  }
  return j.at(key).get<double>();
}

double opt_number(const ScenarioConfig& cfg, const json& j,
                  const std::string& key, double fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_number()) {
    fail_key(cfg, key, "must be numeric");
  }
  return j.at(key).get<double>();
}

std::size_t need_count(const ScenarioConfig& cfg, const json& j,
                       const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number_integer() ||
      j.at(key).get<long long>() < 0) {
    fail_key(cfg, key, "required nonnegative integer is missing or invalid");
  }
  return j.at(key).get<std::size_t>();
}

void read_seed(ScenarioConfig& cfg, const json& j) {
  if (!j.contains("seed") || !j.at("seed").is_number_integer() ||
      j.at("seed").get<long long>() < 0) {
    fail_key(cfg, "seed", "stochastic runs require a nonnegative integer seed");
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.has_seed = true;
}

void read_gbm(ScenarioConfig& cfg, const json& j) {
  if (!j.contains("gbm") || !j.at("gbm").is_object()) {
    fail_key(cfg, "gbm", "required object {p0, mu_g, sigma_g} is missing");
  }
  const json& g = j.at("gbm");
  cfg.gbm.p0 = need_number(cfg, g, "p0");
  cfg.gbm.mu_g = need_number(cfg, g, "mu_g");
  cfg.gbm.sigma_g = need_number(cfg, g, "sigma_g");
  if (cfg.gbm.p0 <= 0.0) {
    fail_key(cfg, "gbm.p0", "must be > 0");
  }
  if (cfg.gbm.sigma_g < 0.0) {
    fail_key(cfg, "gbm.sigma_g", "must be >= 0");
  }
}

ScenarioConfig parse_scenario(const json& j, const std::string& name) {
  ScenarioConfig cfg;
  cfg.source_name = name;
  if (!j.is_object()) {
    throw config_error(name + ": top level must be a JSON object");
  }
  if (!j.contains("scheme") || !j.at("scheme").is_string()) {
    fail_key(cfg, "scheme", "required string is missing");
  }
  cfg.scheme = j.at("scheme").get<std::string>();
  if (j.contains("output_dir")) {
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }

  if (cfg.scheme == "allocate") {
    cfg.demand = need_number(cfg, j, "demand");
    const bool has_var = j.contains("variances");
    const bool has_cov = j.contains("covariance");
    if (has_var == has_cov) {
      fail_key(cfg, "variances",
               "allocate needs exactly one of 'variances' or 'covariance'");
    }
    if (!j.contains("means") || !j.at("means").is_array()) {
      fail_key(cfg, "means", "required array is missing");
    }
    cfg.means = j.at("means").get<std::vector<double>>();
    if (has_var) {
      cfg.variances = j.at("variances").get<std::vector<double>>();
      if (cfg.variances.size() != cfg.means.size()) {
        fail_key(cfg, "variances", "length must match 'means'");
      }
    } else {
      cfg.covariance = j.at("covariance").get<std::vector<std::vector<double>>>();
      if (cfg.covariance.size() != cfg.means.size()) {
        fail_key(cfg, "covariance", "row count must match 'means'");
      }
      for (const auto& row : cfg.covariance) {
        if (row.size() != cfg.means.size()) {
          fail_key(cfg, "covariance", "matrix must be square");
        }
      }
    }
    return cfg;
  }

  if (cfg.scheme == "reserve") {
    read_gbm(cfg, j);
    read_seed(cfg, j);
    cfg.demand = need_number(cfg, j, "demand");
    cfg.block_power = need_number(cfg, j, "block_power");
    cfg.horizon = need_number(cfg, j, "horizon");
    cfg.n_steps = need_count(cfg, j, "n_steps");
    cfg.epsilon = need_number(cfg, j, "epsilon");
    cfg.base_power = opt_number(cfg, j, "base_power", 25.0);
    if (j.contains("convention")) {
      cfg.convention = j.at("convention").get<std::string>();
      if (cfg.convention != "markov" && cfg.convention != "literal") {
        fail_key(cfg, "convention", "must be 'markov' or 'literal'");
      }
    }
    if (j.contains("integer_blocks")) {
      if (!j.at("integer_blocks").is_boolean()) {
        fail_key(cfg, "integer_blocks", "must be a boolean");
      }
      cfg.integer_blocks = j.at("integer_blocks").get<bool>();
    }
    if (cfg.horizon <= 0.0 || cfg.n_steps == 0) {
      fail_key(cfg, "horizon", "horizon must be > 0 and n_steps >= 1");
    }
    if (cfg.epsilon <= 0.0) {
      fail_key(cfg, "epsilon", "must be > 0");
    }
    if (cfg.base_power <= 0.0) {
      fail_key(cfg, "base_power", "must be > 0");
    }
    return cfg;
  }

  if (cfg.scheme == "hedge" || cfg.scheme == "montecarlo-hedge") {
    read_gbm(cfg, j);
    read_seed(cfg, j);
    cfg.demand = need_number(cfg, j, "demand");
    cfg.block_power = need_number(cfg, j, "block_power");
    cfg.maturity = need_number(cfg, j, "maturity");
    cfg.n_steps = need_count(cfg, j, "n_steps");
    if (j.contains("rebalance_every")) {
      cfg.rebalance_every = need_count(cfg, j, "rebalance_every");
    }
    if (cfg.maturity <= 0.0 || cfg.n_steps == 0 || cfg.rebalance_every == 0) {
      fail_key(cfg, "maturity",
               "maturity must be > 0, n_steps >= 1, rebalance_every >= 1");
    }
    if (cfg.demand <= 0.0 || cfg.block_power <= 0.0) {
      fail_key(cfg, "demand", "demand and block_power must be > 0");
    }
    if (cfg.scheme == "montecarlo-hedge") {
      cfg.n_paths = need_count(cfg, j, "n_paths");
      if (cfg.n_paths == 0) {
        fail_key(cfg, "n_paths", "must be >= 1");
      }
    }
    return cfg;
  }

  fail_key(cfg, "scheme",
           "'" + cfg.scheme +
               "' is not one of allocate|reserve|hedge|montecarlo-hedge");
}

// Resolved-input echo; feeding this back as --config reproduces the run.
json echo_config(const ScenarioConfig& cfg) {
  json j;
  j["scheme"] = cfg.scheme;
  j["output_dir"] = cfg.output_dir;
  if (cfg.scheme == "allocate") {
    j["means"] = cfg.means;
    if (!cfg.variances.empty()) {
      j["variances"] = cfg.variances;
    } else {
      j["covariance"] = cfg.covariance;
    }
    j["demand"] = cfg.demand;
    return j;
  }
  j["gbm"] = {{"p0", cfg.gbm.p0}, {"mu_g", cfg.gbm.mu_g},
              {"sigma_g", cfg.gbm.sigma_g}};
  j["demand"] = cfg.demand;
  j["block_power"] = cfg.block_power;
  j["seed"] = cfg.seed;
  j["n_steps"] = cfg.n_steps;
  if (cfg.scheme == "reserve") {
    j["horizon"] = cfg.horizon;
    j["epsilon"] = cfg.epsilon;
    j["base_power"] = cfg.base_power;
    j["convention"] = cfg.convention;
    j["integer_blocks"] = cfg.integer_blocks;
  } else {
    j["maturity"] = cfg.maturity;
    j["rebalance_every"] = cfg.rebalance_every;
    if (cfg.scheme == "montecarlo-hedge") {
      j["n_paths"] = cfg.n_paths;
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Runners

struct CsvFile {
  std::string name;
  std::size_t rows = 0;
};

struct RunResult {
  json metrics;
  std::vector<CsvFile> outputs;
};

void emit_summary(const ScenarioConfig& cfg, const fs::path& out_dir,
                  RunResult result, double runtime_seconds) {
  json manifest = json::array();
  for (const auto& f : result.outputs) {
    manifest.push_back({{"file", f.name}, {"rows", f.rows}});
  }
  result.metrics["runtime_seconds"] = runtime_seconds;
  const json summary = {{"scheme", cfg.scheme},
                        {"config", echo_config(cfg)},
                        {"metrics", result.metrics},
                        {"outputs", manifest}};
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "scheme=" << cfg.scheme;
  for (const auto& [key, value] : result.metrics.items()) {
    std::cout << " " << key << "=" << value.dump();
  }
  std::cout << "\n";
  for (const auto& f : result.outputs) {
    std::cout << "wrote " << (out_dir / f.name).string() << " (" << f.rows
              << " rows)\n";
  }
  std::cout << "wrote " << (out_dir / "summary.json").string() << "\n";
}

RunResult run_allocate(const ScenarioConfig& cfg, const fs::path& out_dir) {
  const auto n = static_cast<Eigen::Index>(cfg.means.size());
  Eigen::VectorXd means(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    means[i] = cfg.means[static_cast<std::size_t>(i)];
  }

  gridrisk::alloc::ReguEnsemble ensemble;
  ensemble.means = means;
  ensemble.demand = cfg.demand;
  gridrisk::alloc::Allocation alloc;
  if (!cfg.variances.empty()) {
    Eigen::VectorXd variances(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      variances[i] = cfg.variances[static_cast<std::size_t>(i)];
    }
    ensemble.covariance = variances.asDiagonal();
    alloc = gridrisk::alloc::solve_uncorrelated(variances, means, cfg.demand);
  } else {
    ensemble.covariance.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        ensemble.covariance(r, c) =
            cfg.covariance[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      }
    }
    alloc = gridrisk::alloc::solve_correlated(ensemble);
  }

  std::string csv = "i,mu,sigma,alpha\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    csv += std::to_string(i) + "," + format_double(means[i]) + "," +
           format_double(ensemble.covariance(i, i)) + "," +
           format_double(alloc.weights[i]) + "\n";
  }
  write_file(out_dir / "allocation.csv", csv);

  const auto kkt = gridrisk::alloc::verify_kkt(ensemble, alloc, 1e-8);
  RunResult result;
  result.metrics = {
      {"kind", alloc.kind == gridrisk::alloc::SolutionKind::excess_production
                   ? "EP"
                   : "CP"},
      {"objective", alloc.objective},
      {"achieved_mean", alloc.achieved_mean},
      {"gamma", alloc.gamma},
      {"delta", alloc.delta},
      {"kkt_pass", kkt.pass()}};
  result.outputs.push_back({"allocation.csv", static_cast<std::size_t>(n)});
  return result;
}

RunResult run_reserve(const ScenarioConfig& cfg, const fs::path& out_dir) {
  gridrisk::reserve::ReserveProblem problem;
  problem.gbm = cfg.gbm;
  problem.demand = cfg.demand;
  problem.block_power = cfg.block_power;
  problem.horizon = cfg.horizon;
  // epsilon is per-unit^2 on the configured base power.
  problem.tolerance = cfg.epsilon * cfg.base_power * cfg.base_power;
  problem.convention = cfg.convention == "literal"
                           ? gridrisk::gbm::MeanConvention::literal_printed
                           : gridrisk::gbm::MeanConvention::markov;
  problem.integer_blocks = cfg.integer_blocks;

  const auto path = gridrisk::gbm::simulate_path(
      cfg.gbm, cfg.horizon, cfg.n_steps, gridrisk::rng::mix_seed(cfg.seed, 0));
  const auto plan = gridrisk::reserve::plan_horizon(problem, path);

  std::string csv = "t_start,t_end,k_blocks,p_obs,battery_power,deficit\n";
  double weighted_mismatch = 0.0;
  bool all_met = true;
  for (const auto& iv : plan.intervals) {
    csv += format_double(iv.t_start) + "," + format_double(iv.t_end) + "," +
           format_double(iv.k_blocks) + "," + format_double(iv.p_obs) + "," +
           format_double(iv.k_blocks * problem.block_power) + "," +
           format_double(problem.demand - iv.p_obs) + "\n";
    weighted_mismatch += iv.realized_avg_sq_mismatch * (iv.t_end - iv.t_start);
    all_met = all_met && iv.tolerance_met;
  }
  write_file(out_dir / "reserve_plan.csv", csv);

  const double avg_mismatch = weighted_mismatch / plan.total_covered;
  RunResult result;
  result.metrics = {
      {"n_intervals", plan.intervals.size()},
      {"total_covered", plan.total_covered},
      {"time_avg_sq_mismatch", avg_mismatch},
      {"time_avg_sq_mismatch_pu",
       avg_mismatch / (cfg.base_power * cfg.base_power)},
      {"tolerance_kw2", problem.tolerance},
      {"all_tolerance_met", all_met}};
  result.outputs.push_back({"reserve_plan.csv", plan.intervals.size()});
  return result;
}

std::string hedge_trace_csv(const gridrisk::hedge::HedgeProblem& problem,
                            const gridrisk::hedge::HedgeTrace& trace) {
  std::string csv = "t,p_g,a,b,v,payoff_if_now\n";
  for (const auto& s : trace.states) {
    csv += format_double(s.t) + "," + format_double(s.p_g) + "," +
           format_double(s.a) + "," + format_double(s.b) + "," +
           format_double(s.v) + "," +
           format_double(std::max(problem.demand - s.p_g, 0.0)) + "\n";
  }
  return csv;
}

RunResult run_hedge(const ScenarioConfig& cfg, const fs::path& out_dir) {
  gridrisk::hedge::HedgeProblem problem;
  problem.gbm = cfg.gbm;
  problem.demand = cfg.demand;
  problem.block_power = cfg.block_power;
  problem.maturity = cfg.maturity;

  const auto path = gridrisk::gbm::simulate_path(
      cfg.gbm, cfg.maturity, cfg.n_steps, gridrisk::rng::mix_seed(cfg.seed, 0));
  const auto trace =
      gridrisk::hedge::replay_hedge(problem, path, cfg.rebalance_every);
  write_file(out_dir / "hedge_trace.csv", hedge_trace_csv(problem, trace));

  const auto& last = trace.states.back();
  RunResult result;
  result.metrics = {{"terminal_error", trace.terminal_error},
                    {"payoff", trace.payoff},
                    {"v_terminal", last.v},
                    {"p_terminal", last.p_g},
                    {"v_initial", trace.states.front().v}};
  result.outputs.push_back({"hedge_trace.csv", trace.states.size()});
  return result;
}

RunResult run_montecarlo_hedge(const ScenarioConfig& cfg,
                               const fs::path& out_dir) {
  gridrisk::hedge::HedgeProblem problem;
  problem.gbm = cfg.gbm;
  problem.demand = cfg.demand;
  problem.block_power = cfg.block_power;
  problem.maturity = cfg.maturity;

  std::string csv = "path,seed,p_terminal,payoff,v_terminal,abs_error\n";
  std::vector<double> errors;
  errors.reserve(cfg.n_paths);
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    const std::uint64_t stream = gridrisk::rng::mix_seed(cfg.seed, i);
    const auto path =
        gridrisk::gbm::simulate_path(cfg.gbm, cfg.maturity, cfg.n_steps, stream);
    const auto trace =
        gridrisk::hedge::replay_hedge(problem, path, cfg.rebalance_every);
    const auto& last = trace.states.back();
    csv += std::to_string(i) + "," + std::to_string(stream) + "," +
           format_double(last.p_g) + "," + format_double(trace.payoff) + "," +
           format_double(last.v) + "," + format_double(trace.terminal_error) +
           "\n";
    errors.push_back(trace.terminal_error);
  }
  write_file(out_dir / "hedge_errors.csv", csv);

  double sum = 0.0;
  double sum_sq = 0.0;
  double max_err = 0.0;
  for (double e : errors) {
    sum += e;
    sum_sq += e * e;
    max_err = std::max(max_err, e);
  }
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.99 * static_cast<double>(sorted.size())));
  const double p99 = sorted[std::min(sorted.size() - 1,
                                     std::max<std::size_t>(rank, 1) - 1)];

  RunResult result;
  result.metrics = {{"n_paths", cfg.n_paths},
                    {"mean_abs_error", sum / double(cfg.n_paths)},
                    {"rms_error", std::sqrt(sum_sq / double(cfg.n_paths))},
                    {"max_error", max_err},
                    {"p99_error", p99}};
  result.outputs.push_back({"hedge_errors.csv", cfg.n_paths});
  return result;
}

int run_scenario(const ScenarioConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);

  RunResult result;
  if (cfg.scheme == "allocate") {
    result = run_allocate(cfg, out_dir);
  } else if (cfg.scheme == "reserve") {
    result = run_reserve(cfg, out_dir);
  } else if (cfg.scheme == "hedge") {
    result = run_hedge(cfg, out_dir);
  } else {
    result = run_montecarlo_hedge(cfg, out_dir);
  }

  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  emit_summary(cfg, out_dir, std::move(result), runtime);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Command-line plumbing

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* config_opt =
      cmd->add_option("--config", flags.config_path, "Scenario config (JSON)");
  if (config_required) {
    config_opt->required();
  }
  cmd->add_option("--out", flags.out_dir, "Output directory override");
  cmd->add_option("--seed", flags.seed, "Seed override");
  cmd->add_option("--format", flags.format, "Output format (csv)");
}

ScenarioConfig load_scenario(const CommonFlags& flags,
                             const std::string& expected_scheme) {
  const std::string text = read_file(flags.config_path);
  const json j = parse_config_text(text, flags.config_path);
  ScenarioConfig cfg = parse_scenario(j, flags.config_path);
  if (cfg.scheme != expected_scheme) {
    throw config_error(flags.config_path + ": scheme: config declares '" +
                       cfg.scheme + "' but the subcommand expects '" +
                       expected_scheme + "'");
  }
  return cfg;
}

void apply_overrides(ScenarioConfig& cfg, const CommonFlags& flags) {
  if (flags.format != "csv") {
    throw config_error("--format: only 'csv' is supported");
  }
  if (!flags.out_dir.empty()) {
    cfg.output_dir = flags.out_dir;
  }
  if (flags.seed) {
    cfg.seed = *flags.seed;
    cfg.has_seed = true;
  }
}

const std::map<std::string, const char*>& preset_table() {
  static const std::map<std::string, const char*> table = {
      {"fig2a", gridrisk_cli::presets::kFig2a},
      {"fig2b", gridrisk_cli::presets::kFig2b},
      {"fig3", gridrisk_cli::presets::kFig3},
      {"fig4", gridrisk_cli::presets::kFig4},
      {"fig5", gridrisk_cli::presets::kFig5},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Microgrid renewable-uncertainty toolkit: minimum-variance generation "
      "allocation, battery-reserve planning, and almost-sure demand hedging"};
  app.require_subcommand(1);

  // allocate
  auto* allocate_cmd =
      app.add_subcommand("allocate", "Minimum-variance generation allocation");
  CommonFlags allocate_flags;
  std::vector<double> flag_means;
  std::vector<double> flag_variances;
  double flag_demand = 0.0;
  add_common_flags(allocate_cmd, allocate_flags, false);
  allocate_cmd->add_option("--means", flag_means, "Unit mean outputs [kW]")
      ->delimiter(',');
  allocate_cmd
      ->add_option("--variances", flag_variances, "Unit output variances [kW^2]")
      ->delimiter(',');
  auto* demand_opt = allocate_cmd->add_option("--demand", flag_demand,
                                              "Required mean power [kW]");

  // plan-reserve / simulate-hedge / montecarlo-hedge
  auto* reserve_cmd = app.add_subcommand(
      "plan-reserve", "Adaptive battery-reserve plan over a horizon");
  CommonFlags reserve_flags;
  add_common_flags(reserve_cmd, reserve_flags, true);

  auto* hedge_cmd = app.add_subcommand(
      "simulate-hedge", "Replay the replication policy along one path");
  CommonFlags hedge_flags;
  add_common_flags(hedge_cmd, hedge_flags, true);

  auto* mc_cmd = app.add_subcommand(
      "montecarlo-hedge", "Ensemble replay with terminal-error statistics");
  CommonFlags mc_flags;
  std::optional<std::size_t> mc_paths;
  add_common_flags(mc_cmd, mc_flags, true);
  mc_cmd->add_option("--n-paths", mc_paths, "Path count override");

  // preset
  auto* preset_cmd =
      app.add_subcommand("preset", "Run a named built-in scenario");
  CommonFlags preset_flags;
  std::string preset_name;
  bool preset_dump = false;
  bool preset_list = false;
  preset_cmd->add_option("name", preset_name, "Preset name");
  preset_cmd->add_flag("--dump", preset_dump, "Print the preset config");
  preset_cmd->add_flag("--list", preset_list, "List available presets");
  preset_cmd->add_option("--out", preset_flags.out_dir, "Output directory");
  preset_cmd->add_option("--seed", preset_flags.seed, "Seed override");
  preset_cmd->add_option("--format", preset_flags.format, "Output format (csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (allocate_cmd->parsed()) {
      ScenarioConfig cfg;
      if (!allocate_flags.config_path.empty()) {
        if (!flag_means.empty() || !flag_variances.empty()) {
          throw config_error(
              "allocate: pass either --config or --means/--variances, not both");
        }
        cfg = load_scenario(allocate_flags, "allocate");
      } else {
        if (flag_means.empty() || flag_variances.empty() ||
            demand_opt->count() == 0) {
          throw config_error(
              "allocate: need --config, or --means, --variances and --demand");
        }
        json j = {{"scheme", "allocate"},
                  {"means", flag_means},
                  {"variances", flag_variances},
                  {"demand", flag_demand}};
        cfg = parse_scenario(j, "<flags>");
      }
      apply_overrides(cfg, allocate_flags);
      return run_scenario(cfg);
    }
    if (reserve_cmd->parsed()) {
      ScenarioConfig cfg = load_scenario(reserve_flags, "reserve");
      apply_overrides(cfg, reserve_flags);
      return run_scenario(cfg);
    }
    if (hedge_cmd->parsed()) {
      ScenarioConfig cfg = load_scenario(hedge_flags, "hedge");
      apply_overrides(cfg, hedge_flags);
      return run_scenario(cfg);
    }
    if (mc_cmd->parsed()) {
      ScenarioConfig cfg = load_scenario(mc_flags, "montecarlo-hedge");
      apply_overrides(cfg, mc_flags);
      if (mc_paths) {
        if (*mc_paths == 0) {
          throw config_error("--n-paths: must be >= 1");
        }
        cfg.n_paths = *mc_paths;
      }
      return run_scenario(cfg);
    }
    if (preset_cmd->parsed()) {
      if (preset_list) {
        for (const auto& entry : preset_table()) {
          std::cout << entry.first << "\n";
        }
        return kExitOk;
      }
      const auto it = preset_table().find(preset_name);
      if (it == preset_table().end()) {
        throw config_error("preset: unknown name '" + preset_name +
                           "' (try --list)");
      }
      if (preset_dump) {
        std::cout << it->second;
        return kExitOk;
      }
      const json j = parse_config_text(it->second, "preset:" + preset_name);
      ScenarioConfig cfg = parse_scenario(j, "preset:" + preset_name);
      apply_overrides(cfg, preset_flags);
      return run_scenario(cfg);
    }
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gridrisk::infeasible_error& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const gridrisk::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
