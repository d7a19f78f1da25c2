#include "alphascreen/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "alphascreen/csv_io.hpp"
#include "alphascreen/study.hpp"

namespace alphascreen {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v, int digits) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string full(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_betas(const std::string& list) {
  std::vector<double> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("invalid beta '" + item + "'");
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("beta must lie in (0, 1)");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("no beta given");
  return out;
}

std::optional<SimulationScenario> builtin_scenario(const std::string& name) {
  if (name == "table1_normal") return table1_normal_scenario();
  if (name == "table1_lognormal") return table1_lognormal_scenario();
  if (name == "table2") return table2_scenario();
  if (name == "figure1") return figure1_scenario();
  if (name == "dense_alpha") return dense_alpha_scenario();
  return std::nullopt;
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir);
}

std::string in_dir(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string methods = "yd";
  std::string betas = "0.05,0.1,0.15";
  std::optional<int> rank;
  int reps = 300;
  std::optional<std::uint64_t> seed;
  std::optional<double> nu;
  int threads = 0;
  double gamma_scale = 1.0;
  std::string out = ".";
  bool dump_panel = false;
};

int cmd_simulate(const SimulateArgs& a) {
  SimulationScenario scenario;
  StudyOptions options;
  try {
    if (auto b = builtin_scenario(a.scenario)) {
      scenario = *b;
    } else {
      scenario = load_scenario(a.scenario);
    }
    if (a.seed) scenario.seed = *a.seed;
    if (a.nu) scenario.nu = *a.nu;
    scenario.validate();
    if (a.reps < 1) throw ConfigError("--reps must be at least 1");
    if (a.rank && *a.rank < 1) throw ConfigError("--rank must be at least 1");
    options.methods = parse_methods(a.methods);
    options.betas = parse_betas(a.betas);
    options.replications = a.reps;
    options.threads = a.threads > 0
                          ? a.threads
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    options.settings.rank = a.rank;
    if (!(a.gamma_scale > 0.0)) throw ConfigError("--gamma-scale must be positive");
    options.settings.gamma_scale = a.gamma_scale;
    prepare_dir(a.out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  const StudyResult result = run_study(scenario, options);
  write_text_file(in_dir(a.out, "report.csv"), report_csv(result.reports));
  write_text_file(in_dir(a.out, "replications.csv"), replications_csv(result));

  json info;
  info["scenario"] = scenario.name.empty() ? a.scenario : scenario.name;
  info["seed"] = scenario.seed;
  info["nu"] = scenario.nu;
  info["replications"] = options.replications;
  info["threads"] = options.threads;
  info["failures"] = result.failures;
  info["runtime_seconds"] = result.runtime;
  json per = json::array();
  for (const auto& r : result.reports) {
    per.push_back({{"method", r.method},
                   {"beta", r.beta},
                   {"failures", r.failures},
                   {"sd_degenerate", r.sd_degenerate}});
  }
  info["reports"] = per;
  write_text_file(in_dir(a.out, "run_info.json"), info.dump(2) + "\n");

  if (a.dump_panel) {
    Rng rng(replication_seed(scenario.seed, 0));
    const GeneratedPanel g = generate_panel(scenario, rng);
    write_returns_csv(in_dir(a.out, "returns.csv"), g.returns);
    write_factors_csv(in_dir(a.out, "factors.csv"), g.observed_factors);
    std::string truth = "entity_id,alpha\n";
    for (Eigen::Index i = 0; i < g.oracle.alpha.size(); ++i) {
      truth += g.returns.entity_ids()[static_cast<std::size_t>(i)] + "," +
               full(g.oracle.alpha(i)) + "\n";
    }
    write_text_file(in_dir(a.out, "truth.csv"), truth);
  }

  std::cout << report_csv(result.reports);
  if (result.failures > 0) {
    std::cerr << "warning: " << result.failures
              << " method evaluations failed; see run_info.json\n";
  }
  return kExitOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string returns;
  std::string factors;
  std::string method = "yd";
  double beta = 0.1;
  std::optional<int> rank;
  double gamma_scale = 1.0;
  std::string out = ".";
};

int cmd_analyze(const AnalyzeArgs& a) {
  ReturnPanel returns;
  FactorPanel factors;
  Method method = Method::yd;
  try {
    method = parse_method(a.method);
    if (!(a.beta > 0.0 && a.beta < 1.0)) throw ConfigError("--beta must lie in (0, 1)");
    if (a.rank && *a.rank < 1) throw ConfigError("--rank must be at least 1");
    if (!(a.gamma_scale > 0.0)) throw ConfigError("--gamma-scale must be positive");
    returns = read_returns_csv(a.returns);
    factors = read_factors_csv(a.factors);
    require_aligned(returns, factors);
    prepare_dir(a.out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  MethodSettings settings;
  settings.rank = a.rank;
  settings.gamma_scale = a.gamma_scale;
  const Selection s = run_method(returns, factors, method, a.beta, settings);
  const auto& ids = returns.entity_ids();
  std::vector<char> rejected(ids.size(), 0);
  for (const int i : s.rejected) rejected[static_cast<std::size_t>(i)] = 1;

  std::string sel = "entity_id,alpha_hat,statistic,rejected\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    sel += ids[i] + "," + full(s.alpha_hat(k)) + "," + full(s.statistic(k)) + "," +
           (rejected[i] ? "1" : "0") + "\n";
  }
  write_text_file(in_dir(a.out, "selection.csv"), sel);

  json meta;
  meta["method"] = method_label(method);
  meta["beta"] = a.beta;
  meta["rank_hat"] = s.rank;
  meta["n"] = returns.periods();
  meta["p"] = returns.entities();
  meta["rejections"] = s.rejected.size();
  if (s.split) {
    meta["threshold"] = std::isfinite(s.threshold) ? json(s.threshold) : json("inf");
    meta["rank_hat_second_half"] = s.split->rank2;
  } else {
    meta["p_value_cutoff"] = s.threshold;
  }
  write_text_file(in_dir(a.out, "selection.meta.json"), meta.dump(2) + "\n");

  if (s.split) {
    std::string rep = "entity_id,t1,t2,t_prod,rejected\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      rep += ids[i] + "," + full(s.split->t1(k)) + "," + full(s.split->t2(k)) + "," +
             full(s.split->t_prod(k)) + "," + (rejected[i] ? "1" : "0") + "\n";
    }
    write_text_file(in_dir(a.out, "split_report.csv"), rep);
  } else {
    std::string rep = "entity_id,alpha_hat,statistic,p_value,rejected\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      rep += ids[i] + "," + full(s.alpha_hat(k)) + "," + full(s.statistic(k)) + "," +
             full(s.p_values(k)) + "," + (rejected[i] ? "1" : "0") + "\n";
    }
    write_text_file(in_dir(a.out, "baseline_report.csv"), rep);
  }

  EstimationOptions est;
  est.rank = a.rank;
  est.long_run_variance = true;
  const AlphaFit fit = estimate_alpha(returns, factors, est);
  std::string af = "entity_id,alpha_hat,long_run_var\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    af += ids[i] + "," + full(fit.alpha(k)) + "," + full((*fit.long_run_variance)(k)) +
          "\n";
  }
  write_text_file(in_dir(a.out, "alpha_fit.csv"), af);

  std::cout << method_label(method) << ": " << s.rejected.size() << " of "
            << ids.size() << " entities selected at beta=" << a.beta << "\n";
  return kExitOk;
}

// ---- replicate-table -------------------------------------------------------

struct ReferenceRow {
  const char* table;
  const char* block;
  double nu;
  const char* method;
  double fdr[3];
  double power[3];
};

const ReferenceRow kReferenceRows[] = {
    {"1", "normal", 0.2, "sbh", {7.05, 13.29, 19.09}, {56.72, 68.19, 74.63}},
    {"1", "normal", 0.2, "sn", {7.28, 12.61, 17.97}, {15.14, 26.23, 35.62}},
    {"1", "normal", 0.2, "yd", {3.81, 8.70, 13.45}, {39.29, 56.32, 64.87}},
    {"1", "normal", 0.3, "sbh", {7.42, 13.73, 19.97}, {96.67, 98.12, 98.77}},
    {"1", "normal", 0.3, "sn", {6.26, 12.03, 17.78}, {58.67, 71.87, 79.75}},
    {"1", "normal", 0.3, "yd", {4.18, 9.05, 14.14}, {92.95, 96.27, 97.51}},
    {"1", "lognormal", 0.2, "sbh", {14.78, 20.85, 26.28}, {64.86, 74.56, 80.10}},
    {"1", "lognormal", 0.2, "sn", {12.92, 19.22, 24.77}, {20.25, 32.59, 42.23}},
    {"1", "lognormal", 0.2, "yd", {4.41, 9.00, 13.60}, {34.39, 53.87, 64.13}},
    {"1", "lognormal", 0.3, "sbh", {12.31, 18.75, 24.75}, {94.61, 96.05, 96.93}},
    {"1", "lognormal", 0.3, "sn", {9.82, 16.22, 22.41}, {62.65, 74.92, 82.22}},
    {"1", "lognormal", 0.3, "yd", {4.60, 9.23, 14.24}, {92.10, 95.74, 97.03}},
    {"2", "garch_arma", 0.2, "sbh", {13.80, 21.80, 28.99}, {59.20, 69.98, 76.32}},
    {"2", "garch_arma", 0.2, "sn", {7.36, 12.82, 18.27}, {13.05, 22.96, 31.88}},
    {"2", "garch_arma", 0.2, "yd", {4.25, 9.50, 14.50}, {26.34, 46.26, 57.04}},
    {"2", "garch_arma", 0.3, "sbh", {12.87, 21.32, 28.96}, {96.08, 97.90, 98.62}},
    {"2", "garch_arma", 0.3, "sn", {6.48, 12.19, 17.90}, {54.36, 67.84, 76.24}},
    {"2", "garch_arma", 0.3, "yd", {4.71, 9.57, 14.70}, {88.72, 93.68, 95.61}},
};

const ReferenceRow* reference_row(const std::string& table, const std::string& block,
                          double nu, const std::string& method) {
  for (const auto& r : kReferenceRows) {
    if (table == r.table && block == r.block && std::abs(nu - r.nu) < 1e-9 &&
        method == r.method) {
      return &r;
    }
  }
  return nullptr;
}

struct TableArgs {
  std::string table;
  int reps = 300;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out = ".";
};

int cmd_replicate_table(const TableArgs& a) {
  struct Block {
    std::string name;
    SimulationScenario scenario;
  };
  std::vector<Block> blocks;
  std::vector<Method> methods{Method::yd, Method::yd_r, Method::sbh, Method::sn,
                              Method::bh};
  const std::vector<double> betas{0.05, 0.10, 0.15};
  try {
    if (a.table == "1") {
      for (double nu : {0.2, 0.3}) blocks.push_back({"normal", table1_normal_scenario(nu)});
      for (double nu : {0.2, 0.3}) blocks.push_back({"lognormal", table1_lognormal_scenario(nu)});
    } else if (a.table == "2") {
      for (double nu : {0.2, 0.3}) blocks.push_back({"garch_arma", table2_scenario(nu)});
    } else if (a.table == "figure1") {
      for (double nu : {0.1, 0.15, 0.2, 0.25, 0.3}) {
        blocks.push_back({"heterogeneous", figure1_scenario(nu)});
      }
    } else {
      throw ConfigError("unknown table '" + a.table + "' (expected 1, 2 or figure1)");
    }
    if (a.reps < 1 || a.reps > 1000) throw ConfigError("--reps must lie in [1, 1000]");
    prepare_dir(a.out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  StudyOptions options;
  options.methods = methods;
  options.betas = betas;
  options.replications = a.reps;
  options.threads = a.threads > 0
                        ? a.threads
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  const bool figure = a.table == "figure1";
  std::string csv =
      figure ? "nu,method,beta,mean_fdr,sd_fdr,mean_power,sd_power,replications\n"
             : "block,nu,method,beta,mean_fdr,sd_fdr,mean_power,sd_power,"
               "replications,ref_fdr,ref_power\n";
  std::ostringstream text;
  text << "Empirical FDR and power (%), " << a.reps << " replications\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-11s %-5s %-6s | %-23s | %-23s | %-23s | %-23s\n",
                "block", "nu", "method", "FDR b=5/10/15", "ref FDR", "power b=5/10/15",
                "ref power");
  text << line;
  for (auto& b : blocks) {
    if (a.seed) b.scenario.seed = *a.seed;
    const StudyResult result = run_study(b.scenario, options);
    for (const Method m : methods) {
      const std::string label = method_label(m);
      std::vector<const MetricsReport*> rows;
      for (const auto& r : result.reports) {
        if (r.method == label) rows.push_back(&r);
      }
      const ReferenceRow* ref = reference_row(a.table, b.name, b.scenario.nu, label);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& r = *rows[k];
        if (figure) {
          csv += fmt(b.scenario.nu, 2) + "," + label + "," + fmt(r.beta, 2) + "," +
                 fmt(r.mean_fdr, 4) + "," + fmt(r.sd_fdr, 4) + "," +
                 fmt(r.mean_power, 4) + "," + fmt(r.sd_power, 4) + "," +
                 std::to_string(r.replications) + "\n";
        } else {
          csv += b.name + "," + fmt(b.scenario.nu, 2) + "," + label + "," +
                 fmt(r.beta, 2) + "," + fmt(r.mean_fdr, 4) + "," + fmt(r.sd_fdr, 4) +
                 "," + fmt(r.mean_power, 4) + "," + fmt(r.sd_power, 4) + "," +
                 std::to_string(r.replications) + "," +
                 (ref ? fmt(ref->fdr[k], 2) : "") + "," +
                 (ref ? fmt(ref->power[k], 2) : "") + "\n";
        }
      }
      auto triple = [&](auto get) {
        std::string s;
        for (std::size_t k = 0; k < rows.size(); ++k) {
          if (k) s += " ";
          s += fmt(get(*rows[k], k), 2);
        }
        return s;
      };
      const std::string fdr = triple([](const MetricsReport& r, std::size_t) { return r.mean_fdr; });
      const std::string pow = triple([](const MetricsReport& r, std::size_t) { return r.mean_power; });
      std::string pf = "-", pp = "-";
      if (ref) {
        pf = fmt(ref->fdr[0], 2) + " " + fmt(ref->fdr[1], 2) + " " + fmt(ref->fdr[2], 2);
        pp = fmt(ref->power[0], 2) + " " + fmt(ref->power[1], 2) + " " +
             fmt(ref->power[2], 2);
      }
      std::snprintf(line, sizeof line, "%-11s %-5s %-6s | %-23s | %-23s | %-23s | %-23s\n",
                    b.name.c_str(), fmt(b.scenario.nu, 2).c_str(), label.c_str(),
                    fdr.c_str(), pf.c_str(), pow.c_str(), pp.c_str());
      text << line;
    }
  }
  const std::string stem = figure ? "figure1" : "table" + a.table;
  write_text_file(in_dir(a.out, stem + ".csv"), csv);
  if (!figure) write_text_file(in_dir(a.out, stem + ".txt"), text.str());
  std::cout << (figure ? csv : text.str());
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"FDR-controlled alpha screening under factor models"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo FDR/power study");
  simulate->add_option("--scenario", sim.scenario,
                       "Scenario JSON file or built-in name (table1_normal, "
                       "table1_lognormal, table2, figure1, dense_alpha)")
      ->required()
      ->envname("ALPHASCREEN_SCENARIO");
  simulate->add_option("--method", sim.methods, "Comma list of yd,yd_r,yd_th,bh,sbh,sn")
      ->envname("ALPHASCREEN_METHOD")
      ->capture_default_str();
  simulate->add_option("--beta", sim.betas, "Comma list of FDR levels")
      ->envname("ALPHASCREEN_BETA")
      ->capture_default_str();
  simulate->add_option("--rank", sim.rank, "Latent rank (default: eigenvalue ratio)")
      ->envname("ALPHASCREEN_RANK");
  simulate->add_option("--reps", sim.reps, "Replications")
      ->envname("ALPHASCREEN_REPS")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Base seed (overrides the scenario's)")
      ->envname("ALPHASCREEN_SEED");
  simulate->add_option("--nu", sim.nu, "Signal magnitude (overrides the scenario's)");
  simulate->add_option("--gamma-scale", sim.gamma_scale,
                       "Negative-control threshold constant c in c log(n)/sqrt(n)")
      ->capture_default_str();
  simulate->add_option("--threads", sim.threads, "Worker threads (0: all cores)")
      ->envname("ALPHASCREEN_THREADS");
  simulate->add_option("--out", sim.out, "Output directory")
      ->envname("ALPHASCREEN_OUT")
      ->capture_default_str();
  simulate->add_flag("--dump-panel", sim.dump_panel,
                     "Also write the first replication's panel as CSV");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Screen alphas of a return panel");
  analyze->add_option("--returns", an.returns, "Returns CSV (entity rows)")
      ->required()
      ->envname("ALPHASCREEN_RETURNS");
  analyze->add_option("--factors", an.factors, "Observed factors CSV (period rows)")
      ->required()
      ->envname("ALPHASCREEN_FACTORS");
  analyze->add_option("--method", an.method, "yd, yd_r, yd_th, bh, sbh or sn")
      ->envname("ALPHASCREEN_METHOD")
      ->capture_default_str();
  analyze->add_option("--beta", an.beta, "FDR level")
      ->envname("ALPHASCREEN_BETA")
      ->capture_default_str();
  analyze->add_option("--rank", an.rank, "Latent rank (default: eigenvalue ratio)")
      ->envname("ALPHASCREEN_RANK");
  analyze->add_option("--gamma-scale", an.gamma_scale,
                      "Negative-control threshold constant c in c log(n)/sqrt(n)")
      ->capture_default_str();
  analyze->add_option("--out", an.out, "Output directory")
      ->envname("ALPHASCREEN_OUT")
      ->capture_default_str();

  TableArgs tab;
  auto* table = app.add_subcommand("replicate-table", "Reproduce a simulation table");
  table->add_option("--table", tab.table, "1, 2 or figure1")->required();
  table->add_option("--reps", tab.reps, "Replications (at most 1000)")
      ->envname("ALPHASCREEN_REPS")
      ->capture_default_str();
  table->add_option("--seed", tab.seed, "Base seed")->envname("ALPHASCREEN_SEED");
  table->add_option("--threads", tab.threads, "Worker threads (0: all cores)")
      ->envname("ALPHASCREEN_THREADS");
  table->add_option("--out", tab.out, "Output directory")
      ->envname("ALPHASCREEN_OUT")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*analyze) return cmd_analyze(an);
    return cmd_replicate_table(tab);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"alphascreen"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace alphascreen
