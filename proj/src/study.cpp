#include "alphascreen/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace alphascreen {

std::string method_label(Method m) {
  switch (m) {
    case Method::yd: return "yd";
    case Method::yd_r: return "yd_r";
    case Method::yd_th: return "yd_th";
    case Method::bh: return "bh";
    case Method::sbh: return "sbh";
    case Method::sn: return "sn";
  }
  return "yd";
}

Method parse_method(const std::string& label) {
  for (Method m : {Method::yd, Method::yd_r, Method::yd_th, Method::bh,
                   Method::sbh, Method::sn}) {
    if (label == method_label(m)) return m;
  }
  throw ConfigError("unknown method '" + label +
                    "' (expected yd, yd_r, yd_th, bh, sbh or sn)");
}

std::vector<Method> parse_methods(const std::string& comma_list) {
  std::vector<Method> out;
  std::stringstream in(comma_list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const Method m = parse_method(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw ConfigError("no method given");
  return out;
}

namespace {

bool is_split(Method m) {
  return m == Method::yd || m == Method::yd_r || m == Method::yd_th;
}

Selection from_split(Method m, double beta, SplitTestResult split,
                     const Vector& alpha) {
  apply_threshold(split, beta);
  Selection s;
  s.method = m;
  s.beta = beta;
  s.alpha_hat = alpha;
  s.statistic = split.t_prod;
  s.rejected = split.rejected;
  s.threshold = split.threshold;
  s.rank = split.rank1;
  s.split = std::move(split);
  return s;
}

Selection from_p_values(Method m, double beta, const PValueResult& r) {
  Selection s;
  s.method = m;
  s.beta = beta;
  s.alpha_hat = r.alpha;
  s.statistic = r.statistics;
  s.p_values = r.p_values;
  s.rejected = bh_procedure(r.p_values, beta);
  s.threshold = static_cast<double>(s.rejected.size()) * beta /
                static_cast<double>(r.p_values.size());
  s.rank = r.rank;
  return s;
}

}  // namespace

std::vector<Selection> run_methods(const Matrix& x, const Matrix& f,
                                   const std::vector<Method>& methods,
                                   const std::vector<double>& betas,
                                   const MethodSettings& settings) {
  for (const double beta : betas) {
    if (!(beta > 0.0 && beta < 1.0)) {
      throw ContractError("FDR level beta must lie in (0, 1)");
    }
  }
  const bool need_halves =
      std::any_of(methods.begin(), methods.end(), is_split);
  const bool need_lrv =
      std::find(methods.begin(), methods.end(), Method::yd_r) != methods.end();
  const bool need_full = std::any_of(methods.begin(), methods.end(), [](Method m) {
    return m == Method::sbh || m == Method::sn;
  });

  EstimationOptions est;
  est.rank = settings.rank;
  est.max_rank = settings.max_rank;

  std::optional<SplitFits> halves;
  if (need_halves) {
    EstimationOptions half_est = est;
    half_est.long_run_variance = need_lrv;
    halves = fit_halves(x, f, half_est);
  }
  std::optional<AlphaFit> full;
  if (need_full) {
    EstimationOptions full_est = est;
    full_est.long_run_variance = settings.sbh_hac;
    full = estimate_alpha(x, f, full_est);
  }

  std::vector<Selection> out;
  for (const Method m : methods) {
    if (is_split(m)) {
      std::optional<NegativeControlConfig> control;
      if (m == Method::yd_th) {
        NegativeControlConfig cfg;
        cfg.gamma_scale = settings.gamma_scale;
        cfg.sample_size = x.cols();
        control = cfg;
      }
      const SplitTestResult split =
          split_from_fits(*halves, m == Method::yd_r, control);
      // Reported alpha: average of the two half estimates behind t.
      const Vector alpha = (control ? (negative_control_alpha(halves->first, *control) +
                                       negative_control_alpha(halves->second, *control))
                                    : Vector(halves->first.alpha + halves->second.alpha)) /
                           2.0;
      for (const double beta : betas) out.push_back(from_split(m, beta, split, alpha));
      continue;
    }
    PValueResult r;
    if (m == Method::bh) {
      r = ols_statistics(x, f);
    } else if (m == Method::sbh) {
      r = sbh_from_fit(*full, f, settings.sbh_hac);
    } else {
      r = sn_from_fit(*full, settings.sn_paths);
    }
    for (const double beta : betas) out.push_back(from_p_values(m, beta, r));
  }
  return out;
}

Selection run_method(const ReturnPanel& returns, const FactorPanel& factors,
                     Method method, double beta,
                     const MethodSettings& settings) {
  require_aligned(returns, factors);
  if (is_split(method)) (void)chronological_split(returns, factors);
  return run_methods(returns.values(), factors.values(), {method}, {beta},
                     settings)
      .front();
}

std::uint64_t replication_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 step at position index + 1 of the stream seeded by base.
  std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::vector<ReplicationRecord> one_replication(const SimulationScenario& scenario,
                                               const StudyOptions& options,
                                               int index) {
  std::vector<ReplicationRecord> out;
  auto push_failure = [&](Method m, const std::string& what) {
    for (const double beta : options.betas) {
      ReplicationRecord rec;
      rec.replication = index;
      rec.method = m;
      rec.beta = beta;
      rec.failed = true;
      rec.error = what;
      out.push_back(rec);
    }
  };
  Rng rng(replication_seed(scenario.seed, static_cast<std::uint64_t>(index)));
  GeneratedPanel g;
  try {
    g = generate_panel(scenario, rng);
  } catch (const std::exception& e) {
    for (const Method m : options.methods) push_failure(m, e.what());
    return out;
  }
  const Matrix& x = g.returns.values();
  const Matrix& f = g.observed_factors.values();
  const Eigen::Index p = x.rows();

  // Methods sharing fits run together; a failure falls back to running the
  // methods one at a time so that only the failing ones are lost.
  std::vector<Selection> selections;
  try {
    selections = run_methods(x, f, options.methods, options.betas, options.settings);
  } catch (const std::exception&) {
    selections.clear();
    for (const Method m : options.methods) {
      try {
        auto part = run_methods(x, f, {m}, options.betas, options.settings);
        selections.insert(selections.end(), part.begin(), part.end());
      } catch (const std::exception& e) {
        push_failure(m, e.what());
      }
    }
  }
  for (const auto& s : selections) {
    const FdrMetrics m = evaluate(s.rejected, g.truth, p);
    ReplicationRecord rec;
    rec.replication = index;
    rec.method = s.method;
    rec.beta = s.beta;
    rec.fdp = m.fdp;
    rec.power = m.power;
    out.push_back(rec);
  }
  // Canonical order: methods as requested, then betas.
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    const auto pos = [&](Method m) {
      return std::find(options.methods.begin(), options.methods.end(), m) -
             options.methods.begin();
    };
    if (pos(a.method) != pos(b.method)) return pos(a.method) < pos(b.method);
    return std::find(options.betas.begin(), options.betas.end(), a.beta) <
           std::find(options.betas.begin(), options.betas.end(), b.beta);
  });
  return out;
}

}  // namespace

StudyResult run_study(const SimulationScenario& scenario,
                      const StudyOptions& options) {
  if (options.replications < 1) throw ConfigError("replications must be at least 1");
  if (options.methods.empty()) throw ConfigError("no method given");
  if (options.betas.empty()) throw ConfigError("no FDR level given");
  for (const double beta : options.betas) {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  }
  scenario.validate();
  const auto start = std::chrono::steady_clock::now();

  const int reps = options.replications;
  std::vector<std::vector<ReplicationRecord>> slots(static_cast<std::size_t>(reps));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < reps; i = next++) {
      slots[static_cast<std::size_t>(i)] = one_replication(scenario, options, i);
    }
  };
  const int threads = std::max(1, std::min(options.threads, reps));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  StudyResult result;
  result.nu = scenario.nu;
  for (auto& slot : slots) {
    result.records.insert(result.records.end(), slot.begin(), slot.end());
  }
  result.runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const Method m : options.methods) {
    for (const double beta : options.betas) {
      MetricsReport rep;
      rep.method = method_label(m);
      rep.beta = beta;
      double sum_f = 0.0, sum_p = 0.0;
      std::vector<double> fdrs, powers;
      for (const auto& rec : result.records) {
        if (rec.method != m || rec.beta != beta) continue;
        if (rec.failed) {
          ++rep.failures;
          continue;
        }
        fdrs.push_back(100.0 * rec.fdp);
        powers.push_back(100.0 * rec.power);
        sum_f += fdrs.back();
        sum_p += powers.back();
      }
      rep.replications = static_cast<int>(fdrs.size());
      rep.runtime = result.runtime;
      if (!fdrs.empty()) {
        const double k = static_cast<double>(fdrs.size());
        rep.mean_fdr = sum_f / k;
        rep.mean_power = sum_p / k;
      }
      if (fdrs.size() >= 2) {
        double ss_f = 0.0, ss_p = 0.0;
        for (std::size_t i = 0; i < fdrs.size(); ++i) {
          ss_f += (fdrs[i] - rep.mean_fdr) * (fdrs[i] - rep.mean_fdr);
          ss_p += (powers[i] - rep.mean_power) * (powers[i] - rep.mean_power);
        }
        const double k1 = static_cast<double>(fdrs.size() - 1);
        rep.sd_fdr = std::sqrt(ss_f / k1);
        rep.sd_power = std::sqrt(ss_p / k1);
      } else {
        rep.sd_degenerate = true;
      }
      result.failures += rep.failures;
      result.reports.push_back(rep);
    }
  }
  return result;
}

namespace {

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string report_csv(const std::vector<MetricsReport>& reports) {
  std::string out = "method,beta,mean_fdr,sd_fdr,mean_power,sd_power,replications\n";
  for (const auto& r : reports) {
    out += r.method + "," + fmt(r.beta, 4) + "," + fmt(r.mean_fdr, 4) + "," +
           fmt(r.sd_fdr, 4) + "," + fmt(r.mean_power, 4) + "," +
           fmt(r.sd_power, 4) + "," + std::to_string(r.replications) + "\n";
  }
  return out;
}

std::string replications_csv(const StudyResult& result) {
  std::string out = "replication,method,beta,nu,fdp,power\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.replication) + "," + method_label(r.method) + "," +
           fmt(r.beta, 4) + "," + fmt(result.nu, 4) + ",";
    if (r.failed) {
      out += "NA,NA\n";
    } else {
      out += fmt(r.fdp, 6) + "," + fmt(r.power, 6) + "\n";
    }
  }
  return out;
}

}  // namespace alphascreen
