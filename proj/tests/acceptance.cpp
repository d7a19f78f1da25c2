// Acceptance run: one PASS/FAIL line per criterion, INFO lines for context.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "alphascreen/study.hpp"

using namespace alphascreen;

namespace {

int failures = 0;

void verdict(int id, bool pass, const std::string& detail) {
  std::printf("CRITERION %d %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void info(const std::string& line) {
  std::printf("INFO %s\n", line.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int worker_count() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

const MetricsReport& find(const StudyResult& r, const std::string& method, double beta) {
  for (const auto& rep : r.reports) {
    if (rep.method == method && std::abs(rep.beta - beta) < 1e-12) return rep;
  }
  throw std::runtime_error("missing report row " + method);
}

StudyResult study(const SimulationScenario& s, std::vector<Method> methods,
                  std::vector<double> betas, int reps) {
  StudyOptions o;
  o.methods = std::move(methods);
  o.betas = std::move(betas);
  o.replications = reps;
  o.threads = worker_count();
  const StudyResult r = run_study(s, o);
  for (const auto& rep : r.reports) {
    info(s.name + " " + rep.method + " beta=" + fmt("%.2f", rep.beta) +
         " FDR=" + fmt("%.2f", rep.mean_fdr) + "(" + fmt("%.2f", rep.sd_fdr) + ")" +
         " power=" + fmt("%.2f", rep.mean_power) + "(" + fmt("%.2f", rep.sd_power) + ")" +
         " reps=" + std::to_string(rep.replications) +
         " failures=" + std::to_string(rep.failures));
  }
  return r;
}

const std::vector<double> kBetas{0.05, 0.10, 0.15};

void criterion_table1_normal() {
  const StudyResult r =
      study(table1_normal_scenario(0.3), {Method::yd, Method::sbh, Method::sn}, kBetas, 300);
  const double fdr_ref[] = {4.18, 9.05, 14.14};
  const double pow_ref[] = {92.95, 96.27, 97.51};
  bool pass = r.failures == 0;
  std::string detail;
  for (int k = 0; k < 3; ++k) {
    const auto& rep = find(r, "yd", kBetas[k]);
    pass = pass && std::abs(rep.mean_fdr - fdr_ref[k]) <= 2.0 &&
           std::abs(rep.mean_power - pow_ref[k]) <= 3.0;
    detail += "beta=" + fmt("%.2f", kBetas[k]) + " FDR " + fmt("%.2f", rep.mean_fdr) +
              " (ref " + fmt("%.2f", fdr_ref[k]) + "+-2) power " +
              fmt("%.2f", rep.mean_power) + " (ref " + fmt("%.2f", pow_ref[k]) + "+-3); ";
  }
  verdict(1, pass, detail);
  info("SBH FDR at 5%: " + fmt("%.2f", find(r, "sbh", 0.05).mean_fdr) + " (ref 7.42)");
  info("SN power at 5%: " + fmt("%.2f", find(r, "sn", 0.05).mean_power) +
       " (ref 58.67), YD power " + fmt("%.2f", find(r, "yd", 0.05).mean_power));
}

void criterion_table1_lognormal() {
  const StudyResult r =
      study(table1_lognormal_scenario(0.3), {Method::yd, Method::sbh}, kBetas, 300);
  const double fdr_ref[] = {4.60, 9.23, 14.24};
  bool pass = r.failures == 0;
  std::string detail;
  for (int k = 0; k < 3; ++k) {
    const auto& rep = find(r, "yd", kBetas[k]);
    pass = pass && std::abs(rep.mean_fdr - fdr_ref[k]) <= 2.0;
    detail += "YD FDR " + fmt("%.2f", rep.mean_fdr) + " (ref " + fmt("%.2f", fdr_ref[k]) +
              "+-2); ";
  }
  const double sbh = find(r, "sbh", 0.05).mean_fdr;
  pass = pass && sbh >= 5.0 + 4.0;
  detail += "SBH FDR at 5% " + fmt("%.2f", sbh) + " (need >= 9)";
  verdict(2, pass, detail);
}

void criterion_table2() {
  const StudyResult r = study(table2_scenario(0.3), {Method::yd, Method::sbh}, kBetas, 300);
  const auto& yd = find(r, "yd", 0.05);
  const double sbh = find(r, "sbh", 0.05).mean_fdr;
  const bool pass =
      r.failures == 0 && yd.mean_fdr <= 7.5 && yd.mean_power >= 84.0 && sbh >= 10.0;
  verdict(3, pass,
          "YD FDR " + fmt("%.2f", yd.mean_fdr) + " (need <= 7.5) power " +
              fmt("%.2f", yd.mean_power) + " (need >= 84); SBH FDR " + fmt("%.2f", sbh) +
              " (need >= 10)");
}

void criterion_heterogeneous() {
  const StudyResult r = study(figure1_scenario(0.2), {Method::yd, Method::yd_r}, {0.10}, 300);
  const auto& yd = find(r, "yd", 0.10);
  const auto& ydr = find(r, "yd_r", 0.10);
  const double gain = ydr.mean_power - yd.mean_power;
  const bool pass = r.failures == 0 && gain >= 10.0 && ydr.mean_fdr <= 13.0;
  verdict(4, pass,
          "YD power " + fmt("%.2f", yd.mean_power) + ", YD_R power " +
              fmt("%.2f", ydr.mean_power) + " (gain " + fmt("%.2f", gain) +
              ", need >= 10); YD_R FDR " + fmt("%.2f", ydr.mean_fdr) + " (need <= 13)");
}

// Rejection set of the smallest grid point k * max / points meeting the
// criterion, counting through sorted magnitudes.
IndexSet grid_scan(const Vector& t, double beta, int points) {
  std::vector<double> pos, neg;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t(i) > 0) pos.push_back(t(i));
    if (t(i) < 0) neg.push_back(-t(i));
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  const double top = t.cwiseAbs().maxCoeff();
  std::size_t ip = 0, in = 0;
  for (int k = 1; k <= points; ++k) {
    const double xi = top * k / points;
    while (ip < pos.size() && pos[ip] < xi) ++ip;
    while (in < neg.size() && neg[in] < xi) ++in;
    const double n_pos = static_cast<double>(pos.size() - ip);
    const double n_neg = static_cast<double>(neg.size() - in);
    if ((1.0 + n_neg) / std::max(n_pos, 1.0) <= beta) {
      IndexSet out;
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        if (t(i) >= xi) out.push_back(static_cast<int>(i));
      }
      return out;
    }
  }
  return {};
}

void criterion_threshold_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240501);
  std::normal_distribution<double> z;
  std::bernoulli_distribution signal(0.2);
  std::uniform_real_distribution<double> level(0.02, 0.3);
  int agree = 0, finite = 0;
  const int vectors = 1000, p = 500;
  for (int v = 0; v < vectors; ++v) {
    // Statistics on a 0.01 lattice, |t| <= 1000: every gap between distinct
    // magnitudes holds at least one of the 10^5 grid points.
    Vector t(p);
    for (int i = 0; i < p; ++i) {
      const double raw = signal(rng) ? (3.0 + z(rng)) * (3.0 + z(rng)) * 4.0
                                     : z(rng) * z(rng) * 4.0;
      t(i) = std::round(std::clamp(raw, -1000.0, 1000.0) * 100.0) / 100.0;
    }
    const double beta = level(rng);
    const ThresholdDecision d = select_threshold(t, beta);
    finite += std::isfinite(d.threshold);
    agree += d.rejected == grid_scan(t, beta, 100000);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  verdict(5, agree == vectors && secs <= 30.0,
          std::to_string(agree) + "/" + std::to_string(vectors) +
              " rejection sets equal to the grid scan (" + std::to_string(finite) +
              " with finite threshold), " + fmt("%.1f", secs) + " s");
}

void criterion_null_symmetry() {
  const SimulationScenario s = table1_normal_scenario(0.0);
  const int reps = 100;
  std::vector<std::vector<double>> per(reps);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < reps; i = next++) {
      Rng rng(replication_seed(s.seed, static_cast<std::uint64_t>(i)));
      const GeneratedPanel g = generate_panel(s, rng);
      const SplitTestResult r = split_statistics(g.returns, g.observed_factors);
      per[static_cast<std::size_t>(i)].assign(r.t_prod.data(), r.t_prod.data() + r.t_prod.size());
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < worker_count(); ++k) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  std::vector<double> pos, neg, mags;
  for (const auto& v : per) {
    for (const double t : v) {
      if (t > 0) pos.push_back(t);
      if (t < 0) neg.push_back(-t);
      mags.push_back(std::abs(t));
    }
  }
  const double frac = static_cast<double>(pos.size()) / static_cast<double>(mags.size());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::sort(mags.begin(), mags.end());
  const double q99 = mags[static_cast<std::size_t>(0.99 * static_cast<double>(mags.size()))];
  double sup = 0.0;
  for (const double x : mags) {
    if (x == 0.0) continue;
    if (x > q99) break;
    const auto n_pos = pos.end() - std::lower_bound(pos.begin(), pos.end(), x);
    const auto n_neg = neg.end() - std::lower_bound(neg.begin(), neg.end(), x);
    if (n_neg == 0) continue;
    sup = std::max(sup, std::abs(static_cast<double>(n_pos) / static_cast<double>(n_neg) - 1.0));
  }
  verdict(6, frac >= 0.45 && frac <= 0.55 && sup < 0.15,
          "positive fraction " + fmt("%.4f", frac) + " (need [0.45, 0.55]), sup ratio deviation " +
              fmt("%.4f", sup) + " below q99=" + fmt("%.2f", q99) + " (need < 0.15)");
}

void criterion_variance_oracle() {
  SimulationScenario s = table1_normal_scenario(0.3);
  s.name = "theorem1";
  s.factor_mean = (Vector(7) << 0.6, 0.3, 0.2, 0.5, 0.4, 0.3, 0.2).finished();
  const int reps = 500;
  std::vector<Vector> scaled(reps);
  Vector target;
  std::atomic<int> next{0};
  std::mutex target_mutex;
  auto work = [&] {
    for (int i = next++; i < reps; i = next++) {
      Rng rng(replication_seed(s.seed, static_cast<std::uint64_t>(i)));
      const GeneratedPanel g = generate_panel(s, rng);
      const AlphaFit fit = estimate_alpha(g.returns, g.observed_factors);
      scaled[static_cast<std::size_t>(i)] = std::sqrt(static_cast<double>(s.n)) *
                                            (fit.alpha - g.oracle.alpha);
      std::lock_guard<std::mutex> lock(target_mutex);
      if (target.size() == 0) target = g.oracle.iid_asymptotic_variance().cwiseSqrt();
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < worker_count(); ++k) pool.emplace_back(work);
  for (auto& th : pool) th.join();

  Vector mean = Vector::Zero(s.p), sq = Vector::Zero(s.p);
  for (const auto& v : scaled) {
    mean += v;
    sq += v.cwiseProduct(v);
  }
  mean /= reps;
  const Vector sd = ((sq / reps - mean.cwiseProduct(mean)) * reps / (reps - 1.0)).cwiseSqrt();
  int within = 0;
  for (int i = 0; i < s.p; ++i) within += std::abs(sd(i) / target(i) - 1.0) <= 0.10;
  const double share = static_cast<double>(within) / s.p;
  info("variance inflation " + fmt("%.4f", target(0) * target(0)) + ", median sd ratio " +
       fmt("%.4f", [&] {
         std::vector<double> r(static_cast<std::size_t>(s.p));
         for (int i = 0; i < s.p; ++i) r[static_cast<std::size_t>(i)] = sd(i) / target(i);
         std::nth_element(r.begin(), r.begin() + s.p / 2, r.end());
         return r[static_cast<std::size_t>(s.p / 2)];
       }()));
  verdict(7, share >= 0.90,
          fmt("%.1f", 100.0 * share) + "% of entities within 10% of the closed-form sd (need >= 90%)");
}

void criterion_rank() {
  SimulationScenario s = table1_normal_scenario(0.3);
  s.name = "rank2";
  s.r_total = 5;
  s.r_observed = 3;
  s.factor_cov = s.factor_cov.topLeftCorner(5, 5).eval();
  s.loading_mean = s.loading_mean.head(5).eval();
  s.loading_cov = s.loading_cov.topLeftCorner(5, 5).eval();
  const int reps = 200;
  std::atomic<int> next{0}, correct{0};
  auto work = [&] {
    for (int i = next++; i < reps; i = next++) {
      Rng rng(replication_seed(s.seed, static_cast<std::uint64_t>(i)));
      const GeneratedPanel g = generate_panel(s, rng);
      const AlphaFit fit = estimate_alpha(g.returns, g.observed_factors);
      if (fit.latent.rank == 2) ++correct;
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < worker_count(); ++k) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  verdict(8, correct >= 190,
          std::to_string(correct.load()) + "/200 replications chose rank 2 (need >= 95%)");
}

void criterion_bh() {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  const int reps = 1000, m = 1000, signals = 100;
  double fdp = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    Vector p(m);
    for (int i = 0; i < m; ++i) {
      p(i) = i < signals ? normal_two_sided_p(3.0 + z(rng)) : u(rng);
    }
    const IndexSet r = bh_procedure(p, 0.1);
    int v = 0;
    for (const int i : r) v += i >= signals;
    fdp += static_cast<double>(v) / static_cast<double>(std::max<std::size_t>(r.size(), 1));
  }
  const double fdr = fdp / reps;
  verdict(9, fdr <= 0.1 + 0.01,
          "empirical FDR " + fmt("%.4f", fdr) + " at beta=0.1 with 900 uniform nulls (need <= 0.11)");
}

void criterion_negative_control() {
  const StudyResult r =
      study(dense_alpha_scenario(), {Method::yd, Method::yd_th}, {0.10}, 200);
  const double yd = find(r, "yd", 0.10).mean_fdr;
  const double th = find(r, "yd_th", 0.10).mean_fdr;
  verdict(10, r.failures == 0 && yd > 13.0 && th <= 12.0,
          "YD FDR " + fmt("%.2f", yd) + " (need > 13), YD_TH FDR " + fmt("%.2f", th) +
              " (need <= 12)");
}

void criterion_determinism() {
  SimulationScenario s = table2_scenario(0.3);
  StudyOptions o;
  o.methods = {Method::yd, Method::yd_r, Method::yd_th, Method::bh, Method::sbh, Method::sn};
  o.replications = 12;
  std::vector<std::string> reports, reps;
  for (const int threads : {1, 2, 4, 7}) {
    o.threads = threads;
    const StudyResult r = run_study(s, o);
    reports.push_back(report_csv(r.reports));
    reps.push_back(replications_csv(r));
  }
  bool same = true;
  for (std::size_t k = 1; k < reports.size(); ++k) {
    same = same && reports[k] == reports[0] && reps[k] == reps[0];
  }
  verdict(11, same, "report and replication CSVs byte-identical across 1, 2, 4 and 7 threads");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  info("worker threads: " + std::to_string(worker_count()));
  criterion_table1_normal();
  criterion_table1_lognormal();
  criterion_table2();
  criterion_heterogeneous();
  criterion_threshold_oracle();
  criterion_null_symmetry();
  criterion_variance_oracle();
  criterion_rank();
  criterion_bh();
  criterion_negative_control();
  criterion_determinism();
  info("total runtime " +
       fmt("%.1f", std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                       .count()) +
       " s, " + std::to_string(failures) + " criteria failed");
  return failures == 0 ? 0 : 1;
}
