#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alphascreen/baselines.hpp"
#include "alphascreen/fdr_testing.hpp"
#include "alphascreen/simulation.hpp"

namespace alphascreen {

// yd: split statistics; yd_r: studentized by long-run variances; yd_th:
// negative-control corrected; bh: naive OLS t-tests + BH; sbh, sn: BH on
// factor-adjusted statistics.
enum class Method { yd, yd_r, yd_th, bh, sbh, sn };

std::string method_label(Method m);
// Accepts the lowercase labels; throws ConfigError otherwise.
Method parse_method(const std::string& label);
std::vector<Method> parse_methods(const std::string& comma_list);

struct MethodSettings {
  std::optional<int> rank;
  int max_rank = 10;
  double gamma_scale = 1.0;  // negative-control threshold rule
  int sn_paths = SnLimitLaw::kDefaultPaths;
  bool sbh_hac = false;
};

// One method's decision on one panel at one level.
struct Selection {
  Method method = Method::yd;
  double beta = 0.0;
  Vector alpha_hat;
  Vector statistic;        // t_prod for split methods, z / SN statistic otherwise
  Vector p_values;         // empty for split methods
  IndexSet rejected;
  double threshold = 0.0;  // L for split methods, p-value cutoff otherwise
  int rank = 0;
  std::optional<SplitTestResult> split;
};

// Runs every method at every level, sharing the half-sample and full-sample
// fits between methods. Order: methods outer, betas inner.
std::vector<Selection> run_methods(const Matrix& x, const Matrix& f,
                                   const std::vector<Method>& methods,
                                   const std::vector<double>& betas,
                                   const MethodSettings& settings = {});

Selection run_method(const ReturnPanel& returns, const FactorPanel& factors,
                     Method method, double beta,
                     const MethodSettings& settings = {});

struct StudyOptions {
  std::vector<Method> methods{Method::yd};
  std::vector<double> betas{0.05, 0.10, 0.15};
  int replications = 300;
  int threads = 1;
  MethodSettings settings;
};

struct ReplicationRecord {
  int replication = 0;
  Method method = Method::yd;
  double beta = 0.0;
  double fdp = 0.0;
  double power = 0.0;
  bool failed = false;
  std::string error;
};

struct MetricsReport {
  std::string method;
  double beta = 0.0;
  double mean_fdr = 0.0;    // percent
  double sd_fdr = 0.0;
  double mean_power = 0.0;
  double sd_power = 0.0;
  int replications = 0;     // successful replications aggregated
  int failures = 0;
  double runtime = 0.0;     // seconds for the whole study
  bool sd_degenerate = false;  // fewer than two replications
};

struct StudyResult {
  std::vector<MetricsReport> reports;
  std::vector<ReplicationRecord> records;  // replication-major order
  double nu = 0.0;
  int failures = 0;
  double runtime = 0.0;
};

// Seed of one replication's generator, independent of execution order.
std::uint64_t replication_seed(std::uint64_t base, std::uint64_t index);

StudyResult run_study(const SimulationScenario& scenario,
                      const StudyOptions& options);

// CSV renderings; deterministic for identical inputs.
std::string report_csv(const std::vector<MetricsReport>& reports);
std::string replications_csv(const StudyResult& result);

}  // namespace alphascreen
