#pragma once

#include <limits>
#include <utility>

#include "alphascreen/factor_estimation.hpp"

namespace alphascreen {

// Per-entity split statistics and the decision taken from them.
struct SplitTestResult {
  Vector t1;      // sqrt(n) * alpha_hat on the first half
  Vector t2;      // sqrt(n) * alpha_hat on the second half
  Vector t_prod;  // t1 .* t2
  double threshold = std::numeric_limits<double>::infinity();
  IndexSet rejected;
  double beta = 0.0;
  bool studentized = false;
  int rank1 = 0;  // latent rank chosen on each half
  int rank2 = 0;
};

struct FdrMetrics {
  double fdp = 0.0;
  double power = 0.0;
  int v_count = 0;
  int r_count = 0;
};

struct NegativeControlConfig {
  enum class Mode { explicit_set, threshold_rule };
  Mode mode = Mode::threshold_rule;
  IndexSet explicit_indices;
  // gamma_n = gamma_scale * log(n) / sqrt(n)
  double gamma_scale = 1.0;
  // n in gamma_n; 0 means the length of the fitted panel. The split
  // procedure sets it to the full-sample length.
  Eigen::Index sample_size = 0;
};

struct SplitOptions {
  std::optional<int> rank;
  int max_rank = 10;
  bool studentize = false;
  std::optional<double> bandwidth;  // per half; defaults to half_length^(1/5)
  // When set, each half's alpha is replaced by the negative-control
  // corrected estimate.
  std::optional<NegativeControlConfig> negative_control;
  // Estimate the two halves on separate threads.
  bool concurrent = false;
};

using HalfPanels = std::pair<ReturnPanel, FactorPanel>;

// First floor(n/2) periods, then the remainder.
std::pair<HalfPanels, HalfPanels> chronological_split(
    const ReturnPanel& returns, const FactorPanel& factors);

// Alpha fits of the two chronological halves, n the full length.
struct SplitFits {
  AlphaFit first;
  AlphaFit second;
  Eigen::Index n = 0;
};

SplitFits fit_halves(const Matrix& x, const Matrix& f,
                     const EstimationOptions& options, bool concurrent = false);

// Statistics from precomputed half fits (threshold not yet applied).
// Studentizing needs fits carrying long-run variances.
SplitTestResult split_from_fits(
    const SplitFits& fits, bool studentize,
    const std::optional<NegativeControlConfig>& negative_control = std::nullopt);

SplitTestResult split_statistics(const ReturnPanel& returns,
                                 const FactorPanel& factors,
                                 const SplitOptions& options = {});
SplitTestResult split_statistics(const Matrix& x, const Matrix& f,
                                 const SplitOptions& options = {});

struct ThresholdDecision {
  double threshold = std::numeric_limits<double>::infinity();
  IndexSet rejected;
};

// Smallest observed |T_i| (T_i != 0) at which
//   (1 + #{T <= -xi}) / max(#{T >= xi}, 1) <= beta,
// or +infinity with no rejections when none qualifies.
ThresholdDecision select_threshold(const Vector& t_prod, double beta);

// Fills threshold/rejected/beta of a result from its t_prod.
void apply_threshold(SplitTestResult& result, double beta);

double negative_control_gamma(Eigen::Index n, double gamma_scale);

// Alpha estimate corrected with a negative-control set S:
//   premium = (B_S^T B_S)^{-1} B_S^T a_S,   alpha_new = a - B premium,
// a being the time-averaged adjusted returns. The fit supplies B and a.
Vector negative_control_alpha(const AlphaFit& fit,
                              const NegativeControlConfig& config);
Vector negative_control_alpha(const ReturnPanel& returns,
                              const FactorPanel& factors,
                              const NegativeControlConfig& config,
                              std::optional<int> rank = std::nullopt);

// The negative-control set implied by a fit and a configuration.
IndexSet negative_control_set(const AlphaFit& fit,
                              const NegativeControlConfig& config);

FdrMetrics evaluate(const IndexSet& rejected, const IndexSet& truth,
                    Eigen::Index p);
FdrMetrics evaluate(const SplitTestResult& result, const IndexSet& truth);

}  // namespace alphascreen
