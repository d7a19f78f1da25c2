#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "alphascreen/factor_estimation.hpp"

namespace alphascreen {

enum class PValueMethod { bh_plain, sbh_normal, sn_calibrated };

struct PValueResult {
  Vector p_values;
  Vector statistics;
  Vector alpha;  // the alpha estimate the statistics are built from
  PValueMethod method = PValueMethod::bh_plain;
  int rank = 0;  // latent rank used (0 for bh_plain)
};

// Benjamini-Hochberg step-up: rejects the k smallest p-values, k being the
// largest index with p_(k) <= k * beta / p.
IndexSet bh_procedure(const Vector& p_values, double beta);

// Two-sided normal tail probability 2 * (1 - Phi(|z|)).
double normal_two_sided_p(double z);

// Naive baseline: t-tests on time-series OLS intercepts against the observed
// factors only, normal calibration.
PValueResult ols_statistics(const ReturnPanel& returns,
                            const FactorPanel& factors);
PValueResult ols_statistics(const Matrix& x, const Matrix& f);

struct SbhOptions {
  std::optional<int> rank;
  int max_rank = 10;
  // Use the kernel long-run variance of the residuals instead of their
  // sample variance.
  bool hac = false;
};

// z_i = sqrt(n) alpha_i / (sd_i * sqrt(inflation)), normal calibration.
PValueResult sbh_statistics(const ReturnPanel& returns,
                            const FactorPanel& factors,
                            const SbhOptions& options = {});
PValueResult sbh_statistics(const Matrix& x, const Matrix& f,
                            const SbhOptions& options = {});

// Plug-in variance inflation 1 + g' S_g^{-1} g + m' S_F^{-1} m from a fit:
// g the estimated latent premia, S_g the covariance of the estimated latent
// factor series, m and S_F the sample mean and covariance of the observed
// factors.
double premia_inflation(const AlphaFit& fit, const Matrix& f);

// SBH statistic from its ingredients: residual_scale is the per-entity
// variance estimate of the residual rows.
PValueResult sbh_from_components(const Vector& alpha,
                                 const Vector& residual_scale,
                                 double inflation, Eigen::Index n);

// Self-normalized statistic n * alpha^2 / V_n for one series whose mean is
// alpha and whose centered fluctuations are `residual`;
// V_n = n^{-2} sum_t S_t^2, S_t the partial sums of `residual`.
// Throws Error when V_n vanishes.
double sn_statistic(double alpha, const Eigen::Ref<const Eigen::RowVectorXd>& residual);

// Monte-Carlo law of W(1)^2 / int_0^1 (W(r) - r W(1))^2 dr for a standard
// Brownian motion W, simulated once per (paths, grid, seed) and cached.
class SnLimitLaw {
 public:
  static constexpr int kDefaultPaths = 50000;
  static constexpr int kGrid = 1000;
  static constexpr std::uint64_t kDefaultSeed = 0x5eed5a11ULL;

  static std::shared_ptr<const SnLimitLaw> get(
      int paths = kDefaultPaths, int grid = kGrid,
      std::uint64_t seed = kDefaultSeed);

  // (1 + #{U >= s}) / (1 + paths)
  double upper_tail(double s) const;
  double quantile(double q) const;
  const std::vector<double>& sorted_draws() const noexcept { return draws_; }

  SnLimitLaw(int paths, int grid, std::uint64_t seed);

 private:
  std::vector<double> draws_;
};

struct SnOptions {
  std::optional<int> rank;
  int max_rank = 10;
  int mc_paths = SnLimitLaw::kDefaultPaths;
};

PValueResult sn_statistics(const ReturnPanel& returns,
                           const FactorPanel& factors,
                           const SnOptions& options = {});
PValueResult sn_statistics(const Matrix& x, const Matrix& f,
                           const SnOptions& options = {});
// From an existing full-sample fit.
PValueResult sn_from_fit(const AlphaFit& fit, int mc_paths);
PValueResult sbh_from_fit(const AlphaFit& fit, const Matrix& f, bool hac);

}  // namespace alphascreen
