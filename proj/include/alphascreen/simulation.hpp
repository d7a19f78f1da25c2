#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "alphascreen/panel.hpp"

namespace alphascreen {

using Rng = std::mt19937_64;

enum class TemporalMode { iid_normal, iid_lognormal, garch_arma };

// Placement of the nonzero alphas. `symmetric` puts +nu on the first
// floor(pi p / 2) entities and -nu on the next ones up to floor(pi p);
// `one_sided` puts +nu on all of the first floor(pi p).
enum class AlphaLayout { symmetric, one_sided };

struct GarchParams {
  double omega = 0.1;
  double a1 = 0.1;  // weight of the lagged squared observation
  double b1 = 0.8;  // weight of the lagged conditional variance
};

struct ArmaComponent {
  double weight = 0.0;
  std::vector<double> ar;
  std::vector<double> ma;
  double innovation_sd = 1.0;
};

struct SimulationScenario {
  std::string name;
  int n = 200;
  int p = 1000;
  int r_total = 7;
  int r_observed = 3;
  Matrix factor_cov;
  Vector factor_mean;  // empty means zero
  Vector loading_mean;
  Matrix loading_cov;
  double error_cov_rho = 0.5;
  bool hetero_variances = false;
  double hetero_lo = 1.0;
  double hetero_hi = 3.0;
  double pi = 0.1;
  double nu = 0.3;
  AlphaLayout alpha_layout = AlphaLayout::symmetric;
  TemporalMode temporal_mode = TemporalMode::iid_normal;
  std::vector<GarchParams> garch_params;    // one per factor
  std::vector<ArmaComponent> arma_mixture;  // weights sum to <= 1
  std::uint64_t seed = 20240101;

  int r_latent() const noexcept { return r_total - r_observed; }
  Vector factor_mean_or_zero() const;
  // Throws ConfigError describing the first violated invariant.
  void validate() const;
};

// Population quantities behind a generated panel.
struct PopulationOracle {
  Vector alpha;
  Vector latent_premium;   // mu = E F_c - Psi E F_o
  Matrix latent_cov;       // Sigma_W = Cov(F_c) - Psi Cov(F_o) Psi^T
  Vector observed_mean;    // mu_{F_o}
  Matrix observed_cov;     // Sigma_{F_o}
  Vector error_sd;         // marginal sd of each entity's idiosyncratic error
  int latent_rank = 0;

  // 1 + mu' Sigma_W^{-1} mu + mu_o' Sigma_o^{-1} mu_o
  double variance_inflation() const;
  // error_sd_i^2 * variance_inflation(): asymptotic variance of
  // sqrt(n) (alpha_hat_i - alpha_i) for serially independent data.
  Vector iid_asymptotic_variance() const;
};

struct GeneratedPanel {
  ReturnPanel returns;
  FactorPanel observed_factors;
  IndexSet truth;          // entities with nonzero alpha
  PopulationOracle oracle;
  Matrix factors;          // n x r_total, all factors
  Matrix loadings;         // p x r_total
  Matrix errors;           // p x n idiosyncratic component
  std::vector<int> arma_component;  // per entity; -1 for white noise
};

Vector make_alpha(int p, double pi, double nu,
                  AlphaLayout layout = AlphaLayout::symmetric);

// Rows i.i.d. N(mean, cov). An exactly zero cov returns `mean` in every row;
// any other non-positive-definite cov is rejected.
Matrix sample_loadings(int p, const Vector& mean, const Matrix& cov, Rng& rng);

// Square-root factor of the Toeplitz correlation (rho^|i-j|), applied in
// O(p) per column through e_1 = z_1, e_i = rho e_{i-1} + sqrt(1-rho^2) z_i.
class ToeplitzFactor {
 public:
  explicit ToeplitzFactor(int p, double rho);
  int size() const noexcept { return p_; }
  double rho() const noexcept { return rho_; }
  // Maps each column of z (p x m, independent unit-variance entries) to a
  // column with correlation rho^|i-j| across rows.
  Matrix apply(const Matrix& z) const;

 private:
  int p_;
  double rho_;
};

ToeplitzFactor toeplitz_error_cov(int p, double rho);

inline constexpr int kGarchBurnIn = 500;
inline constexpr int kArmaBurnIn = 200;

// n x r raw GARCH(1,1) series with Gaussian innovations (burn-in dropped).
Matrix simulate_garch(int n, const std::vector<GarchParams>& params, Rng& rng);

// GARCH(1,1) series scaled to unit unconditional variance, then rotated by
// the Cholesky factor of target_cov.
Matrix garch_factors(int n, int r, const std::vector<GarchParams>& params,
                     const Matrix& target_cov, Rng& rng);

// Unconditional variance of an ARMA process with unit innovation variance.
double arma_unit_variance(const std::vector<double>& ar,
                          const std::vector<double>& ma);
// Throws ConfigError unless stationary and invertible.
void validate_arma(const std::vector<double>& ar, const std::vector<double>& ma);

struct ArmaMixtureDraw {
  Matrix errors;                  // p x n
  std::vector<int> component;     // per entity; -1 for white noise
};

// Each entity independently picks a component by weight (white noise for the
// remaining mass); rows are standardized to unit variance and multiplied by
// base_sd.
ArmaMixtureDraw arma_mixture_errors(int n, int p,
                                    const std::vector<ArmaComponent>& mixture,
                                    const Vector& base_sd, Rng& rng);

GeneratedPanel generate_panel(const SimulationScenario& scenario, Rng& rng);

// Built-in scenarios; the files under scenarios/ hold the same values.
SimulationScenario table1_normal_scenario(double nu = 0.3);
SimulationScenario table1_lognormal_scenario(double nu = 0.3);
SimulationScenario table2_scenario(double nu = 0.3);
SimulationScenario figure1_scenario(double nu = 0.2);
// Dense one-sided alphas (pi = 0.4, nu = 0.5) with weaker mean latent
// loadings: the regime where the latent premium absorbs part of alpha.
SimulationScenario dense_alpha_scenario();
std::vector<ArmaComponent> default_arma_mixture();

// JSON scenario files.
SimulationScenario scenario_from_json(const std::string& text);
SimulationScenario load_scenario(const std::string& path);
std::string scenario_to_json(const SimulationScenario& scenario);

}  // namespace alphascreen
