#pragma once

#include <functional>
#include <optional>

#include "alphascreen/panel.hpp"

namespace alphascreen {

// Latent-factor part of the fit: PCA loadings of the adjusted, time-demeaned
// returns and the spectrum used to choose their number.
struct LatentFit {
  Matrix loadings;           // p x rank; each column has squared norm p
  int rank = 0;
  Vector eigenvalues;        // nonzero spectrum of R R^T, descending
  Matrix adjusted_returns;   // R: observed factors regressed out, rows demeaned
  double max_eigen_ratio = 0.0;  // lambda_rank / lambda_{rank+1}
};

struct ObservedRegression {
  Matrix loadings;  // p x r_o time-series regression slopes
  Matrix adjusted;  // p x n returns with the fitted observed-factor part removed
};

// Even kernel with phi(0) = 1 and support [-1, 1].
using Kernel = std::function<double(double)>;

double bartlett_kernel(double x);

struct EstimationOptions {
  std::optional<int> rank;  // latent rank; chosen by eigenvalue ratio if empty
  int max_rank = 10;
  bool long_run_variance = false;
  std::optional<double> bandwidth;  // defaults to n^(1/5)
  Kernel kernel = bartlett_kernel;
};

struct AlphaFit {
  Vector alpha;                 // cross-sectional regression intercepts
  LatentFit latent;
  Matrix observed_loadings;     // p x r_o
  Vector adjusted_mean;         // time average of the adjusted returns
  Matrix residuals;             // Q(B_hat) R: fluctuation part, rows centered
  Eigen::Index n_used = 0;
  std::optional<Vector> long_run_variance;
};

// Intercepts of entitywise time-series OLS of returns on the observed
// factors. Biased by the latent factors' premia; kept as a diagnostic.
Vector ols_alpha_biased(const ReturnPanel& returns, const FactorPanel& factors);
Vector ols_alpha_biased(const Matrix& x, const Matrix& f);

ObservedRegression regress_out_observed(const ReturnPanel& returns,
                                        const FactorPanel& factors);
ObservedRegression regress_out_observed(const Matrix& x, const Matrix& f);

// Eigenvalues below floor_ratio * lambda_1 are treated as zero.
inline constexpr double kDegeneracyFloor = 1e-12;

LatentFit estimate_latent(const Matrix& adjusted, std::optional<int> rank,
                          int max_rank = 10);

AlphaFit estimate_alpha(const ReturnPanel& returns, const FactorPanel& factors,
                        const EstimationOptions& options = {});
AlphaFit estimate_alpha(const Matrix& x, const Matrix& f,
                        const EstimationOptions& options = {});

// Kernel estimate of each row's long-run variance,
//   s_i^2 = (1/n) sum_{t1,t2} phi((t1 - t2) / bandwidth) e_{i,t1} e_{i,t2},
// evaluated through lag sums. Nonpositive results (possible only with a
// non-PSD kernel) are floored at a small positive value with a warning.
Vector long_run_variance(const Matrix& residuals,
                         std::optional<double> bandwidth = std::nullopt,
                         const Kernel& kernel = bartlett_kernel);

double default_bandwidth(Eigen::Index n);

// Receives library warnings; defaults to standard error.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& message);

}  // namespace alphascreen
