#include "alphascreen/factor_estimation.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>

namespace alphascreen {

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

std::function<void(const std::string&)>& warning_handler() {
  static std::function<void(const std::string&)> handler =
      [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return handler;
}

// Largest-magnitude entry of each column made positive.
void fix_signs(Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index arg = 0;
    m.col(j).cwiseAbs().maxCoeff(&arg);
    if (m(arg, j) < 0.0) m.col(j) *= -1.0;
  }
}

}  // namespace

void set_warning_handler(std::function<void(const std::string&)> handler) {
  std::lock_guard<std::mutex> lock(warning_mutex());
  warning_handler() = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

double bartlett_kernel(double x) {
  const double a = std::abs(x);
  return a <= 1.0 ? 1.0 - a : 0.0;
}

double default_bandwidth(Eigen::Index n) {
  return std::pow(static_cast<double>(n), 0.2);
}

Vector ols_alpha_biased(const ReturnPanel& returns,
                        const FactorPanel& factors) {
  require_aligned(returns, factors);
  return ols_alpha_biased(returns.values(), factors.values());
}

Vector ols_alpha_biased(const Matrix& x, const Matrix& f) {
  if (x.cols() != f.rows()) throw DimensionError("panels not time-aligned");
  const Eigen::Index n = f.rows();
  Matrix design(n, f.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(f.cols()) = f;
  const Matrix coef = least_squares(design, x.transpose());
  return coef.row(0).transpose();
}

ObservedRegression regress_out_observed(const ReturnPanel& returns,
                                        const FactorPanel& factors) {
  require_aligned(returns, factors);
  return regress_out_observed(returns.values(), factors.values());
}

ObservedRegression regress_out_observed(const Matrix& x, const Matrix& f) {
  if (x.cols() != f.rows()) throw DimensionError("panels not time-aligned");
  ObservedRegression out;
  if (f.cols() == 0) {
    out.loadings = Matrix(x.rows(), 0);
    out.adjusted = x;
    return out;
  }
  const Matrix f_tilde = demean_columns(f);
  out.loadings = least_squares(f_tilde, x.transpose()).transpose();
  // X (I - F~ (F~'F~)^{-1} F') without forming the n x n matrix.
  out.adjusted = x - out.loadings * f.transpose();
  return out;
}

LatentFit estimate_latent(const Matrix& adjusted, std::optional<int> rank,
                          int max_rank) {
  const Eigen::Index p = adjusted.rows();
  const Eigen::Index n = adjusted.cols();
  if (p < 1 || n < 2) throw DimensionError("adjusted panel too small for PCA");
  if (max_rank < 1) throw ContractError("max_rank must be positive");

  LatentFit fit;
  fit.adjusted_returns = adjusted.colwise() - adjusted.rowwise().mean();
  const Matrix& r = fit.adjusted_returns;

  // R R^T shares its nonzero spectrum with the n x n Gram matrix R^T R.
  Matrix gram = Matrix::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(r.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  const EigenPairs eig = top_eigenpairs(gram, n);

  const double lambda1 = eig.values(0);
  if (!(lambda1 > 0.0)) {
    throw NoFactorStructureError("adjusted returns have a zero spectrum");
  }
  const double floor = kDegeneracyFloor * lambda1;
  Eigen::Index positive = 0;
  while (positive < n && eig.values(positive) > floor) ++positive;
  fit.eigenvalues = eig.values.head(positive);

  if (rank) {
    if (*rank < 1 || *rank > positive) {
      std::ostringstream msg;
      msg << "requested latent rank " << *rank << " but only " << positive
          << " eigenvalues exceed the degeneracy floor";
      throw NoFactorStructureError(msg.str());
    }
    fit.rank = *rank;
  } else {
    const Eigen::Index last = std::min<Eigen::Index>(max_rank, positive - 1);
    if (last < 1) {
      fit.rank = 1;
    } else {
      Eigen::Index best = 0;
      double best_ratio = -1.0;
      for (Eigen::Index i = 0; i < last; ++i) {
        const double ratio = eig.values(i) / eig.values(i + 1);
        if (ratio > best_ratio) {  // strict: smallest index wins ties
          best_ratio = ratio;
          best = i;
        }
      }
      fit.rank = static_cast<int>(best + 1);
    }
  }
  fit.max_eigen_ratio = fit.rank < positive
                            ? eig.values(fit.rank - 1) / eig.values(fit.rank)
                            : std::numeric_limits<double>::infinity();

  Matrix left = r * eig.vectors.leftCols(fit.rank);
  for (int j = 0; j < fit.rank; ++j) left.col(j).normalize();
  fix_signs(left);
  fit.loadings = std::sqrt(static_cast<double>(p)) * left;
  return fit;
}

AlphaFit estimate_alpha(const ReturnPanel& returns, const FactorPanel& factors,
                        const EstimationOptions& options) {
  require_aligned(returns, factors);
  return estimate_alpha(returns.values(), factors.values(), options);
}

AlphaFit estimate_alpha(const Matrix& x, const Matrix& f,
                        const EstimationOptions& options) {
  ObservedRegression observed = regress_out_observed(x, f);
  AlphaFit fit;
  fit.n_used = x.cols();
  fit.adjusted_mean = observed.adjusted.rowwise().mean();
  fit.latent = estimate_latent(observed.adjusted, options.rank,
                               options.max_rank);
  fit.observed_loadings = std::move(observed.loadings);

  const Matrix& b = fit.latent.loadings;
  const Matrix premia = least_squares(b, fit.adjusted_mean);
  fit.alpha = fit.adjusted_mean - b * premia;

  const Matrix& r = fit.latent.adjusted_returns;
  fit.residuals = r - b * least_squares(b, r);

  if (options.long_run_variance) {
    fit.long_run_variance =
        long_run_variance(fit.residuals, options.bandwidth, options.kernel);
  }
  return fit;
}

Vector long_run_variance(const Matrix& residuals,
                         std::optional<double> bandwidth,
                         const Kernel& kernel) {
  const Eigen::Index n = residuals.cols();
  if (n < 1) throw DimensionError("empty residual panel");
  const double ell = bandwidth.value_or(default_bandwidth(n));
  if (!(ell > 0.0) || !(ell < static_cast<double>(n))) {
    throw ContractError("bandwidth must lie in (0, n)");
  }
  const Eigen::Index max_lag =
      std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::floor(ell)));
  std::vector<double> weights(static_cast<std::size_t>(max_lag + 1));
  for (Eigen::Index h = 0; h <= max_lag; ++h) {
    weights[static_cast<std::size_t>(h)] =
        kernel(static_cast<double>(h) / ell);
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  const double eps = std::numeric_limits<double>::epsilon();
  Vector out(residuals.rows());
  Eigen::Index floored = 0;
  for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
    const auto row = residuals.row(i);
    double s = weights[0] * row.squaredNorm();
    for (Eigen::Index h = 1; h <= max_lag; ++h) {
      const double w = weights[static_cast<std::size_t>(h)];
      if (w == 0.0) continue;
      s += 2.0 * w * row.head(n - h).dot(row.tail(n - h));
    }
    s *= inv_n;
    if (!(s > 0.0)) {
      const double scale = row.squaredNorm() * inv_n;
      s = std::max(eps * std::max(scale, 1.0), std::numeric_limits<double>::min());
      ++floored;
    }
    out(i) = s;
  }
  if (floored > 0) {
    warn(std::to_string(floored) +
         " long-run variance estimate(s) were nonpositive and floored");
  }
  return out;
}

}  // namespace alphascreen
