#include "alphascreen/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <tuple>

namespace alphascreen {

IndexSet bh_procedure(const Vector& p_values, double beta) {
  if (!(beta > 0.0) || !(beta < 1.0)) {
    throw ContractError("FDR level beta must lie in (0, 1)");
  }
  const Eigen::Index p = p_values.size();
  std::vector<int> order(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) {
    const double v = p_values(i);
    if (!(v >= 0.0 && v <= 1.0)) {
      std::ostringstream msg;
      msg << "p-value " << v << " at index " << i << " outside [0, 1]";
      throw ContractError(msg.str());
    }
    order[static_cast<std::size_t>(i)] = static_cast<int>(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p_values(a) < p_values(b); });
  std::size_t k = 0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const double cutoff =
        static_cast<double>(j + 1) * beta / static_cast<double>(p);
    if (p_values(order[j]) <= cutoff) k = j + 1;
  }
  IndexSet rejected(order.begin(), order.begin() + static_cast<long>(k));
  std::sort(rejected.begin(), rejected.end());
  return rejected;
}

double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

PValueResult ols_statistics(const ReturnPanel& returns,
                            const FactorPanel& factors) {
  require_aligned(returns, factors);
  return ols_statistics(returns.values(), factors.values());
}

PValueResult ols_statistics(const Matrix& x, const Matrix& f) {
  if (x.cols() != f.rows()) throw DimensionError("panels not time-aligned");
  const Eigen::Index n = f.rows();
  const Eigen::Index k = f.cols() + 1;
  if (n <= k) throw DimensionError("too few periods for OLS t-tests");
  Matrix design(n, k);
  design.col(0).setOnes();
  design.rightCols(f.cols()) = f;
  const Matrix coef = least_squares(design, x.transpose());  // k x p
  const Matrix resid = x - (design * coef).transpose();
  // [(D'D)^{-1}]_{00} from the R factor of D.
  Eigen::HouseholderQR<Matrix> qr(design);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const Matrix r_inv = r.triangularView<Eigen::Upper>().solve(
      Matrix::Identity(k, k));
  const double c00 = r_inv.row(0).squaredNorm();

  PValueResult out;
  out.method = PValueMethod::bh_plain;
  out.alpha = coef.row(0).transpose();
  out.statistics.resize(x.rows());
  out.p_values.resize(x.rows());
  const double dof = static_cast<double>(n - k);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double s2 = resid.row(i).squaredNorm() / dof;
    if (!(s2 > 0.0)) {
      throw Error("zero residual variance for entity " + std::to_string(i + 1));
    }
    const double z = out.alpha(i) / std::sqrt(s2 * c00);
    out.statistics(i) = z;
    out.p_values(i) = normal_two_sided_p(z);
  }
  return out;
}

double premia_inflation(const AlphaFit& fit, const Matrix& f) {
  double inflation = 1.0;
  const Matrix& b = fit.latent.loadings;
  const Eigen::Index n = fit.latent.adjusted_returns.cols();
  // Latent factor series and premia in the loadings' own rotation; the
  // quadratic form below does not depend on that rotation.
  const Matrix g = least_squares(b, fit.latent.adjusted_returns);  // r x n
  const Vector premia = least_squares(b, fit.adjusted_mean).col(0);
  const Matrix cov_g = g * g.transpose() / static_cast<double>(n);
  inflation += premia.dot(cov_g.ldlt().solve(premia));
  if (f.cols() > 0) {
    const Vector mean_f = f.colwise().mean().transpose();
    const Matrix centered = demean_columns(f);
    const Matrix cov_f =
        centered.transpose() * centered / static_cast<double>(f.rows());
    inflation += mean_f.dot(cov_f.ldlt().solve(mean_f));
  }
  return inflation;
}

PValueResult sbh_from_components(const Vector& alpha,
                                 const Vector& residual_scale,
                                 double inflation, Eigen::Index n) {
  if (alpha.size() != residual_scale.size()) {
    throw DimensionError("alpha and residual scale lengths differ");
  }
  PValueResult out;
  out.method = PValueMethod::sbh_normal;
  out.alpha = alpha;
  out.statistics.resize(alpha.size());
  out.p_values.resize(alpha.size());
  const double root_n = std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    const double v = residual_scale(i) * inflation;
    if (!(v > 0.0)) {
      throw Error("zero residual variance for entity " + std::to_string(i + 1));
    }
    const double z = root_n * alpha(i) / std::sqrt(v);
    out.statistics(i) = z;
    out.p_values(i) = normal_two_sided_p(z);
  }
  return out;
}

PValueResult sbh_from_fit(const AlphaFit& fit, const Matrix& f, bool hac) {
  const Eigen::Index n = fit.residuals.cols();
  Vector scale;
  if (hac) {
    scale = fit.long_run_variance ? *fit.long_run_variance
                                  : long_run_variance(fit.residuals);
  } else {
    // Residual rows are centered; divide by the time-series degrees of
    // freedom left after the intercept and the observed factors.
    const double dof = static_cast<double>(n - 1 - f.cols());
    scale = fit.residuals.rowwise().squaredNorm() / dof;
  }
  PValueResult out =
      sbh_from_components(fit.alpha, scale, premia_inflation(fit, f), n);
  out.rank = fit.latent.rank;
  return out;
}

PValueResult sbh_statistics(const ReturnPanel& returns,
                            const FactorPanel& factors,
                            const SbhOptions& options) {
  require_aligned(returns, factors);
  return sbh_statistics(returns.values(), factors.values(), options);
}

PValueResult sbh_statistics(const Matrix& x, const Matrix& f,
                            const SbhOptions& options) {
  EstimationOptions est;
  est.rank = options.rank;
  est.max_rank = options.max_rank;
  est.long_run_variance = options.hac;
  return sbh_from_fit(estimate_alpha(x, f, est), f, options.hac);
}

double sn_statistic(double alpha,
                    const Eigen::Ref<const Eigen::RowVectorXd>& residual) {
  const Eigen::Index n = residual.size();
  if (n < 2) throw DimensionError("self-normalizer needs at least 2 periods");
  double partial = 0.0;
  double sum_sq = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    partial += residual(t);
    sum_sq += partial * partial;
  }
  const double dn = static_cast<double>(n);
  const double v = sum_sq / (dn * dn);
  const double scale = residual.squaredNorm() / dn;
  if (!(v > 1e-14 * std::max(scale, 1e-300)) || !(scale > 0.0)) {
    throw Error("degenerate self-normalizer (series has no variation)");
  }
  return dn * alpha * alpha / v;
}

SnLimitLaw::SnLimitLaw(int paths, int grid, std::uint64_t seed) {
  if (paths < 1000) throw ContractError("SN calibration needs >= 1000 paths");
  if (grid < 10) throw ContractError("SN calibration grid too coarse");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double step = 1.0 / std::sqrt(static_cast<double>(grid));
  std::vector<double> w(static_cast<std::size_t>(grid));
  draws_.resize(static_cast<std::size_t>(paths));
  for (int path = 0; path < paths; ++path) {
    double acc = 0.0;
    for (int k = 0; k < grid; ++k) {
      acc += step * normal(rng);
      w[static_cast<std::size_t>(k)] = acc;
    }
    const double w1 = acc;
    double integral = 0.0;
    for (int k = 0; k < grid; ++k) {
      const double bridge =
          w[static_cast<std::size_t>(k)] -
          static_cast<double>(k + 1) / static_cast<double>(grid) * w1;
      integral += bridge * bridge;
    }
    integral /= static_cast<double>(grid);
    draws_[static_cast<std::size_t>(path)] = w1 * w1 / integral;
  }
  std::sort(draws_.begin(), draws_.end());
}

std::shared_ptr<const SnLimitLaw> SnLimitLaw::get(int paths, int grid,
                                                  std::uint64_t seed) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, std::uint64_t>,
                  std::shared_ptr<const SnLimitLaw>>
      cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{paths, grid, seed}];
  if (!slot) slot = std::make_shared<const SnLimitLaw>(paths, grid, seed);
  return slot;
}

double SnLimitLaw::upper_tail(double s) const {
  const auto first_ge = std::lower_bound(draws_.begin(), draws_.end(), s);
  const auto count = static_cast<double>(draws_.end() - first_ge);
  return (1.0 + count) / (1.0 + static_cast<double>(draws_.size()));
}

double SnLimitLaw::quantile(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw ContractError("quantile level outside [0,1]");
  const auto idx = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(draws_.size() - 1),
                       std::floor(q * static_cast<double>(draws_.size()))));
  return draws_[idx];
}

PValueResult sn_from_fit(const AlphaFit& fit, int mc_paths) {
  const auto law = SnLimitLaw::get(mc_paths);
  PValueResult out;
  out.method = PValueMethod::sn_calibrated;
  out.alpha = fit.alpha;
  out.rank = fit.latent.rank;
  const Eigen::Index p = fit.alpha.size();
  out.statistics.resize(p);
  out.p_values.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double s = sn_statistic(fit.alpha(i), fit.residuals.row(i));
    out.statistics(i) = s;
    out.p_values(i) = law->upper_tail(s);
  }
  return out;
}

PValueResult sn_statistics(const ReturnPanel& returns,
                           const FactorPanel& factors,
                           const SnOptions& options) {
  require_aligned(returns, factors);
  return sn_statistics(returns.values(), factors.values(), options);
}

PValueResult sn_statistics(const Matrix& x, const Matrix& f,
                           const SnOptions& options) {
  EstimationOptions est;
  est.rank = options.rank;
  est.max_rank = options.max_rank;
  return sn_from_fit(estimate_alpha(x, f, est), options.mc_paths);
}

}  // namespace alphascreen
