#include "alphascreen/fdr_testing.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace alphascreen {

std::pair<HalfPanels, HalfPanels> chronological_split(
    const ReturnPanel& returns, const FactorPanel& factors) {
  require_aligned(returns, factors);
  const Eigen::Index n = returns.periods();
  const Eigen::Index r_o = factors.count();
  if (n < 2 * (r_o + 3)) {
    std::ostringstream msg;
    msg << "panel of " << n << " periods is too short to split with " << r_o
        << " observed factors (need " << 2 * (r_o + 3) << ")";
    throw DimensionError(msg.str());
  }
  const Eigen::Index first = n / 2;
  return {{returns.slice_periods(0, first), factors.slice_periods(0, first)},
          {returns.slice_periods(first, n - first),
           factors.slice_periods(first, n - first)}};
}

SplitFits fit_halves(const Matrix& x, const Matrix& f,
                     const EstimationOptions& options, bool concurrent) {
  if (x.cols() != f.rows()) throw DimensionError("panels not time-aligned");
  const Eigen::Index n = x.cols();
  if (n < 2 * (f.cols() + 3)) {
    throw DimensionError("panel too short to split");
  }
  const Eigen::Index first = n / 2;
  const Matrix x1 = x.leftCols(first);
  const Matrix f1 = f.topRows(first);
  const Matrix x2 = x.rightCols(n - first);
  const Matrix f2 = f.bottomRows(n - first);
  SplitFits out;
  out.n = n;
  if (concurrent) {
    auto later = std::async(std::launch::async,
                            [&] { return estimate_alpha(x2, f2, options); });
    out.first = estimate_alpha(x1, f1, options);
    out.second = later.get();
  } else {
    out.first = estimate_alpha(x1, f1, options);
    out.second = estimate_alpha(x2, f2, options);
  }
  return out;
}

namespace {

Vector half_statistic(const AlphaFit& fit, double root_n, bool studentize,
                      const std::optional<NegativeControlConfig>& control) {
  Vector t = root_n * (control ? negative_control_alpha(fit, *control) : fit.alpha);
  if (studentize) {
    if (!fit.long_run_variance) {
      throw ContractError("studentized statistics need long-run variances");
    }
    t.array() /= fit.long_run_variance->array().sqrt();
  }
  return t;
}

}  // namespace

SplitTestResult split_from_fits(
    const SplitFits& fits, bool studentize,
    const std::optional<NegativeControlConfig>& negative_control) {
  const double root_n = std::sqrt(static_cast<double>(fits.n));
  std::optional<NegativeControlConfig> control = negative_control;
  if (control && control->sample_size == 0) control->sample_size = fits.n;
  SplitTestResult out;
  out.studentized = studentize;
  out.t1 = half_statistic(fits.first, root_n, studentize, control);
  out.t2 = half_statistic(fits.second, root_n, studentize, control);
  out.rank1 = fits.first.latent.rank;
  out.rank2 = fits.second.latent.rank;
  out.t_prod = out.t1.cwiseProduct(out.t2);
  return out;
}

SplitTestResult split_statistics(const ReturnPanel& returns,
                                 const FactorPanel& factors,
                                 const SplitOptions& options) {
  // Validates lengths and alignment.
  (void)chronological_split(returns, factors);
  return split_statistics(returns.values(), factors.values(), options);
}

SplitTestResult split_statistics(const Matrix& x, const Matrix& f,
                                 const SplitOptions& options) {
  EstimationOptions est;
  est.rank = options.rank;
  est.max_rank = options.max_rank;
  est.long_run_variance = options.studentize;
  est.bandwidth = options.bandwidth;
  return split_from_fits(fit_halves(x, f, est, options.concurrent),
                         options.studentize, options.negative_control);
}

ThresholdDecision select_threshold(const Vector& t_prod, double beta) {
  if (!(beta > 0.0) || !(beta <= 1.0)) {
    throw ContractError("FDR level beta must lie in (0, 1]");
  }
  std::vector<double> pos;  // positive values
  std::vector<double> neg;  // magnitudes of negative values
  for (Eigen::Index i = 0; i < t_prod.size(); ++i) {
    const double t = t_prod(i);
    if (t > 0.0) pos.push_back(t);
    else if (t < 0.0) neg.push_back(-t);
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> candidates;
  candidates.reserve(pos.size() + neg.size());
  std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(),
             std::back_inserter(candidates));
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  ThresholdDecision out;
  // Sweep candidates upward; counts of values >= xi shrink monotonically.
  auto pos_it = pos.begin();
  auto neg_it = neg.begin();
  for (const double xi : candidates) {
    while (pos_it != pos.end() && *pos_it < xi) ++pos_it;
    while (neg_it != neg.end() && *neg_it < xi) ++neg_it;
    const auto n_pos = static_cast<double>(pos.end() - pos_it);
    const auto n_neg = static_cast<double>(neg.end() - neg_it);
    if ((1.0 + n_neg) / std::max(n_pos, 1.0) <= beta) {
      out.threshold = xi;
      break;
    }
  }
  if (std::isfinite(out.threshold)) {
    for (Eigen::Index i = 0; i < t_prod.size(); ++i) {
      if (t_prod(i) >= out.threshold) out.rejected.push_back(static_cast<int>(i));
    }
  }
  return out;
}

void apply_threshold(SplitTestResult& result, double beta) {
  ThresholdDecision d = select_threshold(result.t_prod, beta);
  result.threshold = d.threshold;
  result.rejected = std::move(d.rejected);
  result.beta = beta;
}

double negative_control_gamma(Eigen::Index n, double gamma_scale) {
  const double dn = static_cast<double>(n);
  return gamma_scale * std::log(dn) / std::sqrt(dn);
}

IndexSet negative_control_set(const AlphaFit& fit,
                              const NegativeControlConfig& config) {
  const Eigen::Index p = fit.alpha.size();
  IndexSet s;
  if (config.mode == NegativeControlConfig::Mode::explicit_set) {
    s = config.explicit_indices;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (const int i : s) {
      if (i < 0 || i >= p) {
        throw ContractError("negative-control index " + std::to_string(i) +
                            " out of range");
      }
    }
    return s;
  }
  if (!(config.gamma_scale > 0.0)) {
    throw ContractError("gamma_scale must be positive");
  }
  const Eigen::Index n = config.sample_size > 0 ? config.sample_size : fit.n_used;
  const double gamma = negative_control_gamma(n, config.gamma_scale);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::abs(fit.alpha(i)) <= gamma) s.push_back(static_cast<int>(i));
  }
  if (s.empty()) {
    throw ContractError(
        "threshold rule selected an empty negative-control set; increase "
        "gamma_scale");
  }
  return s;
}

Vector negative_control_alpha(const AlphaFit& fit,
                              const NegativeControlConfig& config) {
  const IndexSet s = negative_control_set(fit, config);
  const Matrix& b = fit.latent.loadings;
  const auto k = static_cast<std::size_t>(b.cols());
  if (s.size() < k + 1) {
    std::ostringstream msg;
    msg << "negative-control set of size " << s.size()
        << " underdetermines " << k << " latent premia (need at least "
        << k + 1 << ")";
    throw ContractError(msg.str());
  }
  Matrix b_s(static_cast<Eigen::Index>(s.size()), b.cols());
  Vector a_s(static_cast<Eigen::Index>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) {
    b_s.row(static_cast<Eigen::Index>(j)) = b.row(s[j]);
    a_s(static_cast<Eigen::Index>(j)) = fit.adjusted_mean(s[j]);
  }
  const Matrix premium = least_squares(b_s, a_s);
  return fit.adjusted_mean - b * premium;
}

Vector negative_control_alpha(const ReturnPanel& returns,
                              const FactorPanel& factors,
                              const NegativeControlConfig& config,
                              std::optional<int> rank) {
  EstimationOptions est;
  est.rank = rank;
  return negative_control_alpha(estimate_alpha(returns, factors, est), config);
}

FdrMetrics evaluate(const IndexSet& rejected, const IndexSet& truth,
                    Eigen::Index p) {
  std::vector<char> is_true(static_cast<std::size_t>(p), 0);
  for (const int i : truth) {
    if (i < 0 || i >= p) throw ContractError("truth index out of range");
    is_true[static_cast<std::size_t>(i)] = 1;
  }
  FdrMetrics m;
  int true_hits = 0;
  for (const int i : rejected) {
    if (i < 0 || i >= p) throw ContractError("rejected index out of range");
    ++m.r_count;
    if (is_true[static_cast<std::size_t>(i)]) ++true_hits;
    else ++m.v_count;
  }
  m.fdp = static_cast<double>(m.v_count) / std::max(m.r_count, 1);
  std::size_t n_true = 0;
  for (const char c : is_true) n_true += c;
  m.power = static_cast<double>(true_hits) /
            static_cast<double>(std::max<std::size_t>(n_true, 1));
  return m;
}

FdrMetrics evaluate(const SplitTestResult& result, const IndexSet& truth) {
  return evaluate(result.rejected, truth, result.t_prod.size());
}

}  // namespace alphascreen
