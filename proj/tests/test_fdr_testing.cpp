#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "alphascreen/fdr_testing.hpp"
#include "alphascreen/simulation.hpp"
#include "alphascreen/study.hpp"
#include "helpers.hpp"

using namespace alphascreen;
using testing_util::gaussian;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

// Rejection set of the smallest grid point meeting the criterion.
IndexSet grid_scan(const Vector& t, double beta, int points) {
  const double top = t.cwiseAbs().maxCoeff();
  for (int k = 1; k <= points; ++k) {
    const double xi = top * k / points;
    double pos = 0, neg = 0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (t(i) >= xi) ++pos;
      if (t(i) <= -xi) ++neg;
    }
    if ((1.0 + neg) / std::max(pos, 1.0) <= beta) {
      IndexSet out;
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        if (t(i) >= xi) out.push_back(static_cast<int>(i));
      }
      return out;
    }
  }
  return {};
}

// Smallest observed |t| meeting the criterion, by direct counting.
double brute_threshold(const Vector& t, double beta) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < t.size(); ++c) {
    const double xi = std::abs(t(c));
    if (xi == 0.0 || xi >= best) continue;
    double pos = 0, neg = 0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (t(i) >= xi) ++pos;
      if (t(i) <= -xi) ++neg;
    }
    if ((1.0 + neg) / std::max(pos, 1.0) <= beta) best = xi;
  }
  return best;
}

Vector mixed_statistics(std::mt19937_64& rng, int p) {
  std::normal_distribution<double> z;
  std::bernoulli_distribution signal(0.15);
  Vector t(p);
  for (int i = 0; i < p; ++i) {
    const double a = z(rng), b = z(rng);
    t(i) = signal(rng) ? (3.0 + a) * (3.0 + b) : a * b;
  }
  return t;
}

AlphaFit fake_fit(const Vector& alpha) {
  AlphaFit fit;
  fit.alpha = alpha;
  fit.latent.rank = 1;
  fit.n_used = 50;
  return fit;
}

}  // namespace

TEST_CASE("chronological split halves") {
  std::mt19937_64 rng(30);
  const ReturnPanel r10(gaussian(3, 10, rng));
  const FactorPanel f10(gaussian(10, 1, rng));
  const auto [a, b] = chronological_split(r10, f10);
  CHECK(a.first.periods() == 5);
  CHECK(b.first.periods() == 5);
  CHECK(a.first.time_index() == std::vector<std::int64_t>{1, 2, 3, 4, 5});
  CHECK(b.first.time_index() == std::vector<std::int64_t>{6, 7, 8, 9, 10});
  Matrix joined(3, 10);
  joined << a.first.values(), b.first.values();
  CHECK(joined == r10.values());
  CHECK(b.second.values() == f10.values().bottomRows(5));

  const ReturnPanel r11(gaussian(3, 11, rng));
  const FactorPanel f11(gaussian(11, 1, rng));
  const auto halves = chronological_split(r11, f11);
  CHECK(halves.first.first.periods() == 5);
  CHECK(halves.second.first.periods() == 6);

  const ReturnPanel r7(gaussian(3, 7, rng));
  const FactorPanel f7(gaussian(7, 1, rng));
  CHECK_THROWS_AS(chronological_split(r7, f7), DimensionError);
}

TEST_CASE("split statistics scale by the full-sample root n") {
  SplitFits fits;
  fits.first = fake_fit(vec({1.0, -2.0}));
  fits.second = fake_fit(vec({3.0, 1.0}));
  fits.n = 100;
  const SplitTestResult r = split_from_fits(fits, false);
  CHECK(r.t_prod(0) == doctest::Approx(300.0));
  CHECK(r.t_prod(1) == doctest::Approx(-200.0));
  CHECK(r.t1(0) == doctest::Approx(10.0));
  CHECK(r.t2(1) == doctest::Approx(10.0));
  CHECK(r.t_prod == r.t1.cwiseProduct(r.t2));
  CHECK_THROWS_AS(split_from_fits(fits, true), ContractError);

  fits.first.long_run_variance = vec({4.0, 1.0});
  fits.second.long_run_variance = vec({1.0, 4.0});
  const SplitTestResult s = split_from_fits(fits, true);
  CHECK(s.studentized);
  CHECK(s.t1(0) == doctest::Approx(5.0));
  CHECK(s.t2(1) == doctest::Approx(5.0));
}

TEST_CASE("select_threshold worked examples") {
  const ThresholdDecision a = select_threshold(vec({2.0, -1.0}), 1.0);
  CHECK(a.threshold == 2.0);
  CHECK(a.rejected == IndexSet{0});

  const ThresholdDecision b = select_threshold(vec({3.0, -1.0, 2.0, -2.5, 5.0}), 0.5);
  CHECK(b.threshold == 3.0);
  CHECK(b.rejected == IndexSet{0, 4});

  const ThresholdDecision c = select_threshold(vec({-1.0, -2.0, -0.5}), 0.2);
  CHECK(std::isinf(c.threshold));
  CHECK(c.rejected.empty());

  const ThresholdDecision empty = select_threshold(Vector(0), 0.1);
  CHECK(std::isinf(empty.threshold));

  // Zeros are never candidates and never rejected.
  const ThresholdDecision z = select_threshold(vec({0.0, 0.0, 4.0}), 1.0);
  CHECK(z.threshold == 4.0);
  CHECK(z.rejected == IndexSet{2});

  CHECK_THROWS_AS(select_threshold(vec({1.0}), 0.0), ContractError);
  CHECK_THROWS_AS(select_threshold(vec({1.0}), 1.5), ContractError);
}

TEST_CASE("select_threshold agrees with brute force and a dense grid") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector t = mixed_statistics(rng, 200);
    for (const double beta : {0.05, 0.1, 0.2}) {
      const ThresholdDecision d = select_threshold(t, beta);
      CHECK(d.threshold == brute_threshold(t, beta));
      CHECK(d.rejected == grid_scan(t, beta, 20000));
      if (std::isfinite(d.threshold)) {
        double pos = 0, neg = 0;
        for (Eigen::Index i = 0; i < t.size(); ++i) {
          if (t(i) >= d.threshold) ++pos;
          if (t(i) <= -d.threshold) ++neg;
        }
        CHECK((1.0 + neg) / std::max(pos, 1.0) <= beta);
      }
    }
  }
}

TEST_CASE("decisions are invariant to positive rescaling") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> log_scale(-6.0, 6.0);
  const Vector t = mixed_statistics(rng, 300);
  const ThresholdDecision base = select_threshold(t, 0.1);
  REQUIRE(std::isfinite(base.threshold));
  for (int k = 0; k < 100; ++k) {
    const double c = std::exp(log_scale(rng));
    const ThresholdDecision d = select_threshold(c * t, 0.1);
    CHECK(d.rejected == base.rejected);
    CHECK(d.threshold == doctest::Approx(c * base.threshold).epsilon(1e-12));
  }
}

TEST_CASE("evaluate") {
  const FdrMetrics none = evaluate(IndexSet{}, IndexSet{0, 1}, 5);
  CHECK(none.fdp == 0.0);
  CHECK(none.power == 0.0);
  const FdrMetrics exact = evaluate(IndexSet{0, 1}, IndexSet{0, 1}, 5);
  CHECK(exact.fdp == 0.0);
  CHECK(exact.power == 1.0);
  const FdrMetrics extra = evaluate(IndexSet{0, 1, 2}, IndexSet{0, 1}, 5);
  CHECK(extra.fdp == doctest::Approx(1.0 / 3.0));
  CHECK(extra.power == 1.0);
  CHECK(extra.v_count == 1);
  CHECK(extra.r_count == 3);
  CHECK_THROWS_AS(evaluate(IndexSet{7}, IndexSet{0}, 5), ContractError);
}

TEST_CASE("negative-control alpha on a noiseless null panel") {
  std::mt19937_64 rng(33);
  const Eigen::Index p = 40, n = 60;
  const Matrix f = gaussian(n, 2, rng).array() + 0.3;
  Matrix fc = gaussian(n, 2, rng);
  fc.col(0).array() += 0.7;
  fc.col(1) += 0.4 * f.col(0);
  const Matrix x = gaussian(p, 2, rng) * f.transpose() + gaussian(p, 2, rng) * fc.transpose();
  EstimationOptions est;
  est.rank = 2;
  const AlphaFit fit = estimate_alpha(x, f, est);
  NegativeControlConfig cfg;
  cfg.mode = NegativeControlConfig::Mode::explicit_set;
  for (const IndexSet& s : {IndexSet{0, 1, 2}, IndexSet{5, 9, 17, 33, 38}}) {
    cfg.explicit_indices = s;
    CHECK(negative_control_alpha(fit, cfg).norm() < 1e-8);
  }
  cfg.explicit_indices = {3, 4};
  CHECK_THROWS_AS(negative_control_alpha(fit, cfg), ContractError);
  cfg.explicit_indices = {3, 4, 99};
  CHECK_THROWS_AS(negative_control_alpha(fit, cfg), ContractError);
}

TEST_CASE("threshold rule reports an empty negative-control set") {
  AlphaFit fit = fake_fit(Vector::Constant(10, 5.0));
  fit.latent.loadings = Matrix::Ones(10, 1);
  fit.adjusted_mean = fit.alpha;
  NegativeControlConfig cfg;
  try {
    (void)negative_control_alpha(fit, cfg);
    FAIL("expected a contract error");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("gamma_scale") != std::string::npos);
  }
  CHECK(negative_control_gamma(100, 1.0) == doctest::Approx(std::log(100.0) / 10.0));
  cfg.sample_size = 400;
  fit.alpha(0) = 0.25;
  CHECK(negative_control_set(fit, cfg) == IndexSet{0});
}

TEST_CASE("negative control removes the dense-alpha bias") {
  SimulationScenario s = table1_normal_scenario(0.5);
  s.pi = 0.4;
  s.alpha_layout = AlphaLayout::one_sided;
  const int reps = 300;
  Vector plain = Vector::Zero(s.p), corrected = Vector::Zero(s.p);
  Vector alpha;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(replication_seed(s.seed, static_cast<std::uint64_t>(rep)));
    const GeneratedPanel g = generate_panel(s, rng);
    const AlphaFit fit = estimate_alpha(g.returns, g.observed_factors);
    NegativeControlConfig cfg;
    cfg.mode = NegativeControlConfig::Mode::explicit_set;
    for (int i = 0; i < s.p; ++i) {
      if (g.oracle.alpha(i) == 0.0) cfg.explicit_indices.push_back(i);
    }
    plain += fit.alpha;
    corrected += negative_control_alpha(fit, cfg);
    alpha = g.oracle.alpha;
  }
  const double bias_plain = (plain / reps - alpha).norm();
  const double bias_corrected = (corrected / reps - alpha).norm();
  MESSAGE("bias norms: plain " << bias_plain << ", corrected " << bias_corrected);
  CHECK(bias_plain >= 3.0 * bias_corrected);
}

TEST_CASE("threshold rule agrees with the true-null set under sparse alpha") {
  SimulationScenario s = table1_normal_scenario(0.3);
  s.p = 10000;
  s.n = 400;
  double total = 0.0;
  for (const std::uint64_t seed : {34, 35, 36, 37}) {
    Rng rng(seed);
    const GeneratedPanel g = generate_panel(s, rng);
    const AlphaFit fit = estimate_alpha(g.returns, g.observed_factors);
    NegativeControlConfig truth;
    truth.mode = NegativeControlConfig::Mode::explicit_set;
    for (int i = 0; i < s.p; ++i) {
      if (g.oracle.alpha(i) == 0.0) truth.explicit_indices.push_back(i);
    }
    // gamma_scale giving |S| close to 0.8 p.
    Vector mags = fit.alpha.cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size());
    const double gamma_target = mags(static_cast<Eigen::Index>(0.8 * s.p) - 1);
    NegativeControlConfig rule;
    rule.gamma_scale = gamma_target / negative_control_gamma(s.n, 1.0);
    const auto size = static_cast<double>(negative_control_set(fit, rule).size());
    CHECK(std::abs(size - 0.8 * s.p) <= 1.0);
    const Vector diff = negative_control_alpha(fit, rule) - negative_control_alpha(fit, truth);
    const double rms = diff.norm() / std::sqrt(static_cast<double>(s.p));
    MESSAGE("rms difference " << rms);
    total += rms;
  }
  CHECK(total / 4.0 < 1e-3);
}

TEST_CASE("null product statistics are symmetric, signals are of order n alpha^2") {
  SimulationScenario s = table1_normal_scenario(0.3);
  s.p = 500;
  std::vector<double> null_abs, signal;
  double positive = 0, total = 0;
  for (int rep = 0; rep < 10; ++rep) {
    Rng rng(5000 + static_cast<std::uint64_t>(rep));
    const GeneratedPanel g = generate_panel(s, rng);
    const SplitTestResult r = split_statistics(g.returns, g.observed_factors);
    for (int i = 0; i < s.p; ++i) {
      if (g.oracle.alpha(i) == 0.0) {
        null_abs.push_back(std::abs(r.t_prod(i)));
        positive += r.t_prod(i) > 0.0;
        ++total;
      } else {
        signal.push_back(r.t_prod(i));
      }
    }
  }
  const double frac = positive / total;
  CHECK(frac >= 0.45);
  CHECK(frac <= 0.55);
  std::nth_element(signal.begin(), signal.begin() + signal.size() / 2, signal.end());
  std::nth_element(null_abs.begin(), null_abs.begin() + null_abs.size() / 2, null_abs.end());
  const double med_signal = signal[signal.size() / 2];
  const double med_null = null_abs[null_abs.size() / 2];
  MESSAGE("median signal t_prod " << med_signal << ", median null |t_prod| " << med_null);
  CHECK(med_signal > 12.0);
  CHECK(med_signal < 27.0);
  CHECK(med_signal > 10.0 * med_null);
}
