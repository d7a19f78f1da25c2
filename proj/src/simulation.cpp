#include "alphascreen/simulation.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace alphascreen {

namespace {

using nlohmann::json;

const double kLognormalMean = std::exp(0.5);
const double kLognormalSd = std::sqrt((std::exp(1.0) - 1.0) * std::exp(1.0));

bool is_positive_definite(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if ((m - m.transpose()).norm() > 1e-10 * std::max(1.0, m.norm())) {
    return false;
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return false;
  return llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0;
}

Matrix cholesky(const Matrix& m, const char* what) {
  if (!is_positive_definite(m)) {
    throw ConfigError(std::string(what) + " is not positive definite");
  }
  return Eigen::LLT<Matrix>(m).matrixL();
}

double spectral_radius_of_companion(const std::vector<double>& first_row) {
  const auto k = static_cast<Eigen::Index>(first_row.size());
  if (k == 0) return 0.0;
  Matrix c = Matrix::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) c(0, j) = first_row[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < k; ++i) c(i, i - 1) = 1.0;
  Eigen::EigenSolver<Matrix> es(c, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Standard normal, standardized log-normal, both with unit variance.
double draw_innovation(TemporalMode mode, std::normal_distribution<double>& normal,
                       Rng& rng) {
  const double z = normal(rng);
  if (mode == TemporalMode::iid_lognormal) {
    return (std::exp(z) - kLognormalMean) / kLognormalSd;
  }
  return z;
}

Matrix iid_draws(Eigen::Index rows, Eigen::Index cols, TemporalMode mode,
                 Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      out(i, j) = draw_innovation(mode, normal, rng);
    }
  }
  return out;
}

}  // namespace

Vector SimulationScenario::factor_mean_or_zero() const {
  if (factor_mean.size() == 0) return Vector::Zero(r_total);
  return factor_mean;
}

void SimulationScenario::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (p < 1) fail("p must be at least 1");
  if (r_total < 1) fail("r_total must be at least 1");
  if (r_observed < 0 || r_observed > r_total) {
    fail("r_observed must lie in [0, r_total]");
  }
  if (n < 2 * (r_observed + 3)) {
    fail("n must be at least 2 * (r_observed + 3) for the split procedure");
  }
  const Eigen::Index r = r_total;
  if (factor_cov.rows() != r || factor_cov.cols() != r) {
    fail("factor_cov must be r_total x r_total");
  }
  if (!is_positive_definite(factor_cov)) fail("factor_cov is not positive definite");
  if (factor_mean.size() != 0 && factor_mean.size() != r) {
    fail("factor_mean must have r_total entries");
  }
  if (loading_mean.size() != r) fail("loading_mean must have r_total entries");
  if (loading_cov.rows() != r || loading_cov.cols() != r) {
    fail("loading_cov must be r_total x r_total");
  }
  if (!loading_cov.isZero(0.0) && !is_positive_definite(loading_cov)) {
    fail("loading_cov is not positive definite");
  }
  if (!(error_cov_rho >= 0.0 && error_cov_rho < 1.0)) {
    fail("error_cov_rho must lie in [0, 1)");
  }
  if (hetero_variances && !(hetero_lo > 0.0 && hetero_hi >= hetero_lo)) {
    fail("hetero_variances range must satisfy 0 < lo <= hi");
  }
  if (!(pi >= 0.0 && pi <= 1.0)) fail("pi must lie in [0, 1]");
  if (!(nu >= 0.0)) fail("nu must be nonnegative");
  if (pi * p < 2.0) fail("pi * p must be at least 2");
  if (!garch_params.empty() && static_cast<int>(garch_params.size()) != r_total) {
    fail("garch_params needs one entry per factor");
  }
  for (const auto& g : garch_params) {
    if (!(g.omega > 0.0) || g.a1 < 0.0 || g.b1 < 0.0 || !(g.a1 + g.b1 < 1.0)) {
      fail("GARCH parameters must satisfy omega > 0, a1, b1 >= 0, a1 + b1 < 1");
    }
  }
  double total = 0.0;
  for (const auto& c : arma_mixture) {
    if (!(c.weight >= 0.0 && c.weight <= 1.0)) fail("ARMA weight outside [0, 1]");
    if (!(c.innovation_sd > 0.0)) fail("ARMA innovation_sd must be positive");
    validate_arma(c.ar, c.ma);
    total += c.weight;
  }
  if (total > 1.0 + 1e-12) fail("ARMA mixture weights sum above 1");
}

double PopulationOracle::variance_inflation() const {
  double v = 1.0;
  if (latent_premium.size() > 0) {
    v += latent_premium.dot(latent_cov.ldlt().solve(latent_premium));
  }
  if (observed_mean.size() > 0) {
    v += observed_mean.dot(observed_cov.ldlt().solve(observed_mean));
  }
  return v;
}

Vector PopulationOracle::iid_asymptotic_variance() const {
  return error_sd.array().square() * variance_inflation();
}

Vector make_alpha(int p, double pi, double nu, AlphaLayout layout) {
  if (p < 0) throw ContractError("p must be nonnegative");
  if (!(pi >= 0.0 && pi <= 1.0)) throw ContractError("pi must lie in [0, 1]");
  if (!(nu >= 0.0)) throw ContractError("nu must be nonnegative");
  Vector alpha = Vector::Zero(p);
  const auto total = static_cast<int>(std::floor(pi * p));
  const int positive =
      layout == AlphaLayout::symmetric
          ? static_cast<int>(std::floor(pi * p / 2.0))
          : total;
  for (int i = 0; i < total; ++i) alpha(i) = i < positive ? nu : -nu;
  return alpha;
}

Matrix sample_loadings(int p, const Vector& mean, const Matrix& cov, Rng& rng) {
  const Eigen::Index r = mean.size();
  if (cov.rows() != r || cov.cols() != r) {
    throw DimensionError("loading covariance does not match mean length");
  }
  Matrix out(p, r);
  if (cov.isZero(0.0)) {
    out.rowwise() = mean.transpose();
    return out;
  }
  if (!is_positive_definite(cov)) {
    throw ContractError("loading covariance is not positive definite");
  }
  const Matrix l = Eigen::LLT<Matrix>(cov).matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(r);
  for (int i = 0; i < p; ++i) {
    for (Eigen::Index k = 0; k < r; ++k) z(k) = normal(rng);
    out.row(i) = (mean + l * z).transpose();
  }
  return out;
}

ToeplitzFactor::ToeplitzFactor(int p, double rho) : p_(p), rho_(rho) {
  if (p < 1) throw DimensionError("Toeplitz factor needs p >= 1");
  if (!(std::abs(rho) < 1.0)) throw ContractError("|rho| must be below 1");
}

Matrix ToeplitzFactor::apply(const Matrix& z) const {
  if (z.rows() != p_) throw DimensionError("Toeplitz factor size mismatch");
  Matrix e(z.rows(), z.cols());
  const double scale = std::sqrt(1.0 - rho_ * rho_);
  e.row(0) = z.row(0);
  for (Eigen::Index i = 1; i < z.rows(); ++i) {
    e.row(i) = rho_ * e.row(i - 1) + scale * z.row(i);
  }
  return e;
}

ToeplitzFactor toeplitz_error_cov(int p, double rho) {
  return ToeplitzFactor(p, rho);
}

Matrix simulate_garch(int n, const std::vector<GarchParams>& params, Rng& rng) {
  const auto r = static_cast<Eigen::Index>(params.size());
  for (const auto& g : params) {
    if (!(g.omega > 0.0) || g.a1 < 0.0 || g.b1 < 0.0 || !(g.a1 + g.b1 < 1.0)) {
      throw ContractError("nonstationary or invalid GARCH(1,1) parameters");
    }
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const auto& g = params[static_cast<std::size_t>(k)];
    double h = g.omega / (1.0 - g.a1 - g.b1);
    double x_prev_sq = h;
    for (int t = -kGarchBurnIn; t < n; ++t) {
      h = g.omega + g.a1 * x_prev_sq + g.b1 * h;
      const double x = std::sqrt(h) * normal(rng);
      x_prev_sq = x * x;
      if (t >= 0) out(t, k) = x;
    }
  }
  return out;
}

Matrix garch_factors(int n, int r, const std::vector<GarchParams>& params,
                     const Matrix& target_cov, Rng& rng) {
  if (static_cast<int>(params.size()) != r) {
    throw DimensionError("one GARCH parameter set per factor required");
  }
  if (target_cov.rows() != r || target_cov.cols() != r) {
    throw DimensionError("target covariance must be r x r");
  }
  Matrix raw = simulate_garch(n, params, rng);
  for (int k = 0; k < r; ++k) {
    const auto& g = params[static_cast<std::size_t>(k)];
    raw.col(k) /= std::sqrt(g.omega / (1.0 - g.a1 - g.b1));
  }
  const Matrix l = cholesky(target_cov, "target covariance");
  return raw * l.transpose();
}

void validate_arma(const std::vector<double>& ar, const std::vector<double>& ma) {
  if (spectral_radius_of_companion(ar) >= 1.0) {
    throw ConfigError("ARMA component is not stationary");
  }
  std::vector<double> neg_ma(ma.size());
  for (std::size_t j = 0; j < ma.size(); ++j) neg_ma[j] = -ma[j];
  if (spectral_radius_of_companion(neg_ma) >= 1.0) {
    throw ConfigError("ARMA component is not invertible");
  }
}

double arma_unit_variance(const std::vector<double>& ar,
                          const std::vector<double>& ma) {
  // psi-weight expansion of the MA(infinity) representation.
  constexpr int kTerms = 5000;
  std::vector<double> psi(kTerms, 0.0);
  psi[0] = 1.0;
  double total = 1.0;
  for (int j = 1; j < kTerms; ++j) {
    double v = j <= static_cast<int>(ma.size()) ? ma[static_cast<std::size_t>(j - 1)] : 0.0;
    for (int k = 1; k <= std::min<int>(j, static_cast<int>(ar.size())); ++k) {
      v += ar[static_cast<std::size_t>(k - 1)] * psi[static_cast<std::size_t>(j - k)];
    }
    psi[static_cast<std::size_t>(j)] = v;
    total += v * v;
  }
  return total;
}

ArmaMixtureDraw arma_mixture_errors(int n, int p,
                                    const std::vector<ArmaComponent>& mixture,
                                    const Vector& base_sd, Rng& rng) {
  if (base_sd.size() != p) throw DimensionError("base_sd must have p entries");
  double total = 0.0;
  std::vector<double> unit_sd;
  for (const auto& c : mixture) {
    if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
      throw ConfigError("ARMA weight outside [0, 1]");
    }
    if (!(c.innovation_sd > 0.0)) throw ConfigError("innovation_sd must be positive");
    validate_arma(c.ar, c.ma);
    total += c.weight;
    unit_sd.push_back(c.innovation_sd * std::sqrt(arma_unit_variance(c.ar, c.ma)));
  }
  if (total > 1.0 + 1e-12) throw ConfigError("ARMA mixture weights sum above 1");

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  ArmaMixtureDraw out;
  out.errors.resize(p, n);
  out.component.assign(static_cast<std::size_t>(p), -1);
  std::vector<double> x(static_cast<std::size_t>(n + kArmaBurnIn));
  std::vector<double> eps(x.size());
  for (int i = 0; i < p; ++i) {
    const double u = uniform(rng);
    double acc = 0.0;
    int chosen = -1;
    for (std::size_t c = 0; c < mixture.size(); ++c) {
      acc += mixture[c].weight;
      if (u < acc) {
        chosen = static_cast<int>(c);
        break;
      }
    }
    out.component[static_cast<std::size_t>(i)] = chosen;
    if (chosen < 0) {
      for (int t = 0; t < n; ++t) out.errors(i, t) = base_sd(i) * normal(rng);
      continue;
    }
    const auto& comp = mixture[static_cast<std::size_t>(chosen)];
    const std::size_t len = x.size();
    for (std::size_t t = 0; t < len; ++t) {
      eps[t] = comp.innovation_sd * normal(rng);
      double v = eps[t];
      for (std::size_t k = 1; k <= comp.ar.size() && k <= t; ++k) {
        v += comp.ar[k - 1] * x[t - k];
      }
      for (std::size_t k = 1; k <= comp.ma.size() && k <= t; ++k) {
        v += comp.ma[k - 1] * eps[t - k];
      }
      x[t] = v;
    }
    const double scale = base_sd(i) / unit_sd[static_cast<std::size_t>(chosen)];
    for (int t = 0; t < n; ++t) {
      out.errors(i, t) = scale * x[static_cast<std::size_t>(t + kArmaBurnIn)];
    }
  }
  return out;
}

GeneratedPanel generate_panel(const SimulationScenario& s, Rng& rng) {
  s.validate();
  const int n = s.n;
  const int p = s.p;
  const int r = s.r_total;
  const int r_o = s.r_observed;
  const Vector mean_f = s.factor_mean_or_zero();

  GeneratedPanel g;
  g.oracle.alpha = make_alpha(p, s.pi, s.nu, s.alpha_layout);
  for (int i = 0; i < p; ++i) {
    if (g.oracle.alpha(i) != 0.0) g.truth.push_back(i);
  }

  g.loadings = sample_loadings(p, s.loading_mean, s.loading_cov, rng);

  const Matrix l = cholesky(s.factor_cov, "factor_cov");
  Matrix f;
  if (s.temporal_mode == TemporalMode::garch_arma) {
    std::vector<GarchParams> gp = s.garch_params;
    if (gp.empty()) gp.assign(static_cast<std::size_t>(r), GarchParams{});
    f = garch_factors(n, r, gp, s.factor_cov, rng);
  } else {
    f = iid_draws(n, r, s.temporal_mode, rng) * l.transpose();
  }
  f.rowwise() += mean_f.transpose();
  g.factors = f;

  Matrix unit;
  if (s.temporal_mode == TemporalMode::garch_arma) {
    auto draw = arma_mixture_errors(n, p, s.arma_mixture, Vector::Ones(p), rng);
    unit = std::move(draw.errors);
    g.arma_component = std::move(draw.component);
  } else {
    unit = iid_draws(p, n, s.temporal_mode, rng);
    g.arma_component.assign(static_cast<std::size_t>(p), -1);
  }
  Vector sd = Vector::Ones(p);
  if (s.hetero_variances) {
    std::uniform_real_distribution<double> uniform(s.hetero_lo, s.hetero_hi);
    for (int i = 0; i < p; ++i) sd(i) = std::sqrt(uniform(rng));
  }
  g.errors = sd.asDiagonal() * toeplitz_error_cov(p, s.error_cov_rho).apply(unit);

  Matrix x = g.loadings * f.transpose() + g.errors;
  x.colwise() += g.oracle.alpha;

  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) ids.push_back("e" + std::to_string(i + 1));
  std::vector<std::int64_t> periods(static_cast<std::size_t>(n));
  std::iota(periods.begin(), periods.end(), 1);
  std::vector<std::string> names;
  for (int k = 0; k < r_o; ++k) names.push_back("f" + std::to_string(k + 1));
  g.returns = ReturnPanel(std::move(x), std::move(ids), periods);
  g.observed_factors = FactorPanel(f.leftCols(r_o), std::move(names), periods);

  // Population decomposition F_c = mu + Psi F_o + W.
  const Matrix s_oo = s.factor_cov.topLeftCorner(r_o, r_o);
  const Matrix s_co = s.factor_cov.bottomLeftCorner(r - r_o, r_o);
  const Matrix s_cc = s.factor_cov.bottomRightCorner(r - r_o, r - r_o);
  const Vector mean_o = mean_f.head(r_o);
  const Vector mean_c = mean_f.tail(r - r_o);
  auto& o = g.oracle;
  o.latent_rank = r - r_o;
  o.observed_mean = mean_o;
  o.observed_cov = s_oo;
  if (r_o > 0) {
    const Matrix psi = s_oo.ldlt().solve(s_co.transpose()).transpose();
    o.latent_cov = s_cc - psi * s_co.transpose();
    o.latent_premium = mean_c - psi * mean_o;
  } else {
    o.latent_cov = s_cc;
    o.latent_premium = mean_c;
  }
  o.error_sd = sd;
  return g;
}


std::vector<ArmaComponent> default_arma_mixture() {
  const double w = 0.331 / 8.0;
  return {
      {w, {0.5}, {}, 1.0},
      {w, {}, {-0.3}, 1.0},
      {w, {0.4}, {-0.3}, 1.0},
      {w, {0.2, -0.2}, {}, 1.0},
      {w, {}, {0.3, -0.2}, 1.0},
      {w, {0.5, -0.1}, {-0.3}, 1.0},
      {w, {-0.2}, {0.3, 0.1}, 1.0},
      {w, {0.3, -0.1}, {-0.2, 0.1}, 1.0},
  };
}

namespace {

// Synthetic stand-ins for the seven-factor covariance and loading
// distribution: three observed factors followed by four latent ones.
Matrix default_factor_cov() {
  const Vector sd = (Vector(7) << 3.0, 2.0, 1.5, 2.0, 1.5, 1.2, 1.0).finished();
  Matrix corr = Matrix::Identity(7, 7);
  auto set = [&](int i, int j, double v) { corr(i, j) = corr(j, i) = v; };
  set(0, 1, 0.2);
  set(0, 3, 0.4);
  set(1, 4, 0.3);
  set(2, 5, 0.2);
  set(3, 4, 0.1);
  return sd.asDiagonal() * corr * sd.asDiagonal();
}

SimulationScenario base_scenario(const std::string& name, double nu) {
  SimulationScenario s;
  s.name = name;
  s.factor_cov = default_factor_cov();
  s.loading_mean = (Vector(7) << 0.4, 0.1, 0.05, 0.3, 0.2, 0.1, 0.1).finished();
  const Vector loading_sd =
      (Vector(7) << 0.3, 0.3, 0.3, 0.5, 0.6, 0.7, 0.8).finished();
  s.loading_cov = loading_sd.array().square().matrix().asDiagonal();
  s.nu = nu;
  return s;
}

}  // namespace

SimulationScenario table1_normal_scenario(double nu) {
  return base_scenario("table1_normal", nu);
}

SimulationScenario table1_lognormal_scenario(double nu) {
  auto s = base_scenario("table1_lognormal", nu);
  s.temporal_mode = TemporalMode::iid_lognormal;
  return s;
}

SimulationScenario table2_scenario(double nu) {
  auto s = base_scenario("table2", nu);
  s.temporal_mode = TemporalMode::garch_arma;
  s.garch_params.assign(7, GarchParams{});
  s.arma_mixture = default_arma_mixture();
  return s;
}

SimulationScenario figure1_scenario(double nu) {
  auto s = table2_scenario(nu);
  s.name = "figure1";
  s.hetero_variances = true;
  s.hetero_lo = 1.0;
  s.hetero_hi = 3.0;
  return s;
}

SimulationScenario dense_alpha_scenario() {
  auto s = base_scenario("dense_alpha", 0.5);
  s.pi = 0.4;
  s.alpha_layout = AlphaLayout::one_sided;
  s.loading_mean.tail(4) *= 0.25;
  return s;
}

namespace {

const char* mode_name(TemporalMode m) {
  switch (m) {
    case TemporalMode::iid_normal: return "iid_normal";
    case TemporalMode::iid_lognormal: return "iid_lognormal";
    case TemporalMode::garch_arma: return "garch_arma";
  }
  return "iid_normal";
}

TemporalMode parse_mode(const std::string& s) {
  if (s == "iid_normal") return TemporalMode::iid_normal;
  if (s == "iid_lognormal") return TemporalMode::iid_lognormal;
  if (s == "garch_arma") return TemporalMode::garch_arma;
  throw ConfigError("unknown temporal_mode '" + s + "'");
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out.push_back(to_json(Vector(m.row(i).transpose())));
  }
  return out;
}

Vector vector_from(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError(key + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(key + " must contain numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw ConfigError(key + " must be a nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector row = vector_from(j[static_cast<std::size_t>(i)], key);
    if (row.size() != cols) throw ConfigError(key + " rows differ in length");
    m.row(i) = row.transpose();
  }
  return m;
}

std::vector<double> doubles_from(const json& j, const std::string& key) {
  const Vector v = vector_from(j, key);
  return {v.data(), v.data() + v.size()};
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError("unknown field '" + item.key() + "' in " + where);
  }
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

SimulationScenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  check_keys(j,
             {"name", "n", "p", "r_total", "r_observed", "factor_cov",
              "factor_mean", "loading_mean", "loading_cov", "error_cov_rho",
              "hetero_variances", "pi", "nu", "alpha_layout", "temporal_mode",
              "garch_params", "arma_mixture", "seed"},
             "scenario");
  SimulationScenario s;
  if (j.contains("name")) s.name = required<std::string>(j, "name");
  s.n = required<int>(j, "n");
  s.p = required<int>(j, "p");
  s.r_total = required<int>(j, "r_total");
  s.r_observed = required<int>(j, "r_observed");
  if (!j.contains("factor_cov")) throw ConfigError("missing field 'factor_cov'");
  s.factor_cov = matrix_from(j["factor_cov"], "factor_cov");
  if (j.contains("factor_mean")) s.factor_mean = vector_from(j["factor_mean"], "factor_mean");
  if (!j.contains("loading_mean")) throw ConfigError("missing field 'loading_mean'");
  s.loading_mean = vector_from(j["loading_mean"], "loading_mean");
  if (!j.contains("loading_cov")) throw ConfigError("missing field 'loading_cov'");
  s.loading_cov = matrix_from(j["loading_cov"], "loading_cov");
  s.error_cov_rho = required<double>(j, "error_cov_rho");
  if (j.contains("hetero_variances")) {
    const json& h = j["hetero_variances"];
    if (!h.is_object()) throw ConfigError("hetero_variances must be an object");
    check_keys(h, {"enabled", "range"}, "hetero_variances");
    s.hetero_variances = required<bool>(h, "enabled");
    if (h.contains("range")) {
      const auto range = doubles_from(h["range"], "hetero_variances.range");
      if (range.size() != 2) throw ConfigError("hetero_variances.range needs [lo, hi]");
      s.hetero_lo = range[0];
      s.hetero_hi = range[1];
    }
  }
  s.pi = required<double>(j, "pi");
  s.nu = required<double>(j, "nu");
  if (j.contains("alpha_layout")) {
    const auto layout = required<std::string>(j, "alpha_layout");
    if (layout == "symmetric") {
      s.alpha_layout = AlphaLayout::symmetric;
    } else if (layout == "one_sided") {
      s.alpha_layout = AlphaLayout::one_sided;
    } else {
      throw ConfigError("unknown alpha_layout '" + layout + "'");
    }
  }
  s.temporal_mode = parse_mode(required<std::string>(j, "temporal_mode"));
  if (j.contains("garch_params")) {
    if (!j["garch_params"].is_array()) throw ConfigError("garch_params must be an array");
    for (const auto& g : j["garch_params"]) {
      check_keys(g, {"omega", "a1", "b1"}, "garch_params");
      s.garch_params.push_back(
          {required<double>(g, "omega"), required<double>(g, "a1"), required<double>(g, "b1")});
    }
  }
  if (j.contains("arma_mixture")) {
    if (!j["arma_mixture"].is_array()) throw ConfigError("arma_mixture must be an array");
    for (const auto& c : j["arma_mixture"]) {
      check_keys(c, {"weight", "ar", "ma", "innovation_sd"}, "arma_mixture");
      ArmaComponent comp;
      comp.weight = required<double>(c, "weight");
      if (c.contains("ar")) comp.ar = doubles_from(c["ar"], "ar");
      if (c.contains("ma")) comp.ma = doubles_from(c["ma"], "ma");
      if (c.contains("innovation_sd")) comp.innovation_sd = required<double>(c, "innovation_sd");
      s.arma_mixture.push_back(std::move(comp));
    }
  }
  s.seed = required<std::uint64_t>(j, "seed");
  s.validate();
  return s;
}

SimulationScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const SimulationScenario& s) {
  json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["n"] = s.n;
  j["p"] = s.p;
  j["r_total"] = s.r_total;
  j["r_observed"] = s.r_observed;
  j["factor_cov"] = to_json(s.factor_cov);
  if (s.factor_mean.size() > 0) j["factor_mean"] = to_json(s.factor_mean);
  j["loading_mean"] = to_json(s.loading_mean);
  j["loading_cov"] = to_json(s.loading_cov);
  j["error_cov_rho"] = s.error_cov_rho;
  j["hetero_variances"] = {{"enabled", s.hetero_variances},
                           {"range", {s.hetero_lo, s.hetero_hi}}};
  j["pi"] = s.pi;
  j["nu"] = s.nu;
  j["alpha_layout"] =
      s.alpha_layout == AlphaLayout::symmetric ? "symmetric" : "one_sided";
  j["temporal_mode"] = mode_name(s.temporal_mode);
  j["garch_params"] = json::array();
  for (const auto& g : s.garch_params) {
    j["garch_params"].push_back({{"omega", g.omega}, {"a1", g.a1}, {"b1", g.b1}});
  }
  j["arma_mixture"] = json::array();
  for (const auto& c : s.arma_mixture) {
    j["arma_mixture"].push_back({{"weight", c.weight},
                                 {"ar", c.ar},
                                 {"ma", c.ma},
                                 {"innovation_sd", c.innovation_sd}});
  }
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

}  // namespace alphascreen
