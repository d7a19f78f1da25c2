#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "alphascreen/study.hpp"

namespace py = pybind11;
using namespace alphascreen;

namespace {

SimulationScenario resolve_scenario(const std::string& name_or_json, std::optional<double> nu) {
  SimulationScenario s;
  if (name_or_json == "table1_normal") s = table1_normal_scenario();
  else if (name_or_json == "table1_lognormal") s = table1_lognormal_scenario();
  else if (name_or_json == "table2") s = table2_scenario();
  else if (name_or_json == "figure1") s = figure1_scenario();
  else if (name_or_json == "dense_alpha") s = dense_alpha_scenario();
  else s = scenario_from_json(name_or_json);
  if (nu) s.nu = *nu;
  return s;
}

py::dict pvalue_dict(const PValueResult& r) {
  py::dict d;
  d["p_values"] = r.p_values;
  d["statistics"] = r.statistics;
  return d;
}

}  // namespace

PYBIND11_MODULE(_alphascreen, m) {
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<SingularityError>(m, "SingularityError", PyExc_ArithmeticError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

  m.def(
      "estimate_alpha",
      [](const Matrix& x, const Matrix& f, std::optional<int> rank) {
        EstimationOptions opts;
        opts.rank = rank;
        const AlphaFit fit = estimate_alpha(x, f, opts);
        py::dict d;
        d["alpha"] = fit.alpha;
        d["rank"] = fit.latent.rank;
        d["residuals"] = fit.residuals;
        return d;
      },
      py::arg("returns"), py::arg("factors"), py::arg("rank") = py::none(),
      "Alpha estimates from a p x n return matrix and an n x r factor matrix.");

  m.def(
      "split_statistics",
      [](const Matrix& x, const Matrix& f, double beta, bool studentize) {
        SplitOptions opts;
        opts.studentize = studentize;
        SplitTestResult r = split_statistics(x, f, opts);
        apply_threshold(r, beta);
        py::dict d;
        d["t1"] = r.t1;
        d["t2"] = r.t2;
        d["t_prod"] = r.t_prod;
        d["threshold"] = r.threshold;
        d["rejected"] = r.rejected;
        return d;
      },
      py::arg("returns"), py::arg("factors"), py::arg("beta") = 0.1,
      py::arg("studentize") = false);

  m.def(
      "select_threshold",
      [](const Vector& t_prod, double beta) {
        const ThresholdDecision d = select_threshold(t_prod, beta);
        return py::make_tuple(d.threshold, d.rejected);
      },
      py::arg("t_prod"), py::arg("beta"));

  m.def("bh_procedure", &bh_procedure, py::arg("p_values"), py::arg("beta"));

  m.def(
      "sbh_statistics",
      [](const Matrix& x, const Matrix& f) { return pvalue_dict(sbh_statistics(x, f)); },
      py::arg("returns"), py::arg("factors"));
  m.def(
      "sn_statistics",
      [](const Matrix& x, const Matrix& f, int paths) {
        SnOptions opts;
        opts.mc_paths = paths;
        return pvalue_dict(sn_statistics(x, f, opts));
      },
      py::arg("returns"), py::arg("factors"), py::arg("mc_paths") = SnLimitLaw::kDefaultPaths);

  m.def(
      "run_method",
      [](const Matrix& x, const Matrix& f, const std::string& method, double beta) {
        const Selection s = run_methods(x, f, {parse_method(method)}, {beta}).front();
        py::dict d;
        d["alpha_hat"] = s.alpha_hat;
        d["statistic"] = s.statistic;
        d["rejected"] = s.rejected;
        d["threshold"] = s.threshold;
        return d;
      },
      py::arg("returns"), py::arg("factors"), py::arg("method") = "yd", py::arg("beta") = 0.1);

  m.def(
      "generate_panel",
      [](const std::string& scenario, std::uint64_t seed, std::optional<double> nu) {
        const SimulationScenario s = resolve_scenario(scenario, nu);
        Rng rng(seed);
        const GeneratedPanel g = generate_panel(s, rng);
        py::dict d;
        d["returns"] = g.returns.values();
        d["factors"] = g.observed_factors.values();
        d["alpha"] = g.oracle.alpha;
        d["truth"] = g.truth;
        return d;
      },
      py::arg("scenario") = "table1_normal", py::arg("seed") = 0, py::arg("nu") = py::none());

  m.def(
      "run_study",
      [](const std::string& scenario, const std::vector<std::string>& methods,
         const std::vector<double>& betas, int replications, int threads,
         std::optional<std::uint64_t> seed, std::optional<double> nu) {
        SimulationScenario s = resolve_scenario(scenario, nu);
        if (seed) s.seed = *seed;
        StudyOptions opts;
        opts.methods.clear();
        for (const auto& label : methods) opts.methods.push_back(parse_method(label));
        opts.betas = betas;
        opts.replications = replications;
        opts.threads = threads;
        StudyResult result;
        {
          py::gil_scoped_release release;
          result = run_study(s, opts);
        }
        py::list rows;
        for (const auto& r : result.reports) {
          py::dict d;
          d["method"] = r.method;
          d["beta"] = r.beta;
          d["mean_fdr"] = r.mean_fdr;
          d["sd_fdr"] = r.sd_fdr;
          d["mean_power"] = r.mean_power;
          d["sd_power"] = r.sd_power;
          d["replications"] = r.replications;
          d["failures"] = r.failures;
          rows.append(d);
        }
        return rows;
      },
      py::arg("scenario") = "table1_normal", py::arg("methods") = std::vector<std::string>{"yd"},
      py::arg("betas") = std::vector<double>{0.05, 0.1, 0.15}, py::arg("replications") = 20,
      py::arg("threads") = 1, py::arg("seed") = py::none(), py::arg("nu") = py::none());

  m.def("scenario_json", [](const std::string& scenario) {
    return scenario_to_json(resolve_scenario(scenario, std::nullopt));
  });
}
