// Python bindings. Models, regions and experiment configs cross the boundary
// as JSON text (the same schema the CLI reads); the Python package wraps this
// so callers pass plain dicts.

#include <algorithm>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "delaysde/errors.hpp"
#include "delaysde/inference.hpp"
#include "delaysde/io.hpp"
#include "delaysde/limit_process.hpp"
#include "delaysde/mc_harness.hpp"
#include "delaysde/sdde_sim.hpp"
#include "delaysde/spectral.hpp"

namespace py = pybind11;
using namespace delaysde;

namespace {

CharacteristicModel model_of(const std::string& text) {
  return io::model_from_json(io::json::parse(text));
}

SearchRegion region_of(const CharacteristicModel& m, const std::optional<std::string>& text) {
  return text ? io::region_from_json(io::json::parse(*text)) : default_region(m);
}

py::dict stats_dict(const SufficientStats& s) {
  py::dict d;
  d["I1"] = s.I1;
  d["I2"] = s.I2;
  d["I3"] = s.I3 ? py::cast(*s.I3) : py::none();
  d["T"] = s.horizon;
  return d;
}

SufficientStats stats_of(const py::dict& d) {
  SufficientStats s;
  s.I1 = d["I1"].cast<double>();
  s.I2 = d["I2"].cast<double>();
  if (d.contains("I3") && !d["I3"].is_none()) s.I3 = d["I3"].cast<double>();
  if (d.contains("T")) s.horizon = d["T"].cast<double>();
  return s;
}

// Leaked on purpose: they must outlive interpreter shutdown.
py::exception<Error>* error_type = nullptr;
py::exception<InvalidArgument>* invalid_type = nullptr;
py::exception<NumericalFailure>* numerical_type = nullptr;

void translate(std::exception_ptr p) {
  try {
    if (p) std::rethrow_exception(p);
  } catch (const InvalidArgument& e) {
    py::set_error(*invalid_type, e.what());
  } catch (const NumericalFailure& e) {
    py::set_error(*numerical_type, e.what());
  } catch (const Error& e) {
    py::set_error(*error_type, e.what());
  } catch (const io::json::exception& e) {
    py::set_error(*invalid_type, e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compiled core of the delaysde package";

  error_type = new py::exception<Error>(m, "Error", PyExc_RuntimeError);
  invalid_type = new py::exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  numerical_type = new py::exception<NumericalFailure>(m, "NumericalFailure", error_type->ptr());
  py::register_exception_translator(&translate);

  py::class_<SamplePath>(m, "SamplePath")
      .def_property_readonly("dt", [](const SamplePath& p) { return p.grid.dt; })
      .def_property_readonly("steps", [](const SamplePath& p) { return p.grid.steps; })
      .def_property_readonly("delay_steps", [](const SamplePath& p) { return p.grid.delay_steps; })
      .def_property_readonly("horizon", [](const SamplePath& p) { return p.grid.horizon(); })
      .def_property_readonly("x", [](const SamplePath& p) { return p.x; },
                             "Values from -r to T, history included")
      .def_property_readonly("noise", [](const SamplePath& p) { return p.noise; })
      .def("to_csv", [](const SamplePath& p, const std::string& model) {
        return io::path_to_csv(p, model_of(model).measure);
      })
      .def_static("from_csv", &io::path_from_csv);

  m.def("char_eval", [](const std::string& model, cdouble z) { return char_eval(model_of(model), z); },
        py::arg("model"), py::arg("z"));

  m.def(
      "find_roots",
      [](const std::string& model, const std::optional<std::string>& region) {
        const CharacteristicModel cm = model_of(model);
        const RootSearch s = find_roots(cm, region_of(cm, region));
        std::vector<std::pair<cdouble, int>> out;
        for (const Root& r : s.roots) out.emplace_back(r.lambda, r.multiplicity);
        return out;
      },
      py::arg("model"), py::arg("region") = py::none());

  m.def(
      "analyze",
      [](const std::string& model, const std::optional<std::string>& region) {
        const CharacteristicModel cm = model_of(model);
        SpectralSummary s = region ? classify(cm, region_of(cm, region)) : classify(cm);
        return io::summary_to_json(s, cm.theta).dump();
      },
      py::arg("model"), py::arg("region") = py::none());

  m.def(
      "scaling_r",
      [](const std::string& model, double horizon) { return scaling_r(classify(model_of(model)), horizon); },
      py::arg("model"), py::arg("horizon"));

  m.def(
      "simulate",
      [](const std::string& model, double horizon, double dt, std::uint64_t seed,
         std::uint32_t replication, const std::string& x0) {
        const CharacteristicModel cm = model_of(model);
        py::gil_scoped_release release;
        return simulate_sdde(cm, io::initial_segment_from_json(io::json::parse(x0)), horizon, dt,
                             StreamKey{seed, replication, streams::kSddePath});
      },
      py::arg("model"), py::arg("horizon"), py::arg("dt"), py::arg("seed") = 0,
      py::arg("replication") = 0, py::arg("x0") = "0");

  m.def(
      "sufficient_stats",
      [](const SamplePath& path, const std::string& model) {
        return stats_dict(sufficient_stats(path, model_of(model).measure));
      },
      py::arg("path"), py::arg("model"));

  m.def(
      "loglik_ratio",
      [](const py::dict& stats, double theta, double theta_prime) {
        return loglik_ratio(stats_of(stats), theta, theta_prime);
      },
      py::arg("stats"), py::arg("theta"), py::arg("theta_prime"));

  m.def(
      "delta_J",
      [](const py::dict& stats, double theta, double r_scale) {
        const ScoreAndInformation dj = delta_J(stats_of(stats), theta, r_scale);
        return std::pair{dj.delta, dj.info};
      },
      py::arg("stats"), py::arg("theta"), py::arg("r_scale"));

  m.def(
      "mle_theta", [](const py::dict& stats) { return mle_theta(stats_of(stats)); }, py::arg("stats"));

  m.def(
      "mle_alpha",
      [](const py::dict& stats, double theta_base, double r_scale) {
        return mle_alpha(stats_of(stats), theta_base, r_scale);
      },
      py::arg("stats"), py::arg("theta_base"), py::arg("r_scale"));

  m.def(
      "limit_replication",
      [](const std::string& model, double alpha, double dt, std::uint64_t seed, std::uint32_t replication) {
        const SpectralSummary s = classify(model_of(model));
        const std::vector<RootRecord> roots = limit_roots(s);
        py::gil_scoped_release release;
        const auto paths = simulate_limit_experiment(roots, *s.m_star, alpha, dt, seed, replication);
        const LimitStatistics st = limit_delta_J(paths);
        return std::tuple{limit_mle_alpha(paths), st.delta, st.info};
      },
      py::arg("model"), py::arg("alpha"), py::arg("dt") = 1e-3, py::arg("seed") = 0,
      py::arg("replication") = 0, "(alpha_hat, Delta, J) for one draw of the limit system");

  m.def(
      "mc_alpha_hat",
      [](const std::string& config) {
        const ExperimentConfig c = io::experiment_from_json(io::json::parse(config));
        std::map<double, std::vector<double>> out;
        py::gil_scoped_release release;
        for (auto& [t, sample] : mc_alpha_hat(c)) out[t] = sample.values;
        return out;
      },
      py::arg("config"), "Sorted alpha_hat_T samples keyed by horizon (failed replications dropped)");

  m.def(
      "mc_limit_alpha_hat",
      [](const std::string& config) {
        const ExperimentConfig c = io::experiment_from_json(io::json::parse(config));
        py::gil_scoped_release release;
        return mc_limit_alpha_hat(c).values;
      },
      py::arg("config"));

  m.def(
      "martingale_mean_check",
      [](const std::string& config, double horizon) {
        const ExperimentConfig c = io::experiment_from_json(io::json::parse(config));
        MartingaleCheck r;
        {
          py::gil_scoped_release release;
          r = martingale_mean_check(c, horizon);
        }
        py::dict d;
        d["mean"] = r.mean;
        d["standard_error"] = r.standard_error;
        d["count"] = r.count;
        d["flagged"] = r.flagged;
        return d;
      },
      py::arg("config"), py::arg("horizon"));

  m.def(
      "ar1_baseline",
      [](double h, int n, int replications, std::uint64_t seed, double ou_dt, unsigned threads) {
        py::gil_scoped_release release;
        BaselineSamples b = ar1_baseline(h, n, replications, seed, ou_dt, threads);
        return std::pair{b.lse.values, b.ou_mle.values};
      },
      py::arg("h"), py::arg("n"), py::arg("replications"), py::arg("seed") = 0,
      py::arg("ou_dt") = 1e-3, py::arg("threads") = 0);

  m.def(
      "ks_two_sample",
      [](std::vector<double> a, std::vector<double> b) {
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return ks_two_sample(a, b);
      },
      py::arg("a"), py::arg("b"));
}
