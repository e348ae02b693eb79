#include "delaysde/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "delaysde/errors.hpp"
#include "delaysde/inference.hpp"
#include "delaysde/io.hpp"
#include "delaysde/limit_process.hpp"
#include "delaysde/mc_harness.hpp"

namespace delaysde::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

struct Options {
  std::optional<std::uint64_t> seed;
  std::string out;

  std::string model_path;
  std::optional<double> re_min, re_max, im_max;

  double horizon = 10.0;
  double dt = 0.01;
  double x0 = 0.0;

  std::string path_csv;
  std::optional<double> theta_base;
  std::optional<double> r_scale;

  std::string report_path;
  double alpha = 0.0;
  double limit_dt = 1e-3;
  int reps = 1000;

  std::string config_path;
  std::optional<unsigned> threads;

  double h = 0.0;
  int n = 500;
  double ou_dt = 1e-3;
  std::optional<double> ks_max;
};

class ThresholdViolation : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_cell(std::optional<double> v) { return v ? io::format_double(*v) : ""; }

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
  } else {
    io::write_text_file(o.out, text);
  }
}

fs::path output_dir(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw InvalidArgument("cannot create output directory " + dir.string());
  return dir;
}

CharacteristicModel load_model(const Options& o) {
  if (!fs::exists(o.model_path)) throw InvalidArgument("model file not found: " + o.model_path);
  return io::model_from_json(io::read_json_file(o.model_path));
}

SearchRegion region_for(const Options& o, const CharacteristicModel& model) {
  SearchRegion region = default_region(model);
  if (o.re_min) region.re_min = *o.re_min;
  if (o.re_max) region.re_max = *o.re_max;
  if (o.im_max) region.im_max = *o.im_max;
  return region;
}

std::string samples_csv(const EmpiricalSample& sample) {
  std::string text = "rep,alpha_hat,status\n";
  for (std::size_t i = 0; i < sample.replications.size(); ++i) {
    const auto& v = sample.replications[i];
    text += std::to_string(i) + ',' + format_cell(v) + ',' + (v ? "ok" : "failed") + '\n';
  }
  return text;
}

std::string horizon_label(double horizon) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", horizon);
  return buffer;
}

int do_analyze(const Options& o, std::ostream& out) {
  const CharacteristicModel model = load_model(o);
  const SpectralSummary summary = classify(model, region_for(o, model));
  emit(o, out, io::summary_to_json(summary, model.theta).dump(2) + "\n");
  return kExitOk;
}

int do_simulate(const Options& o, std::ostream& out) {
  const CharacteristicModel model = load_model(o);
  const StreamKey key{o.seed.value_or(0), 0, streams::kSddePath};
  const SamplePath path =
      simulate_sdde(model, InitialSegment::constant(o.x0), o.horizon, o.dt, key);
  emit(o, out, io::path_to_csv(path, model.measure));
  return kExitOk;
}

int do_infer(const Options& o, std::ostream& out) {
  CharacteristicModel model = load_model(o);
  if (o.theta_base) model.theta = *o.theta_base;
  std::ifstream in(o.path_csv);
  if (!in) throw InvalidArgument("path file not found: " + o.path_csv);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const SamplePath path = io::path_from_csv(text);
  const SufficientStats stats = sufficient_stats(path, model.measure);

  std::optional<double> r = o.r_scale;
  if (!r) {
    const SpectralSummary summary = classify(model, region_for(o, model));
    if (summary.regime == Regime::unstable) r = scaling_r(summary, stats.horizon);
  }
  json report{{"I1", stats.I1},
              {"I2", stats.I2},
              {"I3", stats.I3 ? json(*stats.I3) : json(nullptr)},
              {"T", stats.horizon},
              {"theta_base", model.theta},
              {"theta_hat", mle_theta(stats)},
              {"r_scale", nullptr},
              {"alpha_hat", nullptr},
              {"delta", nullptr},
              {"J", nullptr}};
  if (r) {
    const ScoreAndInformation dj = delta_J(stats, model.theta, *r);
    report["r_scale"] = *r;
    report["alpha_hat"] = mle_alpha(stats, model.theta, *r);
    report["delta"] = dj.delta;
    report["J"] = dj.info;
  }
  emit(o, out, report.dump(2) + "\n");
  return kExitOk;
}

int do_limit(const Options& o, std::ostream& out) {
  if (!fs::exists(o.report_path)) throw InvalidArgument("report file not found: " + o.report_path);
  if (o.reps < 1) throw InvalidArgument("limit: reps must be positive");
  const SpectralSummary summary = io::summary_from_json(io::read_json_file(o.report_path));
  const std::vector<RootRecord> roots = limit_roots(summary);
  const std::uint64_t seed = o.seed.value_or(0);

  std::string text = "rep,Delta,J,alpha_hat\n";
  for (int rep = 0; rep < o.reps; ++rep) {
    const auto paths = simulate_limit_experiment(roots, *summary.m_star, o.alpha, o.limit_dt,
                                                 seed, static_cast<std::uint32_t>(rep));
    const LimitStatistics s = limit_delta_J(paths);
    std::optional<double> alpha_hat;
    if (s.info > 1e-12) alpha_hat = s.score / s.info;
    text += std::to_string(rep) + ',' + io::format_double(s.delta) + ',' +
            io::format_double(s.info) + ',' + format_cell(alpha_hat) + '\n';
  }
  emit(o, out, text);
  return kExitOk;
}

int do_mc(const Options& o, std::ostream& out) {
  if (!fs::exists(o.config_path)) throw InvalidArgument("config file not found: " + o.config_path);
  const json raw = io::read_json_file(o.config_path);
  ExperimentConfig config = io::experiment_from_json(raw);
  if (o.seed) config.seed = *o.seed;
  if (o.threads) config.threads = *o.threads;
  if (config.horizons.empty()) throw InvalidArgument("mc: the config lists no horizons");
  std::optional<double> ks_max = o.ks_max;
  if (!ks_max && raw.contains("thresholds") && raw.at("thresholds").contains("ks_max")) {
    ks_max = raw.at("thresholds").at("ks_max").get<double>();
  }

  const fs::path dir = output_dir(o);
  const auto start = std::chrono::steady_clock::now();
  const auto finite = mc_alpha_hat(config);
  const EmpiricalSample limit = mc_limit_alpha_hat(config);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json ks = json::array();
  json failures = json::array();
  bool violated = false;
  for (const auto& [horizon, sample] : finite) {
    io::write_text_file(dir / ("alpha_hat_T" + horizon_label(horizon) + ".csv"),
                        samples_csv(sample));
    json d = nullptr;
    if (sample.count() > 0 && limit.count() > 0) {
      const double value = ks_two_sample(sample, limit);
      d = value;
      if (ks_max && value > *ks_max) violated = true;
    } else if (ks_max) {
      violated = true;
    }
    ks.push_back(d);
    failures.push_back(sample.failures());
  }
  io::write_text_file(dir / "limit.csv", samples_csv(limit));
  const json summary{{"T", config.horizons},
                     {"N", config.replications},
                     {"alpha", config.alpha},
                     {"seed", config.seed},
                     {"ks", ks},
                     {"failures", failures},
                     {"limit_failures", limit.failures()},
                     {"ks_max", ks_max ? json(*ks_max) : json(nullptr)},
                     {"passed", !violated},
                     {"runtime_s", runtime}};
  io::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  out << summary.dump() << "\n";
  if (violated) throw ThresholdViolation("mc: KS distance above ks_max");
  return kExitOk;
}

int do_baseline(const Options& o, std::ostream& out) {
  const fs::path dir = output_dir(o);
  const std::uint64_t seed = o.seed.value_or(0);
  const unsigned threads = o.threads.value_or(0);
  const auto start = std::chrono::steady_clock::now();
  const BaselineSamples samples = ar1_baseline(o.h, o.n, o.reps, seed, o.ou_dt, threads);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  auto csv = [](const EmpiricalSample& s, const char* column) {
    std::string text = std::string("rep,") + column + ",status\n";
    for (std::size_t i = 0; i < s.replications.size(); ++i) {
      const auto& v = s.replications[i];
      text += std::to_string(i) + ',' + format_cell(v) + ',' + (v ? "ok" : "failed") + '\n';
    }
    return text;
  };
  io::write_text_file(dir / "ar1_lse.csv", csv(samples.lse, "h_hat"));
  io::write_text_file(dir / "ou_mle.csv", csv(samples.ou_mle, "h_hat"));

  json ks = nullptr;
  bool violated = false;
  if (samples.lse.count() > 0 && samples.ou_mle.count() > 0) {
    const double d = ks_two_sample(samples.lse, samples.ou_mle);
    ks = d;
    violated = o.ks_max && d > *o.ks_max;
  } else {
    violated = o.ks_max.has_value();
  }
  const json summary{{"h", o.h},
                     {"n", o.n},
                     {"N", o.reps},
                     {"seed", seed},
                     {"ks", ks},
                     {"failures", {{"ar1", samples.lse.failures()},
                                   {"ou", samples.ou_mle.failures()}}},
                     {"ks_max", o.ks_max ? json(*o.ks_max) : json(nullptr)},
                     {"passed", !violated},
                     {"runtime_s", runtime}};
  io::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  out << summary.dump() << "\n";
  if (violated) throw ThresholdViolation("baseline: KS distance above ks_max");
  return kExitOk;
}

void add_region_flags(CLI::App* sub, Options& o) {
  sub->add_option("--re-min", o.re_min, "Left edge of the root search rectangle");
  sub->add_option("--re-max", o.re_max, "Right edge of the root search rectangle");
  sub->add_option("--im-max", o.im_max, "Half height of the root search rectangle");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic delay equations: spectral analysis, simulation and inference",
               "delaysde"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--seed", o.seed, "Master seed; overrides seeds in config files");

  auto* analyze = app.add_subcommand("analyze", "Characteristic roots and (v*, m*) of a model");
  analyze->add_option("--model", o.model_path, "Model JSON")->required();
  analyze->add_option("-o,--out", o.out, "Report path (stdout when omitted)");
  add_region_flags(analyze, o);

  auto* simulate = app.add_subcommand("simulate", "Euler-Maruyama path as CSV t,X,Y,dW");
  simulate->add_option("--model", o.model_path, "Model JSON")->required();
  simulate->add_option("--T", o.horizon, "Horizon")->capture_default_str();
  simulate->add_option("--dt", o.dt, "Step hint (rounded down to divide r)")->capture_default_str();
  simulate->add_option("--x0", o.x0, "Constant initial segment")->capture_default_str();
  simulate->add_option("-o,--out", o.out, "CSV path (stdout when omitted)");

  auto* infer = app.add_subcommand("infer", "Sufficient statistics and MLEs of a path CSV");
  infer->add_option("--path", o.path_csv, "Path CSV from `simulate`")->required();
  infer->add_option("--model", o.model_path, "Model JSON")->required();
  infer->add_option("--theta-base", o.theta_base, "Base point (default: model theta)");
  infer->add_option("--r-scale", o.r_scale, "Scaling r_T (default: from the spectrum)");
  infer->add_option("-o,--out", o.out, "Report path (stdout when omitted)");
  add_region_flags(infer, o);

  auto* limit = app.add_subcommand("limit", "Limit experiment replications from a report");
  limit->add_option("--report", o.report_path, "Report JSON from `analyze`")->required();
  limit->add_option("--alpha", o.alpha, "Local parameter")->capture_default_str();
  limit->add_option("--dt", o.limit_dt, "Step hint on [0, 1]")->capture_default_str();
  limit->add_option("--reps", o.reps, "Replications")->capture_default_str();
  limit->add_option("-o,--out", o.out, "CSV path (stdout when omitted)");

  auto* mc = app.add_subcommand("mc", "Monte Carlo comparison of alpha_hat_T with the limit");
  mc->add_option("--config", o.config_path, "Experiment JSON")->required();
  mc->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  mc->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  mc->add_option("--ks-max", o.ks_max, "KS threshold (overrides the config)");

  auto* baseline = app.add_subcommand("baseline", "AR(1) near unit root versus OU drift MLE");
  baseline->add_option("--local-h", o.h, "Local parameter h of the AR(1) coefficient 1 + h/n")->capture_default_str();
  baseline->add_option("--n", o.n, "AR(1) sample size")->capture_default_str();
  baseline->add_option("--reps", o.reps, "Replications")->capture_default_str();
  baseline->add_option("--ou-dt", o.ou_dt, "OU Euler step")->capture_default_str();
  baseline->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  baseline->add_option("--ks-max", o.ks_max, "KS threshold");
  baseline->add_option("-o,--out", o.out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*analyze) return do_analyze(o, out);
    if (*simulate) return do_simulate(o, out);
    if (*infer) return do_infer(o, out);
    if (*limit) return do_limit(o, out);
    if (*mc) return do_mc(o, out);
    if (*baseline) return do_baseline(o, out);
  } catch (const ThresholdViolation& e) {
    err << "threshold violated: " << e.what() << "\n";
    return kExitThreshold;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace delaysde::cli
