#include "delaysde/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>

#include "delaysde/errors.hpp"
#include "delaysde/inference.hpp"
#include "delaysde/limit_process.hpp"
#include "parallel.hpp"

namespace delaysde {

namespace {

SpectralSummary unstable_summary(const ExperimentConfig& config) {
  SpectralSummary summary = config.region ? classify(config.model, *config.region)
                                          : classify(config.model);
  if (summary.regime != Regime::unstable) {
    throw WrongRegime("experiment: the base model is " +
                      std::string(to_string(summary.regime)) + ", not unstable");
  }
  return summary;
}

std::size_t replication_count(const ExperimentConfig& config) {
  return static_cast<std::size_t>(config.replications);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (replications < 2) {
    throw InvalidArgument("experiment: N = " + std::to_string(replications) +
                          " (at least 2 replications are needed)");
  }
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0)) throw InvalidArgument("experiment: horizons must be positive");
    if (i > 0 && !(horizons[i] > horizons[i - 1])) {
      throw InvalidArgument("experiment: horizons must be strictly increasing");
    }
  }
  if (!(dt > 0.0)) throw InvalidArgument("experiment: dt must be positive");
  if (!(limit_dt > 0.0) || limit_dt > 1.0) {
    throw InvalidArgument("experiment: limit dt must lie in (0, 1]");
  }
}

EmpiricalSample EmpiricalSample::from_replications(std::vector<std::optional<double>> reps,
                                                   std::uint64_t seed,
                                                   std::optional<double> horizon,
                                                   double dt) {
  EmpiricalSample sample;
  for (const auto& v : reps) {
    if (v) sample.values.push_back(*v);
  }
  std::sort(sample.values.begin(), sample.values.end());
  sample.replications = std::move(reps);
  sample.seed = seed;
  sample.horizon = horizon;
  sample.dt = dt;
  return sample;
}

unsigned resolve_threads(unsigned requested) {
  unsigned threads = requested;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DELAYSDE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) threads = std::min(threads, static_cast<unsigned>(cap));
  }
  return threads;
}

std::map<double, EmpiricalSample> mc_alpha_hat(const ExperimentConfig& config) {
  config.validate();
  const SpectralSummary summary = unstable_summary(config);
  const unsigned threads = resolve_threads(config.threads);
  const std::size_t n = replication_count(config);

  std::map<double, EmpiricalSample> out;
  for (std::size_t h = 0; h < config.horizons.size(); ++h) {
    const double horizon = config.horizons[h];
    const double r_scale = scaling_r(summary, horizon);
    const double theta_base = config.model.theta;
    const CharacteristicModel shifted{config.model.measure,
                                      theta_base + config.alpha * r_scale};
    std::vector<std::optional<double>> reps(n);
    detail::parallel_for(n, threads, [&](std::size_t i) {
      const StreamKey key{config.seed, static_cast<std::uint32_t>(i),
                          streams::kSddePath + static_cast<std::uint32_t>(h)};
      try {
        const SamplePath path = simulate_sdde(shifted, config.x0, horizon, config.dt, key,
                                              SimulationOptions{false});
        reps[i] = mle_alpha(sufficient_stats(path, config.model.measure), theta_base,
                            r_scale);
      } catch (const NumericalFailure&) {
        reps[i].reset();
      }
    });
    out.emplace(horizon, EmpiricalSample::from_replications(std::move(reps), config.seed,
                                                            horizon, config.dt));
  }
  return out;
}

EmpiricalSample mc_limit_alpha_hat(const ExperimentConfig& config) {
  config.validate();
  const SpectralSummary summary = unstable_summary(config);
  const unsigned threads = resolve_threads(config.threads);
  const std::size_t n = replication_count(config);
  const int m_star = *summary.m_star;
  const std::vector<RootRecord> roots = limit_roots(summary);

  std::vector<std::optional<double>> reps(n);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    const auto paths = simulate_limit_experiment(roots, m_star, config.alpha, config.limit_dt,
                                                 config.seed, static_cast<std::uint32_t>(i));
    try {
      reps[i] = limit_mle_alpha(paths);
    } catch (const NumericalFailure&) {
      reps[i].reset();
    }
  });
  return EmpiricalSample::from_replications(std::move(reps), config.seed, std::nullopt,
                                            config.limit_dt);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b) {
  return ks_two_sample(std::span<const double>(a.values), std::span<const double>(b.values));
}

MartingaleCheck exponential_mean(std::span<const double> exponents) {
  MartingaleCheck check;
  check.count = exponents.size();
  if (exponents.empty()) return check;
  double top = exponents.front();
  for (double e : exponents) {
    top = std::max(top, e);
    if (e > 50.0) ++check.flagged;
  }
  // mean = e^top * mean(e^{l - top}); likewise for the second moment.
  double s1 = 0.0;
  double s2 = 0.0;
  for (double e : exponents) {
    const double v = std::exp(e - top);
    s1 += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(exponents.size());
  const double mean_scaled = s1 / n;
  check.mean = std::exp(top) * mean_scaled;
  if (exponents.size() > 1) {
    const double var_scaled =
        std::max(0.0, (s2 - n * mean_scaled * mean_scaled) / (n - 1.0));
    check.standard_error = std::exp(top) * std::sqrt(var_scaled / n);
  }
  return check;
}

MartingaleCheck martingale_mean_check(const ExperimentConfig& config, double horizon) {
  config.validate();
  const SpectralSummary summary = unstable_summary(config);
  const unsigned threads = resolve_threads(config.threads);
  const std::size_t n = replication_count(config);
  const double r_scale = scaling_r(summary, horizon);
  const double alpha = config.alpha;

  std::vector<double> exponents(n);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    if (alpha == 0.0) {
      exponents[i] = 0.0;
      return;
    }
    const StreamKey key{config.seed, static_cast<std::uint32_t>(i), streams::kMartingale};
    const SamplePath path = simulate_sdde(config.model, config.x0, horizon, config.dt, key,
                                          SimulationOptions{false});
    const ScoreAndInformation dj = delta_J(sufficient_stats(path, config.model.measure),
                                           config.model.theta, r_scale);
    exponents[i] = alpha * dj.delta - 0.5 * alpha * alpha * dj.info;
  });
  return exponential_mean(exponents);
}

double ar1_scaled_lse(std::span<const double> shocks, double h) {
  const std::size_t n = shocks.size();
  if (n == 0) throw InvalidArgument("ar1_scaled_lse: no observations");
  const double beta = 1.0 + h / static_cast<double>(n);
  double x = 0.0;
  double num = 0.0;
  double den = 0.0;
  for (double eps : shocks) {
    const double next = beta * x + eps;
    num += x * next;
    den += x * x;
    x = next;
  }
  if (!(den > 0.0)) {
    throw DegenerateDenominator("ar1_scaled_lse: sum of squared lags is zero");
  }
  return static_cast<double>(n) * (num / den - 1.0);
}

double ou_drift_mle(std::span<const double> increments, double h, double dt) {
  double y = 0.0;
  double num = 0.0;
  double den = 0.0;
  for (double dw : increments) {
    const double dy = h * y * dt + dw;
    num += y * dy;
    den += y * y * dt;
    y += dy;
  }
  if (!(den > kDefaultDenominatorFloor)) {
    throw DegenerateDenominator("ou_drift_mle: int Y^2 dt is not above the floor");
  }
  return num / den;
}

BaselineSamples ar1_baseline(double h, int n, int replications, std::uint64_t seed,
                             double ou_dt, unsigned threads) {
  if (n < 1) throw InvalidArgument("ar1_baseline: n must be positive");
  if (replications < 1) throw InvalidArgument("ar1_baseline: N must be positive");
  const int ou_steps = unit_interval_steps(ou_dt);
  const double step = 1.0 / ou_steps;
  const unsigned workers = resolve_threads(threads);
  const auto count = static_cast<std::size_t>(replications);

  std::vector<std::optional<double>> lse(count);
  std::vector<std::optional<double>> ou(count);
  detail::parallel_for(count, workers, [&](std::size_t i) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> shocks(static_cast<std::size_t>(n));
    PhiloxEngine ar_engine(StreamKey{seed, static_cast<std::uint32_t>(i), streams::kAr1Shocks});
    for (double& e : shocks) e = normal(ar_engine);
    try {
      lse[i] = ar1_scaled_lse(shocks, h);
    } catch (const NumericalFailure&) {
      lse[i].reset();
    }

    std::normal_distribution<double> increment(0.0, std::sqrt(step));
    std::vector<double> dw(static_cast<std::size_t>(ou_steps));
    PhiloxEngine ou_engine(StreamKey{seed, static_cast<std::uint32_t>(i), streams::kOuPath});
    for (double& w : dw) w = increment(ou_engine);
    try {
      ou[i] = ou_drift_mle(dw, h, step);
    } catch (const NumericalFailure&) {
      ou[i].reset();
    }
  });
  return {EmpiricalSample::from_replications(std::move(lse), seed, std::nullopt, 1.0 / n),
          EmpiricalSample::from_replications(std::move(ou), seed, std::nullopt, step)};
}

bool KsProfile::median_non_increasing() const {
  for (std::size_t i = 1; i < median.size(); ++i) {
    if (median[i] > median[i - 1]) return false;
  }
  return true;
}

KsProfile ks_profile(const ExperimentConfig& config, int batches) {
  if (batches < 1) throw InvalidArgument("ks_profile: at least one batch is needed");
  KsProfile profile;
  profile.horizons = config.horizons;
  for (int b = 0; b < batches; ++b) {
    ExperimentConfig batch = config;
    batch.seed = splitmix64(config.seed + static_cast<std::uint64_t>(b));
    const auto finite = mc_alpha_hat(batch);
    const EmpiricalSample limit = mc_limit_alpha_hat(batch);
    std::vector<double> row;
    for (double horizon : config.horizons) row.push_back(ks_two_sample(finite.at(horizon), limit));
    profile.ks.push_back(std::move(row));
  }
  for (std::size_t t = 0; t < config.horizons.size(); ++t) {
    std::vector<double> column;
    for (const auto& row : profile.ks) column.push_back(row[t]);
    std::sort(column.begin(), column.end());
    const std::size_t m = column.size();
    profile.median.push_back(m % 2 == 1 ? column[m / 2]
                                        : 0.5 * (column[m / 2 - 1] + column[m / 2]));
  }
  return profile;
}

}  // namespace delaysde
