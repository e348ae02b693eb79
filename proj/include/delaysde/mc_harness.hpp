#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "delaysde/sdde_sim.hpp"
#include "delaysde/spectral.hpp"

namespace delaysde {

/// Monte Carlo experiment around an unstable base point theta: observations
/// are generated at theta + alpha * r_{theta,T} for each horizon T.
struct ExperimentConfig {
  explicit ExperimentConfig(CharacteristicModel m) : model(std::move(m)) {}

  CharacteristicModel model;
  double alpha = 0.0;
  std::vector<double> horizons;
  double dt = 0.01;
  int replications = 0;
  std::uint64_t seed = 0;
  InitialSegment x0;
  double limit_dt = 1e-3;
  std::optional<SearchRegion> region;  // default_region when empty
  unsigned threads = 0;                // 0: hardware concurrency

  /// Throws InvalidArgument on N < 2 or non-increasing / non-positive horizons.
  void validate() const;
};

/// Sorted sample plus the per-replication record it came from.
struct EmpiricalSample {
  std::vector<double> values;                       // ascending
  std::vector<std::optional<double>> replications;  // index order; nullopt = failed
  std::uint64_t seed = 0;
  std::optional<double> horizon;                    // empty for the limit sample
  double dt = 0.0;

  std::size_t count() const { return values.size(); }
  std::size_t failures() const { return replications.size() - values.size(); }

  static EmpiricalSample from_replications(std::vector<std::optional<double>> reps,
                                           std::uint64_t seed,
                                           std::optional<double> horizon, double dt);
};

/// Worker count: `requested` (0 = hardware concurrency), capped by the
/// DELAYSDE_THREADS environment variable when set.
unsigned resolve_threads(unsigned requested);

/// alpha_hat_T for every horizon in the config.
std::map<double, EmpiricalSample> mc_alpha_hat(const ExperimentConfig& config);

/// MLE of alpha in the delay-free limit system, one value per replication.
EmpiricalSample mc_limit_alpha_hat(const ExperimentConfig& config);

/// Sup distance between the empirical CDFs (exact merge scan).
double ks_two_sample(std::span<const double> sorted_a, std::span<const double> sorted_b);
double ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b);

struct MartingaleCheck {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
  std::size_t flagged = 0;  // replications with exponent above 50
};

/// Sample mean of exp{alpha Delta_T - alpha^2 J_T / 2} under the base point.
MartingaleCheck martingale_mean_check(const ExperimentConfig& config, double horizon);

/// Same statistic from precomputed exponents, evaluated in log space.
MartingaleCheck exponential_mean(std::span<const double> exponents);

/// n (beta_hat - 1) for X_k = (1 + h/n) X_{k-1} + eps_k, X_0 = 0, n = shocks.size().
double ar1_scaled_lse(std::span<const double> shocks, double h);

/// int Y dY / int Y^2 dt for the Euler path dY = h Y dt + dW on [0, 1].
double ou_drift_mle(std::span<const double> increments, double h, double dt);

struct BaselineSamples {
  EmpiricalSample lse;     // h_hat_n
  EmpiricalSample ou_mle;  // limit law
};

BaselineSamples ar1_baseline(double h, int n, int replications, std::uint64_t seed,
                             double ou_dt = 1e-3, unsigned threads = 0);

/// KS(alpha_hat_T, limit) per horizon over independent seed batches.
struct KsProfile {
  std::vector<double> horizons;
  std::vector<std::vector<double>> ks;  // [batch][horizon]
  std::vector<double> median;           // per horizon

  bool median_non_increasing() const;
};

KsProfile ks_profile(const ExperimentConfig& config, int batches);

}  // namespace delaysde
