#pragma once

#include <optional>

#include "delaysde/sdde_sim.hpp"
#include "delaysde/spectral.hpp"

namespace delaysde {

/// Discretized integrals of the log-likelihood.
struct SufficientStats {
  double I1 = 0.0;                // sum Y_k (X_{k+1} - X_k)
  double I2 = 0.0;                // sum Y_k^2 dt
  std::optional<double> I3;       // sum Y_k dW_k, when the noise is known
  double horizon = 0.0;
};

SufficientStats sufficient_stats(const SamplePath& path, const SignedMeasure& measure);

/// log dP_{theta'} / dP_{theta} = (theta' - theta) I1 - (theta'^2 - theta^2) I2 / 2.
double loglik_ratio(const SufficientStats& stats, double theta, double theta_prime);

/// T^{-m*-1}; requires the unstable regime.
double scaling_r(const SpectralSummary& summary, double horizon);

struct ScoreAndInformation {
  double delta = 0.0;
  double info = 0.0;  // J
};

/// Delta = r (I1 - theta I2), J = r^2 I2.
ScoreAndInformation delta_J(const SufficientStats& stats, double theta, double r_scale);

inline constexpr double kDefaultDenominatorFloor = 1e-12;

/// I1 / I2; throws DegenerateDenominator when I2 <= floor.
double mle_theta(const SufficientStats& stats, double floor = kDefaultDenominatorFloor);

/// (theta_hat - theta_base) / r_scale.
double mle_alpha(const SufficientStats& stats, double theta_base, double r_scale,
                 double floor = kDefaultDenominatorFloor);

}  // namespace delaysde
