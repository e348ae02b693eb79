#include "delaysde/inference.hpp"

#include <cmath>
#include <string>

#include "delaysde/errors.hpp"

namespace delaysde {

SufficientStats sufficient_stats(const SamplePath& path, const SignedMeasure& measure) {
  if (measure.delay() > path.grid.delay_steps * path.grid.dt * (1.0 + 1e-9)) {
    throw InvalidArgument("sufficient_stats: the path history is shorter than the delay");
  }
  const DelayStencil stencil(measure, path.grid.dt);
  const int n = path.grid.steps;
  const double dt = path.grid.dt;
  const bool with_noise =
      path.noise && path.noise->size() == static_cast<std::size_t>(n);

  SufficientStats stats;
  stats.horizon = path.grid.horizon();
  double i3 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double y = stencil.apply(path, k);
    stats.I1 += y * (path.at(k + 1) - path.at(k));
    stats.I2 += y * y * dt;
    if (with_noise) i3 += y * (*path.noise)[static_cast<std::size_t>(k)];
  }
  if (with_noise) stats.I3 = i3;
  return stats;
}

double loglik_ratio(const SufficientStats& stats, double theta, double theta_prime) {
  return (theta_prime - theta) * stats.I1 -
         0.5 * (theta_prime * theta_prime - theta * theta) * stats.I2;
}

double scaling_r(const SpectralSummary& summary, double horizon) {
  if (summary.regime != Regime::unstable || !summary.m_star) {
    throw WrongRegime("scaling_r: the model is " + std::string(to_string(summary.regime)) +
                      "; the scaling is defined only when v* = 0");
  }
  if (!(horizon > 0.0)) throw InvalidArgument("scaling_r: T must be positive");
  return std::pow(horizon, -static_cast<double>(*summary.m_star) - 1.0);
}

ScoreAndInformation delta_J(const SufficientStats& stats, double theta, double r_scale) {
  return {r_scale * (stats.I1 - theta * stats.I2), r_scale * r_scale * stats.I2};
}

double mle_theta(const SufficientStats& stats, double floor) {
  if (!(stats.I2 > floor)) {
    throw DegenerateDenominator("mle_theta: int Y^2 dt = " + std::to_string(stats.I2) +
                                " is not above " + std::to_string(floor));
  }
  return stats.I1 / stats.I2;
}

double mle_alpha(const SufficientStats& stats, double theta_base, double r_scale,
                 double floor) {
  if (r_scale == 0.0) throw InvalidArgument("mle_alpha: zero scaling");
  return (mle_theta(stats, floor) - theta_base) / r_scale;
}

}  // namespace delaysde
