#pragma once

#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "delaysde/measure.hpp"
#include "delaysde/random.hpp"
#include "delaysde/spectral.hpp"

namespace delaysde {

/// Deterministic initial segment X0 on [-r, 0].
class InitialSegment {
 public:
  static InitialSegment constant(double value);
  /// X0(t) = sum_i coeffs[i] t^i.
  static InitialSegment polynomial(std::vector<double> coeffs);
  /// Values on a uniform grid spanning [-r, 0] (first entry at -r);
  /// linearly interpolated in between.
  static InitialSegment tabulated(std::vector<double> values);

  InitialSegment() : InitialSegment(constant(0.0)) {}

  double operator()(double t, double delay) const;

 private:
  enum class Kind { polynomial, tabulated };
  InitialSegment(Kind kind, std::vector<double> data)
      : kind_(kind), data_(std::move(data)) {}

  Kind kind_;
  std::vector<double> data_;
};

/// Uniform grid with r = delay_steps * dt and T = steps * dt.
struct TimeGrid {
  double dt = 0.0;
  int delay_steps = 0;
  int steps = 0;

  double horizon() const { return steps * dt; }

  /// Rounds the dt hint down so that it divides r, then snaps T to the grid.
  static TimeGrid align(double delay, double horizon, double dt_hint);
};

struct ZeroNoise {};

/// Where the Wiener increments come from: a random stream, an explicit
/// sequence (test mode) or nothing at all.
using NoiseSource = std::variant<StreamKey, std::vector<double>, ZeroNoise>;

/**
 * Trajectory of the delay equation on [-r, T].
 *
 * Grid values are stored contiguously; index k runs from -delay_steps to
 * steps, so history() and values() share the point t = 0.
 */
struct SamplePath {
  TimeGrid grid;
  std::vector<double> x;  // size delay_steps + steps + 1
  std::optional<std::vector<double>> noise;
  std::optional<StreamKey> seed;

  double at(int k) const { return x[static_cast<std::size_t>(k + grid.delay_steps)]; }
  double time(int k) const { return k * grid.dt; }
  std::span<const double> history() const {
    return std::span<const double>(x).first(static_cast<std::size_t>(grid.delay_steps) + 1);
  }
  std::span<const double> values() const {
    return std::span<const double>(x).subspan(static_cast<std::size_t>(grid.delay_steps));
  }
};

/**
 * Linear weights w_j such that the delayed functional
 * Y(t_k) = int X(t_k + u) a(du) is sum_j w_j X(t_{k - lag_j}).
 *
 * Atoms off the grid use linear interpolation; density pieces use the
 * trapezoid rule on the grid points inside the piece plus its endpoints.
 */
class DelayStencil {
 public:
  DelayStencil(const SignedMeasure& measure, double dt);

  double apply(const SamplePath& path, int k) const;
  std::span<const std::pair<int, double>> taps() const { return taps_; }

 private:
  std::vector<std::pair<int, double>> taps_;  // (lag, weight), lag ascending
};

struct SimulationOptions {
  bool retain_noise = true;
};

/**
 * Euler-Maruyama for dX = theta Y dt + dW on the aligned grid.
 * Deterministic in (noise, grid, model, x0).
 */
SamplePath simulate_sdde(const CharacteristicModel& model, const InitialSegment& x0,
                         double horizon, double dt_hint, const NoiseSource& noise,
                         const SimulationOptions& options = {});

double delayed_functional(const SamplePath& path, const SignedMeasure& measure, int k);

/// Y(t_k) for k = 0..steps.
std::vector<double> delayed_functional_series(const SamplePath& path,
                                              const SignedMeasure& measure);

/// Left-endpoint sum sum_k f_k * dG_k.
double ito_integral(std::span<const double> integrand,
                    std::span<const double> increments);

}  // namespace delaysde
