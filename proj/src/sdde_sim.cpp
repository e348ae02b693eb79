#include "delaysde/sdde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "delaysde/errors.hpp"

namespace delaysde {

InitialSegment InitialSegment::constant(double value) {
  return InitialSegment(Kind::polynomial, {value});
}

InitialSegment InitialSegment::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) coeffs.push_back(0.0);
  return InitialSegment(Kind::polynomial, std::move(coeffs));
}

InitialSegment InitialSegment::tabulated(std::vector<double> values) {
  if (values.size() < 2) {
    throw InvalidArgument("initial segment: a table needs at least two values");
  }
  return InitialSegment(Kind::tabulated, std::move(values));
}

double InitialSegment::operator()(double t, double delay) const {
  if (kind_ == Kind::polynomial) {
    double value = 0.0;
    for (auto it = data_.rbegin(); it != data_.rend(); ++it) value = value * t + *it;
    return value;
  }
  const double cells = static_cast<double>(data_.size() - 1);
  const double pos = std::clamp((t + delay) / delay, 0.0, 1.0) * cells;
  const auto i = std::min(static_cast<std::size_t>(pos), data_.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return data_[i] * (1.0 - frac) + data_[i + 1] * frac;
}

TimeGrid TimeGrid::align(double delay, double horizon, double dt_hint) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidArgument("simulation horizon T must be positive");
  }
  if (!(dt_hint > 0.0) || dt_hint > delay * (1.0 + 1e-12)) {
    throw InvalidArgument("time step must satisfy 0 < dt <= r, got dt = " +
                          std::to_string(dt_hint));
  }
  const double ratio = delay / dt_hint;
  const double delay_steps = std::ceil(ratio - 1e-9);
  if (delay_steps > 1e9) throw GridAlignmentError("time step too small for the delay");
  TimeGrid grid;
  grid.dt = delay / delay_steps;
  grid.delay_steps = static_cast<int>(delay_steps);
  if (std::abs(delay / grid.dt - delay_steps) > 1e-9) {
    throw GridAlignmentError("r / dt is not an integer after adjustment");
  }
  const double steps = std::round(horizon / grid.dt);
  if (steps < 1.0 || steps > 2e9) {
    throw InvalidArgument("horizon T must span between 1 and 2e9 grid steps");
  }
  grid.steps = static_cast<int>(steps);
  return grid;
}

DelayStencil::DelayStencil(const SignedMeasure& measure, double dt) {
  const int max_lag = static_cast<int>(std::llround(measure.delay() / dt));
  std::map<int, double> weights;
  auto add_point = [&](double u, double coef) {
    double q = -u / dt;
    double j0 = std::floor(q + 1e-9);
    double frac = q - j0;
    if (frac < 1e-9) frac = 0.0;
    const int lag = std::clamp(static_cast<int>(j0), 0, max_lag);
    weights[lag] += coef * (1.0 - frac);
    if (frac > 0.0) weights[std::min(lag + 1, max_lag)] += coef * frac;
  };

  for (const Atom& atom : measure.atoms()) add_point(atom.location, atom.weight);

  for (const DensityPiece& piece : measure.density()) {
    if (!(piece.hi > piece.lo)) continue;
    std::vector<double> nodes{piece.lo};
    const double guard = 1e-9 * dt;
    const int first = static_cast<int>(std::ceil(-piece.hi / dt - 1e-9));
    for (int j = first; j * dt <= -piece.lo + guard; ++j) {
      const double u = -j * dt;
      if (u > piece.lo + guard && u < piece.hi - guard) nodes.push_back(u);
    }
    nodes.push_back(piece.hi);
    std::sort(nodes.begin(), nodes.end());
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const double half = 0.5 * (nodes[i + 1] - nodes[i]);
      add_point(nodes[i], half * piece.density_at(nodes[i]));
      add_point(nodes[i + 1], half * piece.density_at(nodes[i + 1]));
    }
  }
  for (const auto& [lag, w] : weights) {
    if (w != 0.0) taps_.emplace_back(lag, w);
  }
}

double DelayStencil::apply(const SamplePath& path, int k) const {
  double y = 0.0;
  for (const auto& [lag, w] : taps_) y += w * path.at(k - lag);
  return y;
}

SamplePath simulate_sdde(const CharacteristicModel& model, const InitialSegment& x0,
                         double horizon, double dt_hint, const NoiseSource& noise,
                         const SimulationOptions& options) {
  const double delay = model.measure.delay();
  SamplePath path;
  path.grid = TimeGrid::align(delay, horizon, dt_hint);
  const TimeGrid& g = path.grid;
  const auto offset = static_cast<std::size_t>(g.delay_steps);
  path.x.assign(offset + static_cast<std::size_t>(g.steps) + 1, 0.0);
  for (int i = -g.delay_steps; i <= 0; ++i) {
    path.x[offset + i] = x0(i * g.dt, delay);
  }

  const DelayStencil stencil(model.measure, g.dt);
  const auto taps = stencil.taps();

  std::vector<double> increments;
  if (const auto* key = std::get_if<StreamKey>(&noise)) {
    path.seed = *key;
    PhiloxEngine engine(*key);
    std::normal_distribution<double> normal(0.0, std::sqrt(g.dt));
    increments.resize(static_cast<std::size_t>(g.steps));
    for (double& dw : increments) dw = normal(engine);
  } else if (const auto* supplied = std::get_if<std::vector<double>>(&noise)) {
    if (supplied->size() != static_cast<std::size_t>(g.steps)) {
      throw InvalidArgument("simulate_sdde: expected " + std::to_string(g.steps) +
                            " increments, got " + std::to_string(supplied->size()));
    }
    increments = *supplied;
  } else {
    increments.assign(static_cast<std::size_t>(g.steps), 0.0);
  }

  const double drift = model.theta * g.dt;
  double* x = path.x.data() + offset;
  for (int k = 0; k < g.steps; ++k) {
    double y = 0.0;
    for (const auto& [lag, w] : taps) y += w * x[k - lag];
    x[k + 1] = x[k] + drift * y + increments[static_cast<std::size_t>(k)];
  }
  if (options.retain_noise) path.noise = std::move(increments);
  return path;
}

double delayed_functional(const SamplePath& path, const SignedMeasure& measure, int k) {
  if (k < 0 || k > path.grid.steps) {
    throw InvalidArgument("delayed_functional: index outside [0, T]");
  }
  return DelayStencil(measure, path.grid.dt).apply(path, k);
}

std::vector<double> delayed_functional_series(const SamplePath& path,
                                              const SignedMeasure& measure) {
  const DelayStencil stencil(measure, path.grid.dt);
  std::vector<double> y(static_cast<std::size_t>(path.grid.steps) + 1);
  for (int k = 0; k <= path.grid.steps; ++k) {
    y[static_cast<std::size_t>(k)] = stencil.apply(path, k);
  }
  return y;
}

double ito_integral(std::span<const double> integrand,
                    std::span<const double> increments) {
  if (integrand.size() != increments.size()) {
    throw InvalidArgument("ito_integral: length mismatch (" +
                          std::to_string(integrand.size()) + " vs " +
                          std::to_string(increments.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < integrand.size(); ++k) sum += integrand[k] * increments[k];
  return sum;
}

}  // namespace delaysde
