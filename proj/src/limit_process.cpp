#include "delaysde/limit_process.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "delaysde/errors.hpp"

namespace delaysde {

namespace {

std::vector<cdouble> cumulative(const std::vector<cdouble>& increments) {
  std::vector<cdouble> values(increments.size() + 1, cdouble{0.0});
  for (std::size_t k = 0; k < increments.size(); ++k) {
    values[k + 1] = values[k] + increments[k];
  }
  return values;
}

void check_chain_input(const RootRecord& root, int m_star) {
  if (m_star < 0) throw InvalidArgument("limit system: m* must be nonnegative");
  if (root.lambda.imag() < 0.0) {
    throw InvalidArgument("limit system: roots are given with Im(lambda) >= 0");
  }
  if (static_cast<int>(root.coeffs.size()) <= m_star) {
    throw InvalidArgument("limit system: root has no coefficient c_{lambda,m*}");
  }
  if (root.poly_degree != m_star) {
    throw InvalidArgument("limit system: the root's polynomial degree is not m*");
  }
}

}  // namespace

ComplexWienerPath ComplexWienerPath::conjugate() const {
  ComplexWienerPath out = *this;
  out.frequency = -frequency;
  for (cdouble& z : out.increments) z = std::conj(z);
  for (cdouble& z : out.values) z = std::conj(z);
  return out;
}

ComplexWienerPath ComplexWienerPath::from_increments(double frequency, double dt,
                                                     std::vector<cdouble> increments) {
  ComplexWienerPath path;
  path.frequency = frequency;
  path.dt = dt;
  path.values = cumulative(increments);
  path.increments = std::move(increments);
  return path;
}

int unit_interval_steps(double dt_hint) {
  if (!(dt_hint > 0.0) || dt_hint > 1.0) {
    throw InvalidArgument("limit grid: dt must lie in (0, 1]");
  }
  return static_cast<int>(std::ceil(1.0 / dt_hint - 1e-9));
}

ComplexWienerPath simulate_complex_wiener(double frequency, double dt_hint,
                                          StreamKey key) {
  if (frequency < 0.0) return simulate_complex_wiener(-frequency, dt_hint, key).conjugate();
  const int steps = unit_interval_steps(dt_hint);
  const double dt = 1.0 / steps;
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  std::vector<cdouble> increments(static_cast<std::size_t>(steps));
  PhiloxEngine re_engine(key);
  if (frequency == 0.0) {
    for (cdouble& dw : increments) dw = normal(re_engine);
  } else {
    StreamKey im_key = key;
    im_key.stream += 1;
    PhiloxEngine im_engine(im_key);
    std::normal_distribution<double> normal_im(0.0, std::sqrt(dt));
    const double scale = 1.0 / std::numbers::sqrt2;
    for (cdouble& dw : increments) {
      const double re = normal(re_engine);
      const double im = normal_im(im_engine);
      dw = cdouble{re * scale, im * scale};
    }
  }
  return ComplexWienerPath::from_increments(frequency, dt, std::move(increments));
}

std::vector<cdouble> iterated_wiener(const ComplexWienerPath& w, int ell) {
  if (ell < 0) throw InvalidArgument("iterated_wiener: ell must be nonnegative");
  if (ell == 0) return w.values;
  double factorial = 1.0;
  for (int i = 2; i <= ell; ++i) factorial *= i;
  const int n = w.steps();
  std::vector<cdouble> out(static_cast<std::size_t>(n) + 1, cdouble{0.0});
  for (int k = 1; k <= n; ++k) {
    cdouble acc = 0.0;
    for (int j = 0; j < k; ++j) {
      acc += std::pow((k - j) * w.dt, ell) * w.increments[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(k)] = acc / factorial;
  }
  return out;
}

LimitSystemPath simulate_limit_system(const RootRecord& root, int m_star, double alpha,
                                      ComplexWienerPath noise) {
  check_chain_input(root, m_star);
  LimitSystemPath path;
  path.root = root;
  path.m_star = m_star;
  path.alpha = alpha;
  path.coefficient = root.coeffs[static_cast<std::size_t>(m_star)];
  if (path.real_root()) path.coefficient.imag(0.0);

  const auto n = static_cast<std::size_t>(noise.steps());
  const double dt = noise.dt;
  const auto levels = static_cast<std::size_t>(m_star) + 1;
  path.chain.assign(levels, std::vector<cdouble>(n + 1, cdouble{0.0}));
  const cdouble feedback = alpha * path.coefficient * dt;
  auto& chain = path.chain;
  for (std::size_t k = 0; k < n; ++k) {
    // Update from the top so every level reads values at time k.
    for (std::size_t ell = levels - 1; ell >= 1; --ell) {
      chain[ell][k + 1] = chain[ell][k] + chain[ell - 1][k] * dt;
    }
    chain[0][k + 1] = chain[0][k] + feedback * chain[levels - 1][k] + noise.increments[k];
  }
  path.noise = std::move(noise);
  return path;
}

LimitSystemPath simulate_limit_system(const RootRecord& root, int m_star, double alpha,
                                      double dt_hint, StreamKey key) {
  check_chain_input(root, m_star);
  return simulate_limit_system(root, m_star, alpha,
                               simulate_complex_wiener(root.lambda.imag(), dt_hint, key));
}

std::vector<RootRecord> limit_roots(const SpectralSummary& summary) {
  if (summary.regime != Regime::unstable || !summary.m_star) {
    throw WrongRegime("limit experiment: the model is " +
                      std::string(to_string(summary.regime)) + ", not unstable");
  }
  std::vector<RootRecord> roots;
  for (const RootRecord& root : summary.dominant_roots) {
    if (root.poly_degree == summary.m_star) roots.push_back(root);
  }
  if (roots.empty()) throw InvalidArgument("limit experiment: no root carries degree m*");
  return roots;
}

std::vector<LimitSystemPath> simulate_limit_experiment(std::span<const RootRecord> roots,
                                                       int m_star, double alpha,
                                                       double dt_hint, std::uint64_t seed,
                                                       std::uint32_t replication) {
  std::vector<LimitSystemPath> paths;
  paths.reserve(roots.size());
  for (std::size_t j = 0; j < roots.size(); ++j) {
    const StreamKey key{seed, replication,
                        streams::kLimitPath + 2 * static_cast<std::uint32_t>(j)};
    paths.push_back(simulate_limit_system(roots[j], m_star, alpha, dt_hint, key));
  }
  return paths;
}

LimitStatistics limit_delta_J(std::span<const LimitSystemPath> paths) {
  LimitStatistics stats;
  for (const LimitSystemPath& path : paths) {
    const auto& top = path.chain.back();
    const auto& x0 = path.chain.front();
    const auto& dw = path.noise.increments;
    const cdouble c = path.coefficient;
    const double dt = path.noise.dt;
    cdouble noise_sum = 0.0;
    cdouble state_sum = 0.0;
    double energy = 0.0;
    for (std::size_t k = 0; k < dw.size(); ++k) {
      noise_sum += top[k] * std::conj(dw[k]);
      state_sum += top[k] * std::conj(x0[k + 1] - x0[k]);
      energy += std::norm(top[k]) * dt;
    }
    const double abs_c2 = std::norm(c);
    if (path.real_root()) {
      const cdouble z = c * noise_sum;
      stats.delta += z.real();
      stats.imag_residual += std::abs(z.imag());
      stats.score += (c * state_sum).real();
      stats.info += abs_c2 * energy;
    } else {
      // The conjugate root contributes conj(c) int conj(X) dW.
      const cdouble z = c * noise_sum + std::conj(c) * std::conj(noise_sum);
      stats.delta += z.real();
      stats.imag_residual += std::abs(z.imag());
      stats.score += 2.0 * (c * state_sum).real();
      stats.info += 2.0 * abs_c2 * energy;
    }
  }
  return stats;
}

double limit_mle_alpha(std::span<const LimitSystemPath> paths, double floor) {
  const LimitStatistics stats = limit_delta_J(paths);
  if (!(stats.info > floor)) {
    throw DegenerateDenominator("limit_mle_alpha: J = " + std::to_string(stats.info) +
                                " is not above " + std::to_string(floor));
  }
  return stats.score / stats.info;
}

double limit_loglik_ratio(std::span<const LimitSystemPath> paths, double alpha,
                          double alpha_prime) {
  const LimitStatistics stats = limit_delta_J(paths);
  return (alpha_prime - alpha) * stats.score -
         0.5 * (alpha_prime * alpha_prime - alpha * alpha) * stats.info;
}

LimitStatistics iterated_delta_J(std::span<const RootRecord> upper_roots, int m_star,
                                 std::span<const ComplexWienerPath> noises) {
  if (upper_roots.size() != noises.size()) {
    throw InvalidArgument("iterated_delta_J: one Wiener path per root is required");
  }
  cdouble delta = 0.0;
  double info = 0.0;
  auto add = [&](cdouble c, const ComplexWienerPath& w) {
    const std::vector<cdouble> integrated = iterated_wiener(w, m_star);
    cdouble sum = 0.0;
    double energy = 0.0;
    for (std::size_t k = 0; k < w.increments.size(); ++k) {
      sum += integrated[k] * std::conj(w.increments[k]);
      energy += std::norm(integrated[k]) * w.dt;
    }
    delta += c * sum;
    info += std::norm(c) * energy;
  };
  for (std::size_t i = 0; i < upper_roots.size(); ++i) {
    const RootRecord& root = upper_roots[i];
    check_chain_input(root, m_star);
    cdouble c = root.coeffs[static_cast<std::size_t>(m_star)];
    if (root.lambda.imag() == 0.0) {
      c.imag(0.0);
      add(c, noises[i]);
    } else {
      add(c, noises[i]);
      add(std::conj(c), noises[i].conjugate());
    }
  }
  return LimitStatistics{delta.real(), info, 0.0, std::abs(delta.imag())};
}

std::array<double, 2> phi_vector(cdouble z) { return {z.real(), z.imag()}; }

std::array<std::array<double, 2>, 2> psi_matrix(cdouble z) {
  return {{{z.real(), -z.imag()}, {z.imag(), z.real()}}};
}

}  // namespace delaysde
