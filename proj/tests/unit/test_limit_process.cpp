#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "delaysde/errors.hpp"
#include "delaysde/limit_process.hpp"

using namespace delaysde;

namespace {

const cdouble I{0.0, 1.0};

RootRecord real_root(double c) { return {0.0, 1, {c}, 0}; }
RootRecord pair_root(double phi, cdouble c) { return {{0.0, phi}, 1, {c}, 0}; }

ComplexWienerPath kick(double frequency, int steps, cdouble size = 1.0) {
  std::vector<cdouble> inc(static_cast<std::size_t>(steps), 0.0);
  inc[0] = size;
  return ComplexWienerPath::from_increments(frequency, 1.0 / steps, std::move(inc));
}

double sup_diff(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace

TEST_CASE("complex Wiener paths") {
  const ComplexWienerPath real = simulate_complex_wiener(0.0, 1e-3, StreamKey{1, 0, 0});
  CHECK(real.steps() == 1000);
  for (cdouble v : real.values) CHECK(v.imag() == 0.0);

  const ComplexWienerPath w = simulate_complex_wiener(2.0, 1e-3, StreamKey{1, 0, 0});
  const ComplexWienerPath wc = simulate_complex_wiener(-2.0, 1e-3, StreamKey{1, 0, 0});
  CHECK(w.values.front() == 0.0);
  for (std::size_t k = 0; k < w.values.size(); ++k) CHECK(wc.values[k] == std::conj(w.values[k]));

  double energy = 0.0, re2 = 0.0;
  int count = 0;
  for (std::uint32_t rep = 0; rep < 40; ++rep) {
    const ComplexWienerPath p = simulate_complex_wiener(1.0, 1e-3, StreamKey{5, rep, 0});
    for (cdouble dw : p.increments) {
      energy += std::norm(dw);
      re2 += dw.real() * dw.real();
      ++count;
    }
  }
  CHECK(energy / count == doctest::Approx(1e-3).epsilon(0.02));
  CHECK(re2 / count == doctest::Approx(0.5e-3).epsilon(0.02));
}

TEST_CASE("iterated_wiener") {
  const ComplexWienerPath w = simulate_complex_wiener(1.5, 1e-2, StreamKey{2, 0, 0});
  CHECK(iterated_wiener(w, 0) == w.values);

  const int n = 1000;
  const double dt = 1.0 / n;
  const ComplexWienerPath line = ComplexWienerPath::from_increments(
      0.0, dt, std::vector<cdouble>(static_cast<std::size_t>(n), cdouble{dt}));
  const auto first = iterated_wiener(line, 1);
  for (int k = 0; k <= n; k += 100) {
    const double s = k * dt;
    CHECK(std::abs(first[static_cast<std::size_t>(k)] - s * s / 2) <= dt);
  }

  const auto a = iterated_wiener(w, 2);
  const auto b = iterated_wiener(w.conjugate(), 2);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == std::conj(a[k]));
  CHECK_THROWS_AS(iterated_wiener(w, -1), InvalidArgument);
}

TEST_CASE("alpha = 0 chain reproduces the iterated integrals") {
  const int m_star = 2;
  const RootRecord root{{0.0, 1.3}, 3, {1.0, 0.5, cdouble{0.2, -0.4}}, 2};
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    const LimitSystemPath p = simulate_limit_system(root, m_star, 0.0, 1e-3, StreamKey{seed, 0, 0});
    CHECK(p.chain[0] == p.noise.values);
    for (int ell = 1; ell <= m_star; ++ell) {
      CHECK(sup_diff(p.chain[static_cast<std::size_t>(ell)], iterated_wiener(p.noise, ell)) <=
            10 * p.noise.dt);
    }
  }
}

TEST_CASE("single real root, m* = 0, is a scalar OU recursion") {
  const double alpha = -1.3, c = 0.8;
  const LimitSystemPath p = simulate_limit_system(real_root(c), 0, alpha, 1e-3, StreamKey{4, 0, 0});
  cdouble x = 0.0;
  for (std::size_t k = 0; k < p.noise.increments.size(); ++k) {
    x = x + alpha * c * x * p.noise.dt + p.noise.increments[k];
    CHECK(std::abs(p.chain[0][k + 1] - x) <= 1e-12);
  }
}

TEST_CASE("deterministic kick through the integrator chain") {
  const int n = 1000;
  const RootRecord root{0.0, 4, {1.0, 1.0, 1.0, 1.0}, 3};
  const LimitSystemPath p = simulate_limit_system(root, 3, 0.0, kick(0.0, n));
  double factorial = 1.0;
  for (int ell = 0; ell <= 3; ++ell) {
    if (ell > 0) factorial *= ell;
    const double t = 1.0;
    CHECK(std::abs(p.chain[static_cast<std::size_t>(ell)].back() - std::pow(t, ell) / factorial) <=
          4.0 / n);
  }
}

TEST_CASE("chain input validation") {
  CHECK_THROWS_AS(simulate_limit_system(pair_root(-1.0, 1.0), 0, 0.0, 1e-2, {}), InvalidArgument);
  CHECK_THROWS_AS(simulate_limit_system(real_root(1.0), 1, 0.0, 1e-2, {}), InvalidArgument);
  RootRecord no_degree = real_root(1.0);
  no_degree.poly_degree.reset();
  CHECK_THROWS_AS(simulate_limit_system(no_degree, 0, 0.0, 1e-2, {}), InvalidArgument);
}

TEST_CASE("limit_delta_J in the particular case") {
  const double mass = 1.7;
  const LimitSystemPath p = simulate_limit_system(real_root(mass), 0, 0.0, 1e-3, StreamKey{8, 0, 0});
  const std::vector<LimitSystemPath> paths{p};
  const LimitStatistics s = limit_delta_J(paths);
  double sum = 0.0, energy = 0.0;
  for (std::size_t k = 0; k < p.noise.increments.size(); ++k) {
    const double w = p.noise.values[k].real();
    sum += w * p.noise.increments[k].real();
    energy += w * w * p.noise.dt;
  }
  CHECK(s.delta == doctest::Approx(mass * sum).epsilon(1e-13));
  CHECK(s.info == doctest::Approx(mass * mass * energy).epsilon(1e-13));
  CHECK(s.imag_residual <= 1e-12);
}

TEST_CASE("zero noise gives zero statistics") {
  const std::vector<cdouble> zeros(100, 0.0);
  const std::vector<LimitSystemPath> paths{
      simulate_limit_system(pair_root(1.0, {0.3, 0.2}), 0, 0.7,
                            ComplexWienerPath::from_increments(1.0, 0.01, zeros))};
  const LimitStatistics s = limit_delta_J(paths);
  CHECK(s.delta == 0.0);
  CHECK(s.info == 0.0);
  CHECK_THROWS_AS(limit_mle_alpha(paths), DegenerateDenominator);
}

TEST_CASE("J depends on the coefficient only through its modulus") {
  const cdouble c{0.4, -0.9};
  const ComplexWienerPath w = simulate_complex_wiener(2.0, 1e-3, StreamKey{3, 0, 0});
  for (double gamma : {0.3, 1.9, -2.5}) {
    const std::vector<LimitSystemPath> a{simulate_limit_system(pair_root(2.0, c), 0, 0.0, w)};
    const std::vector<LimitSystemPath> b{
        simulate_limit_system(pair_root(2.0, c * std::exp(I * gamma)), 0, 0.0, w)};
    CHECK(limit_delta_J(b).info == doctest::Approx(limit_delta_J(a).info).epsilon(1e-13));
  }
}

TEST_CASE("limit MLE identities") {
  const double alpha = 0.3;
  // A single kick: the drift is the only thing left after the first step.
  for (const RootRecord& root : {real_root(1.4), pair_root(1.0, {0.5, -0.7})}) {
    const std::vector<LimitSystemPath> kicked{
        simulate_limit_system(root, 0, alpha, kick(root.lambda.imag(), 1000, {1.0, 0.5}))};
    CHECK(limit_mle_alpha(kicked) == doctest::Approx(alpha).epsilon(1e-12));
  }

  const std::vector<RootRecord> roots{real_root(0.9), pair_root(1.2, {0.3, 0.4}),
                                      pair_root(3.0, {-0.2, 0.1})};
  for (std::uint32_t rep = 0; rep < 50; ++rep) {
    for (double a : {0.0, 1.0, -2.0}) {
      const auto paths = simulate_limit_experiment(roots, 0, a, 1e-3, 31, rep);
      const LimitStatistics s = limit_delta_J(paths);
      CHECK(std::abs(limit_mle_alpha(paths) - a - s.delta / s.info) <= 1e-10);
      CHECK(s.imag_residual <= 1e-10);
    }
  }
}

TEST_CASE("single real root MLE is the OU drift estimator") {
  const LimitSystemPath p = simulate_limit_system(real_root(1.0), 0, 0.5, 1e-3, StreamKey{6, 0, 0});
  double num = 0.0, den = 0.0;
  const auto& x = p.chain[0];
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    num += x[k].real() * (x[k + 1] - x[k]).real();
    den += x[k].real() * x[k].real() * p.noise.dt;
  }
  const std::vector<LimitSystemPath> paths{p};
  CHECK(limit_mle_alpha(paths) == doctest::Approx(num / den).epsilon(1e-12));
}

TEST_CASE("limit log-likelihood ratio") {
  const std::vector<RootRecord> roots{pair_root(1.0, {0.6, 0.2})};
  const double alpha = 0.4;
  const auto paths = simulate_limit_experiment(roots, 0, alpha, 1e-3, 12, 0);
  CHECK(limit_loglik_ratio(paths, alpha, alpha) == 0.0);
  const LimitStatistics s = limit_delta_J(paths);
  for (double a2 : {-1.0, 0.5, 2.0}) {
    const double h = a2 - alpha;
    CHECK(limit_loglik_ratio(paths, alpha, a2) ==
          doctest::Approx(h * s.delta - 0.5 * h * h * s.info).epsilon(1e-10));
  }
  CHECK(limit_loglik_ratio(paths, alpha, 1.0) + limit_loglik_ratio(paths, 1.0, 2.0) ==
        doctest::Approx(limit_loglik_ratio(paths, alpha, 2.0)).epsilon(1e-12));
}

TEST_CASE("alpha = 0 statistics match the iterated-integral construction") {
  const int m_star = 1;
  const std::vector<RootRecord> roots{{0.0, 2, {0.5, 1.1}, 1},
                                      {{0.0, 2.0}, 2, {1.0, cdouble{0.3, -0.8}}, 1}};
  for (std::uint32_t rep = 0; rep < 10; ++rep) {
    const auto paths = simulate_limit_experiment(roots, m_star, 0.0, 1e-3, 44, rep);
    std::vector<ComplexWienerPath> noises;
    for (const auto& p : paths) noises.push_back(p.noise);
    const LimitStatistics a = limit_delta_J(paths);
    const LimitStatistics b = iterated_delta_J(roots, m_star, noises);
    CHECK(std::abs(a.delta - b.delta) <= 10 * 1e-3);
    CHECK(std::abs(a.info - b.info) <= 10 * 1e-3);
    CHECK(b.imag_residual <= 1e-10);
  }
}

TEST_CASE("Phi and Psi identities") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const cdouble z1{u(gen), u(gen)};
    const cdouble z2{u(gen), u(gen)};
    const auto psi = psi_matrix(z1);
    const auto phi2 = phi_vector(z2);
    const auto phi12 = phi_vector(z1 * z2);
    for (int r = 0; r < 2; ++r) {
      CHECK(psi[r][0] * phi2[0] + psi[r][1] * phi2[1] ==
            doctest::Approx(phi12[r]).epsilon(1e-14).scale(std::abs(z1 * z2)));
    }
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const double v = psi[0][r] * psi[0][c] + psi[1][r] * psi[1][c];
        CHECK(std::abs(v - (r == c ? std::norm(z1) : 0.0)) <= 1e-14 * std::norm(z1) + 1e-15);
      }
    }
    const auto phi1 = phi_vector(z1);
    CHECK(std::abs(phi1[0] * phi2[0] + phi1[1] * phi2[1] - (z1 * std::conj(z2)).real()) <=
          1e-14 * std::abs(z1) * std::abs(z2));
  }
}

TEST_CASE("mean of J in the particular case") {
  const double mass = 1.0;
  const std::vector<RootRecord> roots{real_root(mass)};
  const int n = 4000;
  double s1 = 0.0, s2 = 0.0;
  for (int rep = 0; rep < n; ++rep) {
    const double j =
        limit_delta_J(simulate_limit_experiment(roots, 0, 0.0, 1e-3, 5, static_cast<std::uint32_t>(rep))).info;
    s1 += j;
    s2 += j * j;
  }
  const double mean = s1 / n;
  const double se = std::sqrt((s2 / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean - 0.5 * mass * mass) <= 3.0 * se);
}
