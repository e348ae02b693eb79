#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "delaysde/errors.hpp"
#include "delaysde/spectral.hpp"
#include "oracles.hpp"

using namespace delaysde;
using std::numbers::pi;

namespace {

const cdouble I{0.0, 1.0};

CharacteristicModel oscillatory() { return {SignedMeasure::dirac(-1.0), -pi / 2}; }

double nearest_other(const std::vector<Root>& roots, std::size_t i) {
  double d = 1e300;
  for (std::size_t j = 0; j < roots.size(); ++j) {
    if (j != i) d = std::min(d, std::abs(roots[j].lambda - roots[i].lambda));
  }
  return d;
}

}  // namespace

TEST_CASE("char_eval examples") {
  const CharacteristicModel zero{SignedMeasure::dirac(-0.5, 3.0), 0.0};
  CHECK(std::abs(char_eval(zero, {2.0, 3.0}) - cdouble{2.0, 3.0}) == 0.0);
  CHECK(std::abs(char_eval({SignedMeasure::dirac(0.0), 1.0}, 1.0)) == 0.0);
  CHECK(std::abs(char_eval(oscillatory(), I * pi / 2.0)) < 1e-15);
}

TEST_CASE("char_derivative examples and finite differences") {
  CHECK(std::abs(char_derivative({SignedMeasure::dirac(-1.0), 0.0}, {0.4, 2.0}, 1) - 1.0) == 0.0);
  const cdouble d1 = char_derivative(oscillatory(), I * pi / 2.0, 1);
  CHECK(std::abs(d1 - (1.0 + I * pi / 2.0)) < 1e-14);
  CHECK(std::abs(char_derivative({SignedMeasure::dirac(0.0), -3.0}, {1.0, 1.0}, 2)) == 0.0);

  const CharacteristicModel m{SignedMeasure(1.0, {{-0.3, 1.2}}, {{-1.0, -0.5, {0.5, 1.0}}}), -1.7};
  const double step = 1e-6;
  for (cdouble z : {cdouble{0.2, 1.0}, cdouble{-1.0, 4.0}}) {
    const cdouble fd = (char_eval(m, z + step) - char_eval(m, z - step)) / (2 * step);
    CHECK(std::abs(fd - char_derivative(m, z, 1)) < 1e-6);
    const cdouble fd2 =
        (char_derivative(m, z + step, 1) - char_derivative(m, z - step, 1)) / (2 * step);
    CHECK(std::abs(fd2 - char_derivative(m, z, 2)) < 1e-6);
  }
  CHECK_THROWS_AS(char_derivative(m, 0.0, 0), InvalidArgument);
}

TEST_CASE("find_roots: affine characteristic function") {
  const RootSearch s = find_roots({SignedMeasure::dirac(0.0), -1.0}, {-2.0, 1.0, 5.0});
  REQUIRE(s.roots.size() == 1);
  CHECK(std::abs(s.roots[0].lambda + 1.0) < 1e-12);
  CHECK(s.roots[0].multiplicity == 1);
  CHECK(s.winding_count == 1);
}

TEST_CASE("find_roots: oscillatory critical model") {
  const RootSearch s = find_roots(oscillatory(), {-1.0, 1.0, 2.0});
  REQUIRE(s.roots.size() == 2);
  CHECK(std::abs(s.roots[0].lambda + I * pi / 2.0) < 1e-9);
  CHECK(std::abs(s.roots[1].lambda - I * pi / 2.0) < 1e-9);
  CHECK(s.roots[0].multiplicity == 1);
  CHECK(s.roots[1].multiplicity == 1);
}

TEST_CASE("find_roots: theta = 0 leaves only the origin") {
  for (const auto& a : {SignedMeasure::dirac(-1.0, 2.0),
                        SignedMeasure(3.0, {{-3.0, -0.5}}, {{-2.0, 0.0, {1.0, 1.0}}})}) {
    const RootSearch s = find_roots({a, 0.0}, {-4.0, 2.0, 30.0});
    REQUIRE(s.roots.size() == 1);
    CHECK(std::abs(s.roots[0].lambda) < 1e-14);
    CHECK(s.roots[0].multiplicity == 1);
  }
}

TEST_CASE("find_roots: residual, conjugate closure and winding consistency") {
  for (const auto& entry : oracle::residue_suite()) {
    INFO(entry.name);
    const SearchRegion region = default_region(entry.model);
    const RootSearch s = find_roots(entry.model, region);
    int total = 0;
    for (const Root& r : s.roots) {
      total += r.multiplicity;
      CHECK(std::abs(char_eval(entry.model, r.lambda)) <= 1e-12 * (1.0 + std::abs(r.lambda)) *
                                                              std::max(1.0, std::abs(entry.model.theta)));
      const auto twin = std::find_if(s.roots.begin(), s.roots.end(), [&](const Root& o) {
        return o.lambda == std::conj(r.lambda) && o.multiplicity == r.multiplicity;
      });
      CHECK(twin != s.roots.end());
    }
    CHECK(total == s.winding_count);
    CHECK(winding_number(entry.model, s.region) == s.winding_count);
  }
}

TEST_CASE("find_roots: engineered double root") {
  const CharacteristicModel m{SignedMeasure::dirac(-1.0), -std::exp(-1.0)};
  const RootSearch s = find_roots(m, {-2.0, 1.0, 3.0});
  REQUIRE(s.roots.size() == 1);
  CHECK(s.roots[0].multiplicity == 2);
  CHECK(std::abs(s.roots[0].lambda + 1.0) < 1e-7);
}

TEST_CASE("find_roots: region budget") {
  RootFinderOptions tiny;
  tiny.max_cells = 3;
  CHECK_THROWS_AS(find_roots(oscillatory(), {-20.0, 1.0, 200.0}, tiny), RegionTooLarge);
}

TEST_CASE("find_roots: region boundary through a root is perturbed") {
  // The root -1 lies on the left edge.
  const RootSearch s = find_roots({SignedMeasure::dirac(0.0), -1.0}, {-1.0, 1.0, 2.0});
  CHECK(s.winding_count == static_cast<int>(s.roots.size()));
  CHECK(s.region.re_min <= -1.0);
}

TEST_CASE("residue_coeff: simple-pole formula") {
  const cdouble lambda = I * pi / 2.0;
  const cdouble c = residue_coeff(oscillatory(), {lambda, 1}, 0);
  const cdouble expected = (-pi / 2.0 - I) / (1.0 + pi * pi / 4.0);
  CHECK(std::abs(c - expected) < 1e-14);
  CHECK_THROWS_AS(residue_coeff(oscillatory(), {lambda, 1}, 1), InvalidArgument);
}

TEST_CASE("residue_coeff: theta = 0 gives the total mass") {
  for (double mass : {1.0, -0.5, 2.3}) {
    const SignedMeasure a(2.0, {{-2.0, mass / 2}}, {{-1.0, 0.0, {mass / 2}}});
    CHECK(std::abs(residue_coeff({a, 0.0}, {0.0, 1}, 0) - mass) < 1e-12);
  }
}

TEST_CASE("residue_coeff: double root in closed form") {
  // h(z) = (z + 1)^2 / 2 - (z + 1)^3 / 6 + ..., so c0 = -4e/3 and c1 = 2e.
  const CharacteristicModel m{SignedMeasure::dirac(-1.0), -std::exp(-1.0)};
  CHECK(std::abs(residue_coeff(m, {-1.0, 2}, 0) - (-4.0 * std::exp(1.0) / 3.0)) < 1e-12);
  CHECK(std::abs(residue_coeff(m, {-1.0, 2}, 1) - 2.0 * std::exp(1.0)) < 1e-12);
  CHECK_THROWS_AS(residue_coeff(m, {-1.0, 1}, 0), InconsistentMultiplicity);
}

TEST_CASE("residue_coeff agrees with contour integration") {
  for (const auto& entry : oracle::residue_suite()) {
    INFO(entry.name);
    const RootSearch s = find_roots(entry.model, default_region(entry.model));
    for (std::size_t i = 0; i < s.roots.size(); ++i) {
      const Root& r = s.roots[i];
      const double radius = std::min(0.1, 0.3 * nearest_other(s.roots, i));
      for (int ell = 0; ell < r.multiplicity; ++ell) {
        const cdouble got = residue_coeff(entry.model, r, ell);
        const cdouble want = oracle::contour_residue(entry.model, r.lambda, ell, radius);
        INFO("root ", r.lambda, " ell ", ell);
        CHECK(std::abs(got - want) <= 1e-8);
      }
    }
  }
}

TEST_CASE("classify examples") {
  const SpectralSummary zero = classify({SignedMeasure(1.0, {{0.0, 0.6}, {-1.0, 0.4}}), 0.0});
  CHECK(zero.regime == Regime::unstable);
  CHECK(zero.v_star == 0.0);
  CHECK(zero.m_star == 0);
  REQUIRE(zero.dominant_roots.size() == 1);
  CHECK(zero.dominant_roots[0].lambda == 0.0);

  const SpectralSummary ou = classify({SignedMeasure::dirac(0.0), -1.0});
  CHECK(ou.regime == Regime::stable);
  CHECK(ou.v_star == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(ou.m_star == 0);

  const SpectralSummary osc = classify(oscillatory());
  CHECK(osc.regime == Regime::unstable);
  CHECK(osc.v_star == 0.0);
  CHECK(osc.m_star == 0);
  REQUIRE(osc.dominant_roots.size() == 1);
  CHECK(std::abs(osc.dominant_roots[0].lambda - I * pi / 2.0) < 1e-9);

  const SpectralSummary up = classify({SignedMeasure::dirac(-1.0), 1.0});
  CHECK(up.regime == Regime::explosive);
  CHECK(up.v_star > 0.0);
}

TEST_CASE("classify: double root carries a degree-one polynomial") {
  const SpectralSummary s = classify({SignedMeasure::dirac(-1.0), -std::exp(-1.0)});
  CHECK(s.regime == Regime::stable);
  CHECK(s.v_star == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(s.m_star == 1);
}

TEST_CASE("classify: conjugate coefficients") {
  for (const auto& entry : oracle::residue_suite()) {
    const SpectralSummary s = classify(entry.model);
    for (const RootRecord& r : s.roots) {
      const auto twin = std::find_if(s.roots.begin(), s.roots.end(), [&](const RootRecord& o) {
        return o.lambda == std::conj(r.lambda);
      });
      REQUIRE(twin != s.roots.end());
      for (std::size_t ell = 0; ell < r.coeffs.size(); ++ell) {
        CHECK(std::abs(twin->coeffs[ell] - std::conj(r.coeffs[ell])) <= 1e-10);
      }
    }
  }
}

TEST_CASE("classify: poly_degree follows the coefficient tolerance") {
  for (const auto& entry : oracle::residue_suite()) {
    const SpectralSummary s = classify(entry.model);
    const double tol = coefficient_tolerance(entry.model.theta);
    for (const RootRecord& r : s.roots) {
      Degree expected;
      for (std::size_t ell = 0; ell < r.coeffs.size(); ++ell) {
        if (std::abs(r.coeffs[ell]) > tol) expected = static_cast<int>(ell);
      }
      CHECK(r.poly_degree == expected);
    }
  }
}

TEST_CASE("classify ignores a zero density piece") {
  const CharacteristicModel base{SignedMeasure(1.0, {{0.0, 0.6}, {-1.0, 0.4}}), -0.8};
  const CharacteristicModel padded{base.measure.with_piece({-0.7, -0.2, {0.0, 0.0}}), -0.8};
  const SpectralSummary a = classify(base);
  const SpectralSummary b = classify(padded);
  CHECK(a.v_star == b.v_star);
  CHECK(a.m_star == b.m_star);
  CHECK(a.regime == b.regime);
  REQUIRE(a.roots.size() == b.roots.size());
  for (std::size_t i = 0; i < a.roots.size(); ++i) {
    CHECK(a.roots[i].lambda == b.roots[i].lambda);
    CHECK(a.roots[i].coeffs == b.roots[i].coeffs);
  }
}

TEST_CASE("regime names") {
  CHECK(to_string(Regime::stable) == "stable");
  CHECK(to_string(Regime::unstable) == "unstable");
  CHECK(to_string(Regime::explosive) == "explosive");
  CHECK(to_string(Regime::degenerate) == "degenerate");
}
