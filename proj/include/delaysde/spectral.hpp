#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "delaysde/measure.hpp"

namespace delaysde {

/// h(lambda) = lambda - theta * int e^{lambda u} a(du).
struct CharacteristicModel {
  SignedMeasure measure;
  double theta = 0.0;
};

cdouble char_eval(const CharacteristicModel& model, cdouble lambda);

/// k-th derivative of h, k >= 1.
cdouble char_derivative(const CharacteristicModel& model, cdouble lambda, int k);

/// Rectangle re_min <= Re <= re_max, |Im| <= im_max.
struct SearchRegion {
  double re_min = -5.0;
  double re_max = 1.0;
  double im_max = 25.0;
};

/// Re in [-5/r, max(1, 2 |theta| |a|_TV)], |Im| <= 8 pi / r.
SearchRegion default_region(const CharacteristicModel& model);

struct RootFinderOptions {
  std::size_t max_cells = 200000;
  int max_newton_iterations = 100;
  double cluster_tolerance = 1e-7;
};

struct Root {
  cdouble lambda;
  int multiplicity = 1;
};

struct RootSearch {
  std::vector<Root> roots;  // sorted by Re, then Im
  int winding_count = 0;    // argument-principle count over `region`
  SearchRegion region;      // the rectangle actually scanned
};

/// Number of zeros of h inside the rectangle, by the argument principle.
/// Throws NumericalFailure if the boundary passes too close to a zero.
int winding_number(const CharacteristicModel& model, const SearchRegion& region);

/**
 * All zeros of h in `region`, with multiplicities.
 *
 * Bisects the rectangle into cells until each cell holds one zero (Newton
 * from the cell centre) or a cluster whose Newton limits agree within
 * `cluster_tolerance` (multiplicity = winding number of the cell). The region
 * edges are pushed outward slightly when they pass near a zero. Real roots are
 * returned with zero imaginary part and complex roots in exact conjugate pairs.
 */
RootSearch find_roots(const CharacteristicModel& model,
                      const SearchRegion& region,
                      const RootFinderOptions& options = {});

/// c_{lambda,ell}: the a-integrated residue of (z - lambda)^ell e^{zu} / h(z).
cdouble residue_coeff(const CharacteristicModel& model, const Root& root,
                      int ell);

/// Polynomial degree; std::nullopt stands for -infinity.
using Degree = std::optional<int>;

struct RootRecord {
  cdouble lambda;
  int multiplicity = 1;
  std::vector<cdouble> coeffs;  // ell = 0 .. multiplicity - 1
  Degree poly_degree;
};

enum class Regime { stable, unstable, explosive, degenerate };

std::string_view to_string(Regime regime);

struct SpectralSummary {
  double v_star = 0.0;  // -infinity when no root has a nonzero polynomial
  Degree m_star;
  std::vector<RootRecord> roots;           // every root found
  std::vector<RootRecord> dominant_roots;  // Im >= 0 only
  Regime regime = Regime::degenerate;
  SearchRegion search_region;
  int winding_count = 0;
};

inline constexpr double kCriticalLineTolerance = 1e-8;

double coefficient_tolerance(double theta);

SpectralSummary classify(const CharacteristicModel& model,
                         const SearchRegion& region,
                         const RootFinderOptions& options = {});

SpectralSummary classify(const CharacteristicModel& model);

}  // namespace delaysde
