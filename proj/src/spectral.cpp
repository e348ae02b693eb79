#include "delaysde/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "delaysde/errors.hpp"

namespace delaysde {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Thrown internally when a contour runs too close to a zero of h.
struct NearSingular {};

struct Cell {
  double x0, x1, y0, y1;
  int count;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  cdouble centre() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool contains(cdouble z, double slack) const {
    return z.real() >= x0 - slack && z.real() <= x1 + slack &&
           z.imag() >= y0 - slack && z.imag() <= y1 + slack;
  }
};

class ContourTracker {
 public:
  explicit ContourTracker(const CharacteristicModel& model)
      : model_(model),
        delay_(model.measure.delay()),
        weight_(std::abs(model.theta) * model.measure.total_variation_bound()),
        base_step_(std::min(0.1, 0.1 / model.measure.delay())) {}

  // Winding number of h around the counterclockwise rectangle boundary.
  int rectangle(double x0, double x1, double y0, double y1) const {
    const std::array<cdouble, 4> corners{cdouble{x0, y0}, cdouble{x1, y0},
                                         cdouble{x1, y1}, cdouble{x0, y1}};
    double total = 0.0;
    for (std::size_t i = 0; i < corners.size(); ++i) {
      total += segment(corners[i], corners[(i + 1) % corners.size()]);
    }
    const double turns = total / kTwoPi;
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) > 0.05) throw NearSingular{};
    return static_cast<int>(rounded);
  }

  int cell(const Cell& c) const { return rectangle(c.x0, c.x1, c.y0, c.y1); }

 private:
  // Rounding floor of |h(z)|: below it the argument is noise.
  double floor_at(cdouble z) const {
    const double growth = std::exp(delay_ * std::max(0.0, -z.real()));
    return 1e-13 * (1.0 + std::abs(z) + weight_ * growth);
  }

  cdouble eval(cdouble z) const {
    const cdouble f = char_eval(model_, z);
    if (!(std::abs(f) > floor_at(z))) throw NearSingular{};
    return f;
  }

  double segment(cdouble a, cdouble b) const {
    const int pieces =
        std::max(4, static_cast<int>(std::ceil(std::abs(b - a) / base_step_)));
    cdouble za = a;
    cdouble fa = eval(a);
    double total = 0.0;
    for (int i = 1; i <= pieces; ++i) {
      const cdouble zb = (i == pieces) ? b : a + (b - a) * (double(i) / pieces);
      const cdouble fb = eval(zb);
      total += refine(za, fa, zb, fb, 0);
      za = zb;
      fa = fb;
    }
    return total;
  }

  // Bisect until consecutive values differ by at most half their modulus,
  // which bounds each argument increment by pi/6.
  double refine(cdouble za, cdouble fa, cdouble zb, cdouble fb, int depth) const {
    if (std::abs(fb - fa) <= 0.5 * std::min(std::abs(fa), std::abs(fb))) {
      return std::arg(fb / fa);
    }
    if (depth >= 60) throw NearSingular{};
    const cdouble zm = 0.5 * (za + zb);
    const cdouble fm = eval(zm);
    return refine(za, fa, zm, fm, depth + 1) + refine(zm, fm, zb, fb, depth + 1);
  }

  const CharacteristicModel& model_;
  double delay_;
  double weight_;
  double base_step_;
};

struct NewtonResult {
  cdouble z;
  bool ok = false;
};

// Plain Newton on h; ok when the residual is small, not necessarily at the
// 1e-12 polishing tolerance (clusters converge only linearly).
NewtonResult newton(const CharacteristicModel& model, cdouble z, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const cdouble f = char_eval(model, z);
    const cdouble d = char_derivative(model, z, 1);
    if (d == 0.0 || !std::isfinite(std::abs(f))) return {z, false};
    const cdouble step = f / d;
    z -= step;
    if (!std::isfinite(std::abs(z))) return {z, false};
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(z))) break;
  }
  const double res = std::abs(char_eval(model, z));
  return {z, res <= 1e-10 * (1.0 + std::abs(z))};
}

// Newton on h^{(m-1)}, whose zero is simple at an m-fold zero of h.
cdouble polish(const CharacteristicModel& model, cdouble z, int multiplicity,
               int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const cdouble g = multiplicity == 1
                          ? char_eval(model, z)
                          : char_derivative(model, z, multiplicity - 1);
    const cdouble d = char_derivative(model, z, multiplicity);
    if (d == 0.0) break;
    const cdouble step = g / d;
    if (!std::isfinite(std::abs(step))) break;
    z -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() *
                              (1.0 + std::abs(z))) {
      break;
    }
  }
  return z;
}

class RootSolver {
 public:
  RootSolver(const CharacteristicModel& model, const RootFinderOptions& options)
      : model_(model), options_(options), tracker_(model) {}

  std::vector<Root> solve(Cell top) {
    std::vector<Root> roots;
    std::vector<Cell> stack{top};
    std::size_t visited = 0;
    while (!stack.empty()) {
      const Cell cell = stack.back();
      stack.pop_back();
      if (cell.count == 0) continue;
      if (++visited > options_.max_cells) {
        throw RegionTooLarge("find_roots: subdivision exceeded the budget of " +
                             std::to_string(options_.max_cells) + " cells");
      }
      if (auto root = isolate(cell)) {
        roots.push_back(*root);
        continue;
      }
      if (std::max(cell.width(), cell.height()) <
          1e-11 * (1.0 + std::abs(cell.centre()))) {
        throw NonConvergence("find_roots: Newton failed on a cell of size " +
                             std::to_string(cell.width()));
      }
      auto children = split(cell);
      // Push in reverse so the lower/left child is processed first.
      stack.push_back(children[1]);
      stack.push_back(children[0]);
    }
    return roots;
  }

 private:
  std::optional<Root> isolate(const Cell& cell) const {
    const double slack = 1e-9 * (1.0 + std::abs(cell.centre()));
    if (cell.count == 1) {
      const NewtonResult r =
          newton(model_, cell.centre(), options_.max_newton_iterations);
      if (!r.ok || !cell.contains(r.z, slack)) return std::nullopt;
      return Root{polish(model_, r.z, 1, options_.max_newton_iterations), 1};
    }
    return cluster(cell, slack);
  }

  // A cell with winding n >= 2 is accepted as one n-fold zero when Newton
  // started from five points lands within the cluster tolerance and a small
  // square around the limit winds n times.
  std::optional<Root> cluster(const Cell& cell, double slack) const {
    const cdouble c = cell.centre();
    const double dx = 0.25 * cell.width();
    const double dy = 0.25 * cell.height();
    const std::array<cdouble, 5> starts{c, c + cdouble{dx, dy}, c + cdouble{-dx, dy},
                                        c + cdouble{-dx, -dy}, c + cdouble{dx, -dy}};
    std::vector<cdouble> limits;
    for (cdouble s : starts) {
      const NewtonResult r = newton(model_, s, 4 * options_.max_newton_iterations);
      if (!r.ok || !cell.contains(r.z, slack)) return std::nullopt;
      limits.push_back(r.z);
    }
    cdouble mean = 0.0;
    for (cdouble z : limits) mean += z;
    mean /= static_cast<double>(limits.size());
    const double tol = options_.cluster_tolerance * std::max(1.0, std::abs(mean));
    for (cdouble z : limits) {
      if (std::abs(z - mean) > tol) return std::nullopt;
    }
    const int n = cell.count;
    const cdouble z =
        polish(model_, mean, n, options_.max_newton_iterations);
    const double rho = std::pow(10.0, -10.0 / n) * std::max(1.0, std::abs(z));
    try {
      if (tracker_.rectangle(z.real() - rho, z.real() + rho, z.imag() - rho,
                             z.imag() + rho) != n) {
        return std::nullopt;
      }
    } catch (const NearSingular&) {
      return std::nullopt;
    }
    return Root{z, n};
  }

  std::array<Cell, 2> split(const Cell& cell) const {
    static constexpr std::array<double, 8> kFractions{
        0.5137, 0.4709, 0.5571, 0.4167, 0.6123, 0.3609, 0.6811, 0.2917};
    const bool vertical = cell.width() >= cell.height();
    for (double f : kFractions) {
      std::array<Cell, 2> kids{cell, cell};
      if (vertical) {
        const double xm = cell.x0 + f * cell.width();
        kids[0].x1 = xm;
        kids[1].x0 = xm;
      } else {
        const double ym = cell.y0 + f * cell.height();
        kids[0].y1 = ym;
        kids[1].y0 = ym;
      }
      try {
        kids[0].count = tracker_.cell(kids[0]);
        kids[1].count = tracker_.cell(kids[1]);
      } catch (const NearSingular&) {
        continue;
      }
      if (kids[0].count >= 0 && kids[1].count >= 0 &&
          kids[0].count + kids[1].count == cell.count) {
        return kids;
      }
    }
    throw NonConvergence("find_roots: could not split a cell consistently");
  }

  const CharacteristicModel& model_;
  RootFinderOptions options_;
  ContourTracker tracker_;
};

bool less_root(const Root& a, const Root& b) {
  if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
  return a.lambda.imag() < b.lambda.imag();
}

// Snap near-real roots onto the axis and rebuild the list as real roots plus
// exact conjugate pairs.
std::vector<Root> symmetrize(const CharacteristicModel& model,
                             std::vector<Root> found,
                             const RootFinderOptions& options) {
  std::vector<Root> real;
  std::vector<Root> upper;
  std::vector<Root> lower;
  for (Root& root : found) {
    const double scale = std::max(1.0, std::abs(root.lambda));
    if (std::abs(root.lambda.imag()) <= 1e-8 * scale) {
      root.lambda = polish(model, cdouble{root.lambda.real(), 0.0},
                           root.multiplicity, options.max_newton_iterations);
      root.lambda.imag(0.0);
      real.push_back(root);
    } else if (root.lambda.imag() > 0.0) {
      upper.push_back(root);
    } else {
      lower.push_back(root);
    }
  }
  for (const Root& low : lower) {
    const cdouble mirrored = std::conj(low.lambda);
    const bool matched = std::any_of(upper.begin(), upper.end(), [&](const Root& up) {
      return std::abs(up.lambda - mirrored) <=
             1e-6 * std::max(1.0, std::abs(mirrored));
    });
    if (!matched) upper.push_back(Root{mirrored, low.multiplicity});
  }
  std::vector<Root> roots = real;
  for (const Root& up : upper) {
    roots.push_back(up);
    roots.push_back(Root{std::conj(up.lambda), up.multiplicity});
  }
  std::sort(roots.begin(), roots.end(), less_root);

  // Merge anything closer than the cluster tolerance.
  std::vector<Root> merged;
  for (const Root& root : roots) {
    if (!merged.empty() &&
        std::abs(merged.back().lambda - root.lambda) <=
            options.cluster_tolerance * std::max(1.0, std::abs(root.lambda))) {
      merged.back().multiplicity += root.multiplicity;
      continue;
    }
    merged.push_back(root);
  }
  return merged;
}

}  // namespace

cdouble char_eval(const CharacteristicModel& model, cdouble lambda) {
  if (model.theta == 0.0) return lambda;
  return lambda - model.theta * model.measure.exp_moment(lambda, 0);
}

cdouble char_derivative(const CharacteristicModel& model, cdouble lambda, int k) {
  if (k < 1) throw InvalidArgument("char_derivative: order must be positive");
  const cdouble tail = model.theta == 0.0
                           ? cdouble{0.0}
                           : model.theta * model.measure.exp_moment(lambda, k);
  return (k == 1 ? 1.0 : 0.0) - tail;
}

SearchRegion default_region(const CharacteristicModel& model) {
  const double r = model.measure.delay();
  return SearchRegion{
      -5.0 / r,
      std::max(1.0, 2.0 * std::abs(model.theta) *
                        model.measure.total_variation_bound()),
      8.0 * std::numbers::pi / r};
}

int winding_number(const CharacteristicModel& model, const SearchRegion& region) {
  try {
    return ContourTracker(model).rectangle(region.re_min, region.re_max,
                                           -region.im_max, region.im_max);
  } catch (const NearSingular&) {
    throw NumericalFailure("winding_number: contour passes too close to a root");
  }
}

RootSearch find_roots(const CharacteristicModel& model, const SearchRegion& region,
                      const RootFinderOptions& options) {
  if (!(region.re_min < region.re_max) || !(region.im_max > 0.0)) {
    throw InvalidArgument("find_roots: empty search region");
  }
  const ContourTracker tracker(model);
  SearchRegion scanned = region;
  const double scale = std::max({1.0, std::abs(region.re_min),
                                 std::abs(region.re_max), region.im_max});
  double shift = 1e-7 * scale;
  std::optional<int> total;
  for (int attempt = 0; attempt < 30 && !total; ++attempt) {
    try {
      total = tracker.rectangle(scanned.re_min, scanned.re_max, -scanned.im_max,
                                scanned.im_max);
    } catch (const NearSingular&) {
      scanned.re_min -= shift;
      scanned.re_max += shift;
      scanned.im_max += shift;
      shift *= 3.0;
    }
  }
  if (!total) {
    throw NonConvergence("find_roots: region boundary could not be moved off the roots");
  }
  if (*total < 0) throw NonConvergence("find_roots: negative winding count");

  RootSolver solver(model, options);
  const Cell top{scanned.re_min, scanned.re_max, -scanned.im_max, scanned.im_max,
                 *total};
  std::vector<Root> roots = symmetrize(model, solver.solve(top), options);

  int counted = 0;
  for (const Root& root : roots) counted += root.multiplicity;
  if (counted != *total) {
    throw NonConvergence("find_roots: found " + std::to_string(counted) +
                         " roots but the winding count is " +
                         std::to_string(*total));
  }
  return RootSearch{std::move(roots), *total, scanned};
}

cdouble residue_coeff(const CharacteristicModel& model, const Root& root, int ell) {
  const int m = root.multiplicity;
  if (m < 1) throw InvalidArgument("residue_coeff: multiplicity must be positive");
  if (ell < 0 || ell >= m) {
    throw InvalidArgument("residue_coeff: ell = " + std::to_string(ell) +
                          " outside [0, " + std::to_string(m - 1) + "]");
  }
  const int order = m - ell - 1;

  // Taylor coefficients h_{m+j} = h^{(m+j)}(lambda) / (m+j)!, j = 0..order.
  std::vector<cdouble> taylor(order + 1);
  double factorial = 1.0;
  for (int k = 2; k <= m; ++k) factorial *= k;
  for (int j = 0; j <= order; ++j) {
    if (j > 0) factorial *= (m + j);
    taylor[j] = char_derivative(model, root.lambda, m + j) / factorial;
  }
  const double tol = 1e-12 * (1.0 + std::abs(model.theta));
  if (std::abs(taylor[0]) <= tol) {
    throw InconsistentMultiplicity(
        "residue_coeff: h^(m) vanishes at the root; multiplicity is too low");
  }

  // Reciprocal power series q = 1 / sum_j taylor[j] w^j.
  std::vector<cdouble> recip(order + 1);
  recip[0] = 1.0 / taylor[0];
  for (int n = 1; n <= order; ++n) {
    cdouble acc = 0.0;
    for (int j = 1; j <= n; ++j) acc += taylor[j] * recip[n - j];
    recip[n] = -acc / taylor[0];
  }

  // Residue at fixed u: e^{lambda u} sum_j u^j / j! q_{order-j}.
  cdouble coeff = 0.0;
  double jfact = 1.0;
  for (int j = 0; j <= order; ++j) {
    if (j > 0) jfact *= j;
    coeff += recip[order - j] / jfact * model.measure.exp_moment(root.lambda, j);
  }
  return coeff;
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::stable: return "stable";
    case Regime::unstable: return "unstable";
    case Regime::explosive: return "explosive";
    case Regime::degenerate: return "degenerate";
  }
  return "unknown";
}

double coefficient_tolerance(double theta) { return 1e-10 * (1.0 + std::abs(theta)); }

SpectralSummary classify(const CharacteristicModel& model, const SearchRegion& region,
                         const RootFinderOptions& options) {
  const RootSearch search = find_roots(model, region, options);
  SpectralSummary summary;
  summary.search_region = search.region;
  summary.winding_count = search.winding_count;

  const double ctol = coefficient_tolerance(model.theta);
  for (const Root& root : search.roots) {
    RootRecord record{root.lambda, root.multiplicity, {}, std::nullopt};
    for (int ell = 0; ell < root.multiplicity; ++ell) {
      const cdouble c = residue_coeff(model, root, ell);
      record.coeffs.push_back(c);
      if (std::abs(c) > ctol) record.poly_degree = ell;
    }
    summary.roots.push_back(std::move(record));
  }

  double v_star = -std::numeric_limits<double>::infinity();
  for (const RootRecord& r : summary.roots) {
    if (r.poly_degree) v_star = std::max(v_star, r.lambda.real());
  }
  if (std::isinf(v_star)) {
    summary.v_star = v_star;
    summary.regime = Regime::degenerate;
    return summary;
  }
  for (const RootRecord& r : summary.roots) {
    if (r.poly_degree && std::abs(r.lambda.real() - v_star) <= kCriticalLineTolerance) {
      summary.m_star = std::max(summary.m_star.value_or(0), *r.poly_degree);
    }
  }
  if (std::abs(v_star) <= kCriticalLineTolerance) v_star = 0.0;
  summary.v_star = v_star;
  summary.regime = v_star < 0.0   ? Regime::stable
                   : v_star > 0.0 ? Regime::explosive
                                  : Regime::unstable;
  for (const RootRecord& r : summary.roots) {
    if (r.poly_degree == summary.m_star && r.lambda.imag() >= 0.0 &&
        std::abs(r.lambda.real() - v_star) <= kCriticalLineTolerance) {
      summary.dominant_roots.push_back(r);
    }
  }
  return summary;
}

SpectralSummary classify(const CharacteristicModel& model) {
  return classify(model, default_region(model));
}

}  // namespace delaysde
