#pragma once

#include <complex>
#include <span>
#include <vector>

namespace delaysde {

using cdouble = std::complex<double>;

struct Atom {
  double location = 0.0;  // u in [-r, 0]
  double weight = 0.0;
};

/// Polynomial density p(u) = sum_i coeffs[i] * u^i on [lo, hi].
struct DensityPiece {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> coeffs;

  double density_at(double u) const;
};

/**
 * Finite signed measure on [-r, 0] made of point masses plus a
 * piecewise-polynomial density.
 *
 * Construction validates the support, the non-overlap of density pieces and
 * that the measure is not identically zero. Instances are immutable.
 */
class SignedMeasure {
 public:
  static constexpr int kDefaultMaxOrder = 32;

  SignedMeasure(double delay, std::vector<Atom> atoms,
                std::vector<DensityPiece> density = {},
                int max_order = kDefaultMaxOrder);

  /// weight * delta_{location}, with delay r = max(|location|, min_delay).
  static SignedMeasure dirac(double location, double weight = 1.0,
                             double min_delay = 1.0);

  double delay() const { return delay_; }
  int max_order() const { return max_order_; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const DensityPiece> density() const { return density_; }

  /// a([-r, 0]).
  double total_mass() const;

  /// Upper bound on the total variation |a|([-r, 0]); exact for atoms.
  double total_variation_bound() const;

  /// int u^k e^{lambda u} a(du), exact up to rounding.
  cdouble exp_moment(cdouble lambda, int k) const;

  /// Sum of two measures; overlapping density pieces are split and added.
  SignedMeasure operator+(const SignedMeasure& other) const;

  /// Copy with an extra density piece appended (validated like the ctor).
  SignedMeasure with_piece(DensityPiece piece) const;

 private:
  double delay_;
  std::vector<Atom> atoms_;
  std::vector<DensityPiece> density_;
  int max_order_;
};

/// int_lo^hi u^m e^{lambda u} du. Exposed for tests.
cdouble power_exp_integral(double lo, double hi, int m, cdouble lambda);

}  // namespace delaysde
