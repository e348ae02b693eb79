#include "delaysde/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "delaysde/errors.hpp"

namespace delaysde {

namespace {

double ipow(double x, int n) {
  double result = 1.0;
  for (int i = 0; i < n; ++i) result *= x;
  return result;
}

bool in_support(double u, double delay) {
  // A few ulps of slack on the left end so that u = -r computed in floating
  // point is accepted.
  return u <= 0.0 && u >= -delay * (1.0 + 4e-16) && std::isfinite(u);
}

// Taylor branch: sum_n lambda^n / n! * (hi^{p} - lo^{p}) / p, p = m + n + 1.
cdouble series_integral(double lo, double hi, int m, cdouble lambda,
                        double scale) {
  cdouble sum = 0.0;
  cdouble coef = 1.0;  // lambda^n / n!
  const double bound = std::max(std::abs(lo), std::abs(hi));
  const double magnitude = ipow(bound, m + 1) + 1e-300;
  for (int n = 0; n < 400; ++n) {
    if (n > 0) coef *= lambda / static_cast<double>(n);
    const int p = m + n + 1;
    const cdouble term = coef * ((ipow(hi, p) - ipow(lo, p)) / p);
    sum += term;
    if (n > 2.0 * scale + 8.0 &&
        std::abs(term) < 1e-18 * (std::abs(sum) + magnitude)) {
      break;
    }
  }
  return sum;
}

// Closed-form antiderivative via I_j = ([u^j e^{lambda u}] - j I_{j-1}) / lambda.
cdouble closed_form_integral(double lo, double hi, int m, cdouble lambda) {
  const cdouble e_hi = std::exp(lambda * hi);
  const cdouble e_lo = std::exp(lambda * lo);
  cdouble integral = (e_hi - e_lo) / lambda;
  for (int j = 1; j <= m; ++j) {
    integral = (ipow(hi, j) * e_hi - ipow(lo, j) * e_lo -
                static_cast<double>(j) * integral) /
               lambda;
  }
  return integral;
}

}  // namespace

double DensityPiece::density_at(double u) const {
  double value = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
    value = value * u + *it;
  }
  return value;
}

cdouble power_exp_integral(double lo, double hi, int m, cdouble lambda) {
  if (!(hi > lo)) return 0.0;
  const double scale = std::abs(lambda) * std::max(std::abs(lo), std::abs(hi));
  // The forward recurrence amplifies rounding by roughly m!/(|lambda| U)^m,
  // so it is only used once |lambda| U exceeds the order.
  if (scale < m + 2.0) return series_integral(lo, hi, m, lambda, scale);
  return closed_form_integral(lo, hi, m, lambda);
}

SignedMeasure::SignedMeasure(double delay, std::vector<Atom> atoms,
                             std::vector<DensityPiece> density, int max_order)
    : delay_(delay),
      atoms_(std::move(atoms)),
      density_(std::move(density)),
      max_order_(max_order) {
  if (!(delay_ > 0.0) || !std::isfinite(delay_)) {
    throw InvalidArgument("measure: delay r must be positive and finite, got " +
                          std::to_string(delay_));
  }
  if (max_order_ < 0) {
    throw InvalidArgument("measure: max_order must be nonnegative");
  }
  std::map<double, double> grouped;
  for (const Atom& atom : atoms_) {
    if (!in_support(atom.location, delay_) || !std::isfinite(atom.weight)) {
      throw InvalidArgument("measure: atom at u = " +
                            std::to_string(atom.location) +
                            " lies outside [-r, 0]");
    }
    grouped[atom.location] += atom.weight;
  }
  bool nonzero = std::any_of(grouped.begin(), grouped.end(),
                             [](const auto& kv) { return kv.second != 0.0; });

  std::vector<const DensityPiece*> order;
  for (const DensityPiece& piece : density_) {
    if (!in_support(piece.lo, delay_) || !in_support(piece.hi, delay_) ||
        piece.lo > piece.hi) {
      throw InvalidArgument("measure: density interval [" +
                            std::to_string(piece.lo) + ", " +
                            std::to_string(piece.hi) +
                            "] is not a subinterval of [-r, 0]");
    }
    for (double c : piece.coeffs) {
      if (!std::isfinite(c)) {
        throw InvalidArgument("measure: non-finite density coefficient");
      }
      if (c != 0.0 && piece.hi > piece.lo) nonzero = true;
    }
    order.push_back(&piece);
  }
  std::sort(order.begin(), order.end(),
            [](auto* a, auto* b) { return a->lo < b->lo; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->lo < order[i - 1]->hi) {
      throw InvalidArgument("measure: density pieces overlap");
    }
  }
  if (!nonzero) {
    throw InvalidArgument("measure: the measure is identically zero");
  }
}

SignedMeasure SignedMeasure::dirac(double location, double weight,
                                   double min_delay) {
  return SignedMeasure(std::max(std::abs(location), min_delay),
                       {Atom{location, weight}});
}

double SignedMeasure::total_mass() const {
  double mass = 0.0;
  for (const Atom& atom : atoms_) mass += atom.weight;
  for (const DensityPiece& piece : density_) {
    for (std::size_t i = 0; i < piece.coeffs.size(); ++i) {
      const int p = static_cast<int>(i) + 1;
      mass += piece.coeffs[i] * (ipow(piece.hi, p) - ipow(piece.lo, p)) / p;
    }
  }
  return mass;
}

double SignedMeasure::total_variation_bound() const {
  double tv = 0.0;
  for (const Atom& atom : atoms_) tv += std::abs(atom.weight);
  for (const DensityPiece& piece : density_) {
    for (std::size_t i = 0; i < piece.coeffs.size(); ++i) {
      // int_lo^hi |u|^i du with lo <= hi <= 0
      const int p = static_cast<int>(i) + 1;
      const double moment =
          (ipow(-piece.lo, p) - ipow(-piece.hi, p)) / p;
      tv += std::abs(piece.coeffs[i]) * moment;
    }
  }
  return tv;
}

cdouble SignedMeasure::exp_moment(cdouble lambda, int k) const {
  if (k < 0) throw InvalidArgument("exp_moment: negative order");
  if (k > max_order_) {
    throw OrderExceeded("exp_moment: order " + std::to_string(k) +
                        " exceeds the configured maximum " +
                        std::to_string(max_order_));
  }
  cdouble sum = 0.0;
  for (const Atom& atom : atoms_) {
    sum += atom.weight * ipow(atom.location, k) * std::exp(lambda * atom.location);
  }
  for (const DensityPiece& piece : density_) {
    for (std::size_t i = 0; i < piece.coeffs.size(); ++i) {
      if (piece.coeffs[i] == 0.0) continue;
      sum += piece.coeffs[i] *
             power_exp_integral(piece.lo, piece.hi, static_cast<int>(i) + k,
                                lambda);
    }
  }
  return sum;
}

SignedMeasure SignedMeasure::operator+(const SignedMeasure& other) const {
  std::vector<Atom> atoms(atoms_.begin(), atoms_.end());
  atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());

  std::vector<const DensityPiece*> all;
  std::vector<double> breaks;
  for (const auto* src : {&density_, &other.density_}) {
    for (const DensityPiece& piece : *src) {
      all.push_back(&piece);
      breaks.push_back(piece.lo);
      breaks.push_back(piece.hi);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::vector<DensityPiece> density;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    DensityPiece merged{breaks[j], breaks[j + 1], {}};
    bool covered = false;
    for (const DensityPiece* piece : all) {
      if (piece->lo <= merged.lo && merged.hi <= piece->hi) {
        covered = true;
        if (merged.coeffs.size() < piece->coeffs.size()) {
          merged.coeffs.resize(piece->coeffs.size(), 0.0);
        }
        for (std::size_t i = 0; i < piece->coeffs.size(); ++i) {
          merged.coeffs[i] += piece->coeffs[i];
        }
      }
    }
    if (covered) density.push_back(std::move(merged));
  }
  return SignedMeasure(std::max(delay_, other.delay_), std::move(atoms),
                       std::move(density), std::max(max_order_, other.max_order_));
}

SignedMeasure SignedMeasure::with_piece(DensityPiece piece) const {
  std::vector<DensityPiece> density(density_.begin(), density_.end());
  density.push_back(std::move(piece));
  return SignedMeasure(delay_, atoms_, std::move(density), max_order_);
}

}  // namespace delaysde
