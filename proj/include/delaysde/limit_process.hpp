#pragma once

#include <array>
#include <span>
#include <vector>

#include "delaysde/random.hpp"
#include "delaysde/spectral.hpp"

namespace delaysde {

/**
 * Discretized complex Wiener process W_phi on [0, 1].
 *
 * phi = 0 gives a real path. For phi > 0 the path is (W_re + i W_im) / sqrt(2)
 * built from two independent real streams, so E|dW|^2 = dt. The path for
 * -phi is the pointwise conjugate.
 */
struct ComplexWienerPath {
  double frequency = 0.0;
  double dt = 0.0;
  std::vector<cdouble> increments;  // one per step
  std::vector<cdouble> values;      // steps + 1, values[0] = 0

  int steps() const { return static_cast<int>(increments.size()); }
  ComplexWienerPath conjugate() const;

  static ComplexWienerPath from_increments(double frequency, double dt,
                                           std::vector<cdouble> increments);
};

/// Number of steps of the unit-interval grid for a dt hint (dt rounded down).
int unit_interval_steps(double dt_hint);

/// Uses streams key.stream (real part) and key.stream + 1 (imaginary part).
ComplexWienerPath simulate_complex_wiener(double frequency, double dt_hint,
                                          StreamKey key);

/// (1/ell!) sum_{u_j < s} (s - u_j)^ell dW_j at every grid point s.
std::vector<cdouble> iterated_wiener(const ComplexWienerPath& w, int ell);

/// Trajectories X_0 .. X_{m*} of the delay-free chain driven by one dominant
/// root: dX_0 = alpha c X_{m*} dt + dW, dX_ell = X_{ell-1} dt.
struct LimitSystemPath {
  RootRecord root;
  int m_star = 0;
  double alpha = 0.0;
  cdouble coefficient;  // c_{lambda, m*}
  ComplexWienerPath noise;
  std::vector<std::vector<cdouble>> chain;  // chain[ell][k]

  bool real_root() const { return root.lambda.imag() == 0.0; }
};

LimitSystemPath simulate_limit_system(const RootRecord& root, int m_star, double alpha,
                                      ComplexWienerPath noise);

LimitSystemPath simulate_limit_system(const RootRecord& root, int m_star, double alpha,
                                      double dt_hint, StreamKey key);

/// Dominant roots (Im >= 0) whose polynomial has degree m*. Throws
/// WrongRegime unless the summary is unstable.
std::vector<RootRecord> limit_roots(const SpectralSummary& summary);

/// One replication of the limit experiment: root j is driven by stream
/// kLimitPath + 2j of (seed, replication).
std::vector<LimitSystemPath> simulate_limit_experiment(std::span<const RootRecord> roots,
                                                       int m_star, double alpha,
                                                       double dt_hint, std::uint64_t seed,
                                                       std::uint32_t replication);

struct LimitStatistics {
  double delta = 0.0;
  double info = 0.0;           // J
  double score = 0.0;          // observable numerator of the MLE
  double imag_residual = 0.0;  // |Im| of the unreduced Delta sums
};

/// Delta and J of the limit experiment, real roots counted once and complex
/// roots through 2 Re(...).
LimitStatistics limit_delta_J(std::span<const LimitSystemPath> paths);

double limit_mle_alpha(std::span<const LimitSystemPath> paths, double floor = 1e-12);

/// log dP^{alpha'} / dP^{alpha} on paths generated under alpha.
double limit_loglik_ratio(std::span<const LimitSystemPath> paths, double alpha,
                          double alpha_prime);

/// The same pair built from iterated Wiener integrals, summing over every
/// root on the imaginary axis including conjugates. `upper_roots[i]` is
/// driven by `noises[i]`.
LimitStatistics iterated_delta_J(std::span<const RootRecord> upper_roots, int m_star,
                                 std::span<const ComplexWienerPath> noises);

/// Phi(z) = (Re z, Im z).
std::array<double, 2> phi_vector(cdouble z);
/// Psi(z), the real 2x2 matrix of multiplication by z.
std::array<std::array<double, 2>, 2> psi_matrix(cdouble z);

}  // namespace delaysde
