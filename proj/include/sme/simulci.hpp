#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

namespace sme {

struct QuantileResult {
  double value = 0.0;
  double mc_se = 0.0;      // Monte Carlo standard error of the raw estimate
  bool clipped = false;    // negative correlation eigenvalues were clipped at 0
  bool clamped = false;    // raw estimate fell outside the analytic bounds
};

/// Standard normal quantile.
double normal_quantile(double p);

/// Two-sided critical value for m independent coordinates,
/// Phi^-1((1 + level^(1/m)) / 2). By Sidak's inequality this is an upper
/// bound on the equicoordinate quantile for every correlation matrix.
double sidak_quantile(int m, double level);

/// Bonferroni upper bound Phi^-1(1 - (1-level)/(2m)).
double bonferroni_quantile(int m, double level);

/// Smallest c with P(max_i |Z_i| <= c) = level for Z ~ N(0, corr), estimated
/// by Monte Carlo: correlated draws through a symmetric square root of corr
/// (eigendecomposition, negative eigenvalues clipped at 0), then the empirical
/// level-quantile of max_i |Z_i|. The estimate is projected onto the interval
/// [univariate quantile, Sidak quantile], which provably contains the true
/// value, so the bound invariants hold exactly and the m=1 case is exact.
/// Deterministic for fixed (corr, level, seed, n_samples).
QuantileResult equicoordinate_quantile(const Eigen::MatrixXd& corr, double level,
                                       std::uint64_t seed,
                                       std::size_t n_samples = 2'000'000);

}  // namespace sme
