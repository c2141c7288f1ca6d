#include "sme/simulci.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "sme/errors.hpp"
#include "sme/rng.hpp"

namespace sme {

namespace {

void check_correlation(const Eigen::MatrixXd& corr) {
  if (corr.rows() != corr.cols() || corr.rows() < 1)
    throw invalid_correlation_error("correlation matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    if (std::abs(corr(i, i) - 1.0) > 1e-10)
      throw invalid_correlation_error("correlation matrix must have unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(corr(i, j) - corr(j, i)) > 1e-10)
        throw invalid_correlation_error("correlation matrix must be symmetric");
      if (std::abs(corr(i, j)) > 1.0 + 1e-10)
        throw invalid_correlation_error("correlation entries must lie in [-1,1]");
    }
  }
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw domain_error("confidence level must lie in (0,1)");
}

// Empirical quantile at probability p: smallest order statistic whose
// empirical CDF reaches p.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  std::size_t n = sorted.size();
  double pos = std::ceil(p * static_cast<double>(n)) - 1.0;
  std::size_t idx = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
  if (idx >= n) idx = n - 1;
  return sorted[idx];
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw domain_error("normal_quantile: p must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double sidak_quantile(int m, double level) {
  check_level(level);
  if (m < 1) throw domain_error("sidak_quantile: m must be >= 1");
  return normal_quantile((1.0 + std::pow(level, 1.0 / m)) / 2.0);
}

double bonferroni_quantile(int m, double level) {
  check_level(level);
  if (m < 1) throw domain_error("bonferroni_quantile: m must be >= 1");
  return normal_quantile(1.0 - (1.0 - level) / (2.0 * m));
}

QuantileResult equicoordinate_quantile(const Eigen::MatrixXd& corr, double level,
                                       std::uint64_t seed,
                                       std::size_t n_samples) {
  check_correlation(corr);
  check_level(level);
  if (n_samples < 1000)
    throw domain_error("equicoordinate_quantile: n_samples too small");
  const int m = static_cast<int>(corr.rows());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.info() != Eigen::Success)
    throw invalid_correlation_error("eigendecomposition failed");
  Eigen::VectorXd evals = eig.eigenvalues();
  double max_eval = evals.maxCoeff();
  bool clipped = false;
  for (int i = 0; i < m; ++i) {
    if (evals[i] < -1e-10 * std::max(1.0, max_eval))
      throw invalid_correlation_error("correlation matrix is not PSD");
    if (evals[i] < 0.0) {
      evals[i] = 0.0;
      clipped = true;
    }
  }
  Eigen::MatrixXd root =
      eig.eigenvectors() * evals.cwiseSqrt().asDiagonal() *
      eig.eigenvectors().transpose();

  Rng rng(seed);
  std::vector<double> maxima(n_samples);
  Eigen::VectorXd g(m);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (int i = 0; i < m; ++i) g[i] = rng.normal();
    double mx = 0.0;
    for (int i = 0; i < m; ++i) {
      double z = root.row(i).dot(g);
      mx = std::max(mx, std::abs(z));
    }
    maxima[s] = mx;
  }
  std::sort(maxima.begin(), maxima.end());

  QuantileResult out;
  double raw = sorted_quantile(maxima, level);

  // se via the asymptotic quantile variance, density estimated from
  // neighbouring order statistics.
  double d = 0.001;
  double lo = std::max(level - d, 0.5 * level);
  double hi = std::min(level + d, 1.0 - (1.0 - level) * 0.5);
  double spread = sorted_quantile(maxima, hi) - sorted_quantile(maxima, lo);
  if (spread > 0.0) {
    double density = (hi - lo) / spread;
    out.mc_se = std::sqrt(level * (1.0 - level) / static_cast<double>(n_samples)) /
                density;
  }

  double lower = normal_quantile((1.0 + level) / 2.0);
  double upper = sidak_quantile(m, level);
  out.value = std::clamp(raw, lower, upper);
  out.clamped = raw < lower || raw > upper;
  out.clipped = clipped;
  return out;
}

}  // namespace sme
