#pragma once

#include <utility>
#include <vector>

#include "spdstats/distributions.hpp"
#include "spdstats/geometry.hpp"
#include "spdstats/means.hpp"

namespace spdstats {

double chi2_cdf(double x, int dof);
double chi2_quantile(double prob, int dof);

/// (1/n) sum vecd(Y_i) vecd(Y_i)' over tangent residuals; no mean subtraction
/// (the residuals of each average sum to zero by construction).
Eigen::MatrixXd estimate_sigma(const std::vector<SymMatrix>& residuals);

/// Curvature correction K-hat = I + D' (1/n) sum [ (Y_i (-) Y_i)^2 / 12 +
/// (Y_i (-) Y_i)^4 / 720 ] D, truncated at the two leading terms.
Eigen::MatrixXd estimate_k(const std::vector<SymMatrix>& residuals);

/// Large-sample ellipsoidal confidence region for one of the three means.
struct ConfidenceRegion {
  MetricKind kind;
  SpdMatrix center;          // X-bar, log-Euclidean average, or Karcher mean
  Eigen::MatrixXd sigma_hat; // q x q
  Eigen::MatrixXd k_hat;     // identity for non-canonical kinds
  int n = 0;
  double alpha = 0.05;
};

ConfidenceRegion build_cr(MetricKind kind, const SampleSet& s, double alpha,
                          const KarcherConfig& karcher = {});

/// Quadratic statistic of a candidate mean M; zero at the center, and equal
/// to chi2_quantile(1 - alpha, q) on the region boundary.
double cr_statistic(const ConfidenceRegion& cr, const SpdMatrix& m);

/// Smallest alpha such that M lies inside the level-alpha region:
/// 1 - chi2_cdf(statistic, q).
double cr_pvalue(const ConfidenceRegion& cr, const SpdMatrix& m);

/// The two boundary points along the first principal component of the
/// tangent-space ellipsoid. The Euclidean pair may leave the PD cone, which
/// is an error; the other kinds stay inside by construction.
std::pair<SpdMatrix, SpdMatrix> cr_extreme_points(const ConfidenceRegion& cr);

struct FdrResult {
  double q_level = 0.0;
  std::vector<int> rejected;           // indices into the input p-values
  double threshold = -1.0;             // largest rejected p-value, -1 if none
};

/// Benjamini-Hochberg step-up rule at level q_level.
FdrResult bh_fdr(const std::vector<double>& pvalues, double q_level);

}  // namespace spdstats
