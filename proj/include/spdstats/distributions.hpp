#pragma once

#include <random>

#include "spdstats/means.hpp"
#include "spdstats/symcore.hpp"

namespace spdstats {

using Rng = std::mt19937_64;

/// One N(0,1) draw via Box-Muller; consumes exactly two engine outputs, so
/// draw sequences are reproducible regardless of library internals.
double standard_normal(Rng& rng);

/// Symmetric-matrix normal: vecd(X) ~ N(vecd(mean), sigma). sigma must be
/// symmetric positive semidefinite q x q (singular directions are allowed for
/// sampling; densities require strictly PD sigma).
class SymNormalModel {
 public:
  SymNormalModel(SymMatrix mean, Eigen::MatrixXd sigma);

  const SymMatrix& mean() const { return mean_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& sigma_sqrt() const { return sigma_sqrt_; }
  int p() const { return mean_.dim(); }
  int q() const { return static_cast<int>(sigma_.rows()); }

 private:
  SymMatrix mean_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd sigma_sqrt_;
};

/// log X ~ N(log M, Sigma); M is the log-Euclidean mean.
class LognormalTypeI {
 public:
  LognormalTypeI(SpdMatrix m, Eigen::MatrixXd sigma);

  const SpdMatrix& m() const { return m_; }
  const SymMatrix& log_m() const { return log_m_; }
  const SymNormalModel& log_model() const { return log_model_; }

 private:
  SpdMatrix m_;
  SymMatrix log_m_;
  SymNormalModel log_model_;  // N(log M, Sigma)
};

/// log(M^{-1/2} X M^{-1/2}) ~ N(0, Sigma); M is the canonical geometric mean.
class LognormalTypeII {
 public:
  LognormalTypeII(SpdMatrix m, Eigen::MatrixXd sigma);

  const SpdMatrix& m() const { return m_; }
  const SpdMatrix& m_sqrt() const { return m_sqrt_; }
  const SymNormalModel& tangent_model() const { return tangent_model_; }

 private:
  SpdMatrix m_;
  SpdMatrix m_sqrt_;
  SymNormalModel tangent_model_;  // N(0, Sigma)
};

SymMatrix symnormal_sample(const SymNormalModel& model, Rng& rng);
SpdMatrix lnI_sample(const LognormalTypeI& model, Rng& rng);
SpdMatrix lnII_sample(const LognormalTypeII& model, Rng& rng);

/// Jacobian |det d vecd(log X) / d vecd(X)| = (1/prod lambda_i) *
/// prod_{i<j} g(lambda_i, lambda_j) with
/// g = (log li - log lj)/(li - lj), and 1/li in the equal-eigenvalue limit.
double jacobian_logmap(const SpdMatrix& x);

double lnI_density(const SpdMatrix& x, const LognormalTypeI& model);
double lnII_density(const SpdMatrix& x, const LognormalTypeII& model);

struct LognormalMle {
  LognormalTypeI model;
  bool sigma_singular = false;  // density evaluation refused when set
};

/// MLE for Type I: M-hat = log-Euclidean average, Sigma-hat = (1/n) sum of
/// centered vecd-log outer products.
LognormalMle lnI_mle(const SampleSet& s);

}  // namespace spdstats
