#include "spdstats/distributions.hpp"

#include <cmath>

namespace spdstats {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sigma, int q) {
  if (sigma.rows() != q || sigma.cols() != q) {
    throw InvalidArgumentError("sigma must be q x q with q = p(p+1)/2");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw InvalidArgumentError("sigma must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigensolver failed on covariance");
  }
  const double lmax = es.eigenvalues().maxCoeff();
  Eigen::VectorXd sl(q);
  for (int i = 0; i < q; ++i) {
    const double l = es.eigenvalues()(i);
    if (l < -1e-12 * std::max(1.0, lmax)) {
      throw DomainError("sigma is not positive semidefinite");
    }
    sl(i) = std::sqrt(std::max(l, 0.0));
  }
  return es.eigenvectors() * sl.asDiagonal() * es.eigenvectors().transpose();
}

// Inverse and log-determinant of a strictly PD covariance; refuses singular
// sigma with a diagnostic rather than pseudo-inverting.
struct SigmaInverse {
  Eigen::MatrixXd inv;
  double logdet;
};

SigmaInverse spd_inverse_checked(const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigensolver failed on covariance");
  }
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmin <= 0.0 || lmin < 1e-14 * lmax) {
    throw DomainError("covariance is singular; density undefined");
  }
  Eigen::VectorXd il = es.eigenvalues().cwiseInverse();
  double logdet = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    logdet += std::log(es.eigenvalues()(i));
  }
  return {es.eigenvectors() * il.asDiagonal() * es.eigenvectors().transpose(),
          logdet};
}

}  // namespace

double standard_normal(Rng& rng) {
  // (0,1] uniforms; u1 > 0 keeps the log finite.
  const double u1 =
      (static_cast<double>(rng()) + 1.0) / (static_cast<double>(Rng::max()) + 2.0);
  const double u2 =
      static_cast<double>(rng()) / (static_cast<double>(Rng::max()) + 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

SymNormalModel::SymNormalModel(SymMatrix mean, Eigen::MatrixXd sigma)
    : mean_(std::move(mean)),
      sigma_(std::move(sigma)),
      sigma_sqrt_(psd_sqrt(sigma_, vecd_length(mean_.dim()))) {}

LognormalTypeI::LognormalTypeI(SpdMatrix m, Eigen::MatrixXd sigma)
    : m_(std::move(m)),
      log_m_(spd_log(m_)),
      log_model_(log_m_, std::move(sigma)) {}

LognormalTypeII::LognormalTypeII(SpdMatrix m, Eigen::MatrixXd sigma)
    : m_(std::move(m)),
      m_sqrt_(spd_sqrt(m_)),
      tangent_model_(SymMatrix::Zero(m_.dim()), std::move(sigma)) {}

SymMatrix symnormal_sample(const SymNormalModel& model, Rng& rng) {
  Eigen::VectorXd z(model.q());
  for (int i = 0; i < z.size(); ++i) z(i) = standard_normal(rng);
  const Eigen::VectorXd y =
      vecd(model.mean()).values + model.sigma_sqrt() * z;
  return vecd_inv(y);
}

SpdMatrix lnI_sample(const LognormalTypeI& model, Rng& rng) {
  return sym_exp(symnormal_sample(model.log_model(), rng));
}

SpdMatrix lnII_sample(const LognormalTypeII& model, Rng& rng) {
  const SymMatrix y = symnormal_sample(model.tangent_model(), rng);
  const Eigen::MatrixXd& mh = model.m_sqrt().mat();
  return SpdMatrix(mh * sym_exp(y).mat() * mh);
}

double jacobian_logmap(const SpdMatrix& x) {
  const EigenDecomposition ed = sym_eig(x);
  const int p = x.dim();
  double j = 1.0;
  for (int i = 0; i < p; ++i) j /= ed.lambda(i);
  for (int i = 0; i < p; ++i) {
    for (int k = i + 1; k < p; ++k) {
      const double li = ed.lambda(i), lk = ed.lambda(k);
      const double d = li - lk;
      if (std::abs(d) < 1e-8 * std::max(li, lk)) {
        // second-order expansion of log(li/lk)/(li-lk) about the midpoint
        const double mid = 0.5 * (li + lk);
        const double r = d / mid;
        j *= (1.0 + r * r / 12.0) / mid;
      } else {
        j *= (std::log(li) - std::log(lk)) / d;
      }
    }
  }
  return j;
}

namespace {

double gaussian_log_kernel(const Eigen::VectorXd& z,
                           const Eigen::MatrixXd& sigma, int q) {
  const SigmaInverse si = spd_inverse_checked(sigma);
  const double quad = z.dot(si.inv * z);
  return -0.5 * quad - 0.5 * q * std::log(kTwoPi) - 0.5 * si.logdet;
}

}  // namespace

double lnI_density(const SpdMatrix& x, const LognormalTypeI& model) {
  if (x.dim() != model.m().dim()) {
    throw InvalidArgumentError("lnI_density: dimension mismatch");
  }
  const int q = vecd_length(x.dim());
  const Eigen::VectorXd z =
      vecd(SymMatrix(spd_log(x).mat() - model.log_m().mat())).values;
  const double lk = gaussian_log_kernel(z, model.log_model().sigma(), q);
  return jacobian_logmap(x) * std::exp(lk);
}

double lnII_density(const SpdMatrix& x, const LognormalTypeII& model) {
  if (x.dim() != model.m().dim()) {
    throw InvalidArgumentError("lnII_density: dimension mismatch");
  }
  const int q = vecd_length(x.dim());
  const SpdMatrix mih = spd_inv(model.m_sqrt());
  const SpdMatrix xt(mih.mat() * x.mat() * mih.mat());
  const Eigen::VectorXd z = vecd(spd_log(xt)).values;
  const double lk = gaussian_log_kernel(z, model.tangent_model().sigma(), q);
  // Change of variables X -> M^{-1/2} X M^{-1/2}: a congruence on Sym(p)
  // has Jacobian |det A|^{p+1}, giving the factor |M|^{-(p+1)/2}.
  const double det_m = sym_eig(model.m()).lambda.prod();
  const double whiten = std::pow(det_m, 0.5 * (x.dim() + 1));
  return jacobian_logmap(xt) * std::exp(lk) / whiten;
}

LognormalMle lnI_mle(const SampleSet& s) {
  const int q = vecd_length(s.dim());
  const SpdMatrix m_hat = mean_log_euclidean(s);
  const SymMatrix log_m = spd_log(m_hat);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(q, q);
  for (const auto& xi : s.items()) {
    const Eigen::VectorXd z =
        vecd(SymMatrix(spd_log(xi).mat() - log_m.mat())).values;
    sigma += z * z.transpose();
  }
  sigma /= s.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma,
                                                    Eigen::EigenvaluesOnly);
  const bool singular =
      es.eigenvalues().minCoeff() <= 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff());
  return LognormalMle{LognormalTypeI(m_hat, sigma), singular};
}

}  // namespace spdstats
