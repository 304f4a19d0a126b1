#include "spdstats/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spdstats {

namespace {

// Regularized lower incomplete gamma P(a, x): series for x < a+1, Lentz
// continued fraction for the upper tail otherwise.
double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) {
    throw InvalidArgumentError("gamma_p: need x >= 0, a > 0");
  }
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // continued fraction for the upper tail Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

double chi2_pdf(double x, int dof) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * dof;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) -
                  std::lgamma(a));
}

// Inverse of a q x q SPD estimate; hard error with a diagnostic when
// singular, since a pseudo-inverse would change the statistic's distribution.
Eigen::MatrixXd invert_sigma(const Eigen::MatrixXd& sigma, int n) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigensolver failed on sigma_hat");
  }
  const int q = static_cast<int>(sigma.rows());
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin <= 0.0 || (lmax > 0.0 && lmin < 1e-12 * lmax)) {
    int rank = 0;
    for (int i = 0; i < q; ++i) {
      if (es.eigenvalues()(i) > 1e-12 * std::max(lmax, 0.0)) ++rank;
    }
    throw DomainError("ill-conditioned confidence region: sigma_hat rank " +
                      std::to_string(rank) + " < q = " + std::to_string(q) +
                      " (n = " + std::to_string(n) + ")");
  }
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

std::vector<SymMatrix> tangent_residuals(MetricKind kind, const SampleSet& s,
                                         const SpdMatrix& center) {
  std::vector<SymMatrix> res;
  res.reserve(s.size());
  switch (kind) {
    case MetricKind::Euclidean:
      for (const auto& xi : s.items()) {
        res.emplace_back(xi.mat() - center.mat());
      }
      break;
    case MetricKind::LogEuclidean: {
      const SymMatrix lc = spd_log(center);
      for (const auto& xi : s.items()) {
        res.emplace_back(spd_log(xi).mat() - lc.mat());
      }
      break;
    }
    case MetricKind::Canonical: {
      const SpdMatrix cih = spd_inv(spd_sqrt(center));
      for (const auto& xi : s.items()) {
        res.push_back(spd_log(SpdMatrix(cih.mat() * xi.mat() * cih.mat())));
      }
      break;
    }
  }
  return res;
}

}  // namespace

double chi2_cdf(double x, int dof) {
  if (dof < 1) throw InvalidArgumentError("chi2_cdf: dof must be >= 1");
  if (x < 0.0) throw InvalidArgumentError("chi2_cdf: x must be >= 0");
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double prob, int dof) {
  if (dof < 1) throw InvalidArgumentError("chi2_quantile: dof must be >= 1");
  if (!(prob > 0.0 && prob < 1.0)) {
    throw InvalidArgumentError("chi2_quantile: prob must be in (0,1)");
  }
  double lo = 0.0;
  double hi = std::max(2.0 * dof, 16.0);
  while (chi2_cdf(hi, dof) < prob) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, dof) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 4; ++i) {  // Newton polish
    const double f = chi2_cdf(x, dof) - prob;
    const double d = chi2_pdf(x, dof);
    if (d <= 0.0) break;
    const double step = f / d;
    if (x - step <= 0.0) break;
    x -= step;
  }
  return x;
}

Eigen::MatrixXd estimate_sigma(const std::vector<SymMatrix>& residuals) {
  if (residuals.empty()) {
    throw InvalidArgumentError("estimate_sigma: empty residual list");
  }
  const int q = vecd_length(residuals.front().dim());
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(q, q);
  for (const auto& y : residuals) {
    const Eigen::VectorXd v = vecd(y).values;
    sigma += v * v.transpose();
  }
  return sigma / static_cast<double>(residuals.size());
}

Eigen::MatrixXd estimate_k(const std::vector<SymMatrix>& residuals) {
  if (residuals.empty()) {
    throw InvalidArgumentError("estimate_k: empty residual list");
  }
  const int p = residuals.front().dim();
  const int q = vecd_length(p);
  const Eigen::MatrixXd d = duplication_matrix(p).D;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p * p, p * p);
  for (const auto& y : residuals) {
    const Eigen::MatrixXd kd = kron_diff(y);
    const Eigen::MatrixXd kd2 = kd * kd;
    acc += kd2 / 12.0 + (kd2 * kd2) / 720.0;
  }
  acc /= static_cast<double>(residuals.size());
  return Eigen::MatrixXd::Identity(q, q) + d.transpose() * acc * d;
}

ConfidenceRegion build_cr(MetricKind kind, const SampleSet& s, double alpha,
                          const KarcherConfig& karcher) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgumentError("build_cr: alpha must be in (0,1)");
  }
  SpdMatrix center = [&] {
    switch (kind) {
      case MetricKind::Euclidean: return mean_euclidean(s);
      case MetricKind::LogEuclidean: return mean_log_euclidean(s);
      case MetricKind::Canonical: return mean_canonical(s, karcher).mean;
    }
    throw InvalidArgumentError("build_cr: unknown metric");
  }();
  const std::vector<SymMatrix> res = tangent_residuals(kind, s, center);
  Eigen::MatrixXd sigma = estimate_sigma(res);
  const int q = vecd_length(s.dim());
  invert_sigma(sigma, s.size());  // admission check: fail fast when singular
  Eigen::MatrixXd k = kind == MetricKind::Canonical
                          ? estimate_k(res)
                          : Eigen::MatrixXd::Identity(q, q);
  return ConfidenceRegion{kind, std::move(center), std::move(sigma),
                          std::move(k), s.size(), alpha};
}

double cr_statistic(const ConfidenceRegion& cr, const SpdMatrix& m) {
  if (m.dim() != cr.center.dim()) {
    throw InvalidArgumentError("cr_statistic: dimension mismatch");
  }
  Eigen::VectorXd z;
  switch (cr.kind) {
    case MetricKind::Euclidean:
      z = vecd(SymMatrix(cr.center.mat() - m.mat())).values;
      break;
    case MetricKind::LogEuclidean:
      z = vecd(SymMatrix(spd_log(cr.center).mat() - spd_log(m).mat())).values;
      break;
    case MetricKind::Canonical: {
      const SpdMatrix mih = spd_inv(spd_sqrt(m));
      const SymMatrix y =
          spd_log(SpdMatrix(mih.mat() * cr.center.mat() * mih.mat()));
      z = cr.k_hat * vecd(y).values;
      break;
    }
  }
  const Eigen::MatrixXd si = invert_sigma(cr.sigma_hat, cr.n);
  return cr.n * z.dot(si * z);
}

double cr_pvalue(const ConfidenceRegion& cr, const SpdMatrix& m) {
  const int q = vecd_length(cr.center.dim());
  return 1.0 - chi2_cdf(cr_statistic(cr, m), q);
}

std::pair<SpdMatrix, SpdMatrix> cr_extreme_points(const ConfidenceRegion& cr) {
  const int q = vecd_length(cr.center.dim());
  Eigen::MatrixXd w = cr.sigma_hat;
  if (cr.kind == MetricKind::Canonical) {
    const Eigen::MatrixXd ki = cr.k_hat.inverse();
    w = ki * cr.sigma_hat * ki.transpose();
  }
  const EigenDecomposition ed = sym_eig(SymMatrix(w));
  const double lambda1 = ed.lambda(0);
  const Eigen::VectorXd v1 = ed.V.col(0);
  const double radius =
      std::sqrt(lambda1 * chi2_quantile(1.0 - cr.alpha, q) / cr.n);
  const SymMatrix step = vecd_inv(Eigen::VectorXd(radius * v1));

  switch (cr.kind) {
    case MetricKind::Euclidean: {
      const Eigen::MatrixXd plus = cr.center.mat() + step.mat();
      const Eigen::MatrixXd minus = cr.center.mat() - step.mat();
      try {
        return {SpdMatrix(plus), SpdMatrix(minus)};
      } catch (const DomainError&) {
        throw DomainError(
            "Euclidean extreme point leaves the PD cone (boundary violation)");
      }
    }
    case MetricKind::LogEuclidean: {
      const SymMatrix lc = spd_log(cr.center);
      return {sym_exp(SymMatrix(lc.mat() + step.mat())),
              sym_exp(SymMatrix(lc.mat() - step.mat()))};
    }
    case MetricKind::Canonical: {
      const SpdMatrix b_plus = sym_exp(step);
      const SpdMatrix b_minus = sym_exp(SymMatrix(-step.mat()));
      return {riccati_solve(cr.center, b_plus),
              riccati_solve(cr.center, b_minus)};
    }
  }
  throw InvalidArgumentError("cr_extreme_points: unknown metric");
}

FdrResult bh_fdr(const std::vector<double>& pvalues, double q_level) {
  if (!(q_level > 0.0 && q_level < 1.0)) {
    throw InvalidArgumentError("bh_fdr: q_level must be in (0,1)");
  }
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgumentError("bh_fdr: p-values must be in [0,1]");
    }
  }
  const int m = static_cast<int>(pvalues.size());
  FdrResult out;
  out.q_level = q_level;
  if (m == 0) return out;

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pvalues[a] < pvalues[b]; });
  int k = -1;  // largest i (0-based) with p_(i) <= (i+1) q / m
  for (int i = 0; i < m; ++i) {
    if (pvalues[order[i]] <= (i + 1) * q_level / m) k = i;
  }
  if (k < 0) return out;
  out.threshold = pvalues[order[k]];
  for (int i = 0; i < m; ++i) {
    if (pvalues[i] <= out.threshold) out.rejected.push_back(i);
  }
  return out;
}

}  // namespace spdstats
