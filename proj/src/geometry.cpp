#include "spdstats/geometry.hpp"

#include <cmath>

namespace spdstats {

const char* metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::LogEuclidean: return "log-euclidean";
    case MetricKind::Canonical: return "canonical";
  }
  return "?";
}

double dist(MetricKind kind, const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgumentError("dist: dimension mismatch");
  }
  switch (kind) {
    case MetricKind::Euclidean:
      return (a.mat() - b.mat()).norm();
    case MetricKind::LogEuclidean:
      return (spd_log(a).mat() - spd_log(b).mat()).norm();
    case MetricKind::Canonical: {
      // sqrt(sum (log lambda_i)^2) over eigenvalues of A^{-1/2} B A^{-1/2};
      // numerically stabler than logging the product.
      SpdMatrix ai = spd_inv(spd_sqrt(a));
      SymMatrix w(ai.mat() * b.mat() * ai.mat());
      EigenDecomposition ed = sym_eig(w);
      double s = 0.0;
      for (int i = 0; i < ed.lambda.size(); ++i) {
        if (ed.lambda(i) <= 0.0) {
          throw NumericError("dist(canonical): similarity lost positivity");
        }
        const double l = std::log(ed.lambda(i));
        s += l * l;
      }
      return std::sqrt(s);
    }
  }
  throw InvalidArgumentError("dist: unknown metric");
}

SpdMatrix riem_exp(const SpdMatrix& m, const SymMatrix& y) {
  if (m.dim() != y.dim()) {
    throw InvalidArgumentError("riem_exp: dimension mismatch");
  }
  const SpdMatrix mh = spd_sqrt(m);
  const SpdMatrix mih = spd_inv(mh);
  const SpdMatrix inner = sym_exp(SymMatrix(mih.mat() * y.mat() * mih.mat()));
  return SpdMatrix(mh.mat() * inner.mat() * mh.mat());
}

SymMatrix riem_log(const SpdMatrix& m, const SpdMatrix& x) {
  if (m.dim() != x.dim()) {
    throw InvalidArgumentError("riem_log: dimension mismatch");
  }
  const SpdMatrix mh = spd_sqrt(m);
  const SpdMatrix mih = spd_inv(mh);
  const SymMatrix inner =
      spd_log(SpdMatrix(mih.mat() * x.mat() * mih.mat()));
  return SymMatrix(mh.mat() * inner.mat() * mh.mat());
}

SpdMatrix group_act(const Eigen::MatrixXd& g, const SpdMatrix& x) {
  if (g.rows() != g.cols() || g.rows() != x.dim()) {
    throw InvalidArgumentError("group_act: G must be p x p");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smax <= 0.0 || smin / smax < 1e-12) {
    throw InvalidArgumentError("group_act: G is singular");
  }
  return SpdMatrix(g * x.mat() * g.transpose());
}

}  // namespace spdstats
