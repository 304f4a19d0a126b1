#include "spdstats/means.hpp"

#include <cmath>

namespace spdstats {

SampleSet::SampleSet(std::vector<SpdMatrix> items) : items_(std::move(items)) {
  if (items_.empty()) {
    throw InvalidArgumentError("SampleSet requires n >= 1");
  }
  const int p = items_.front().dim();
  for (const auto& x : items_) {
    if (x.dim() != p) {
      throw InvalidArgumentError("SampleSet items must share dimension");
    }
  }
}

SpdMatrix mean_euclidean(const SampleSet& s) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(s.dim(), s.dim());
  for (const auto& x : s.items()) acc += x.mat();
  return SpdMatrix(acc / s.size());
}

SpdMatrix mean_log_euclidean(const SampleSet& s) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(s.dim(), s.dim());
  for (const auto& x : s.items()) acc += spd_log(x).mat();
  return sym_exp(SymMatrix(acc / s.size()));
}

KarcherResult mean_canonical(const SampleSet& s, const KarcherConfig& cfg) {
  if (cfg.tol <= 0.0 || cfg.max_iter < 1) {
    throw InvalidArgumentError("KarcherConfig: tol > 0 and max_iter >= 1");
  }
  SpdMatrix x = [&] {
    switch (cfg.init) {
      case KarcherInit::Euclidean: return mean_euclidean(s);
      case KarcherInit::LogEuclidean: return mean_log_euclidean(s);
      case KarcherInit::Explicit:
        if (!cfg.init_value) {
          throw InvalidArgumentError("Explicit init requires init_value");
        }
        return *cfg.init_value;
    }
    throw InvalidArgumentError("bad KarcherInit");
  }();

  const int p = s.dim();
  double residual = 0.0;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    const SpdMatrix xh = spd_sqrt(x);
    const SpdMatrix xih = spd_inv(xh);
    Eigen::MatrixXd ybar = Eigen::MatrixXd::Zero(p, p);
    for (const auto& xi : s.items()) {
      ybar += spd_log(SpdMatrix(xih.mat() * xi.mat() * xih.mat())).mat();
    }
    ybar /= s.size();
    residual = ybar.norm();
    if (residual < cfg.tol) {
      return KarcherResult{x, iter, residual};
    }
    x = SpdMatrix(xh.mat() * sym_exp(SymMatrix(ybar)).mat() * xh.mat());
  }
  throw KarcherNonConvergence(x, residual, cfg.max_iter);
}

SpdMatrix geo_mean_pair(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgumentError("geo_mean_pair: dimension mismatch");
  }
  const SpdMatrix ah = spd_sqrt(a);
  const SpdMatrix aih = spd_inv(ah);
  const SpdMatrix inner =
      spd_sqrt(SpdMatrix(aih.mat() * b.mat() * aih.mat()));
  return SpdMatrix(ah.mat() * inner.mat() * ah.mat());
}

SpdMatrix riccati_solve(const SpdMatrix& xr, const SpdMatrix& b) {
  if (xr.dim() != b.dim()) {
    throw InvalidArgumentError("riccati_solve: dimension mismatch");
  }
  const SpdMatrix bh = spd_sqrt(b);
  const SpdMatrix bih = spd_inv(bh);
  const SpdMatrix c = spd_sqrt(SpdMatrix(bh.mat() * xr.mat() * bh.mat()));
  const SpdMatrix n(bih.mat() * c.mat() * bih.mat());  // n = M^{1/2}
  return SpdMatrix(n.mat() * n.mat());
}

}  // namespace spdstats
