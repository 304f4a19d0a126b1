#pragma once

#include "spdstats/symcore.hpp"

namespace spdstats {

enum class MetricKind { Euclidean, LogEuclidean, Canonical };

const char* metric_name(MetricKind kind);

/// Geodesic distance between two SPD matrices under the chosen metric.
double dist(MetricKind kind, const SpdMatrix& a, const SpdMatrix& b);

/// Riemannian exponential map at M under the affine-invariant metric:
/// M^{1/2} exp(M^{-1/2} Y M^{-1/2}) M^{1/2}.
SpdMatrix riem_exp(const SpdMatrix& m, const SymMatrix& y);

/// Riemannian logarithmic map at M, inverse of riem_exp:
/// M^{1/2} log(M^{-1/2} X M^{-1/2}) M^{1/2}.
SymMatrix riem_log(const SpdMatrix& m, const SpdMatrix& x);

/// Group action of GL(p): X -> G X G'. Rejects (numerically) singular G.
SpdMatrix group_act(const Eigen::MatrixXd& g, const SpdMatrix& x);

}  // namespace spdstats
