#pragma once

#include <Eigen/Dense>

#include "spdstats/errors.hpp"

namespace spdstats {

/// A real symmetric p x p matrix. Storage is symmetrized (m + m')/2 on
/// construction so that entries[i][j] == entries[j][i] holds exactly.
class SymMatrix {
 public:
  explicit SymMatrix(const Eigen::MatrixXd& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  static SymMatrix Zero(int p) { return SymMatrix(Eigen::MatrixXd::Zero(p, p)); }

 protected:
  Eigen::MatrixXd m_;
};

/// A symmetric positive definite matrix. The constructor rejects inputs whose
/// smallest eigenvalue is <= 0, with no slack; callers needing jitter must add
/// it explicitly.
class SpdMatrix : public SymMatrix {
 public:
  explicit SpdMatrix(const Eigen::MatrixXd& m);
  explicit SpdMatrix(const SymMatrix& m) : SpdMatrix(m.mat()) {}

  static SpdMatrix Identity(int p) {
    return SpdMatrix(Eigen::MatrixXd::Identity(p, p));
  }
};

/// Spectral decomposition Y = V Diag(lambda) V' with eigenvalues sorted
/// descending. Among (near-)equal eigenvalues, eigenvectors are sign-fixed so
/// their first nonzero component is positive, then ordered lexicographically,
/// giving a deterministic output for identical inputs.
struct EigenDecomposition {
  Eigen::MatrixXd V;       // columns are eigenvectors
  Eigen::VectorXd lambda;  // descending
};

/// Isometric vectorization of a SymMatrix: diagonal entries first, then
/// sqrt(2)-scaled below-diagonal entries read columnwise. The Euclidean norm
/// equals the Frobenius norm of the source matrix.
struct VecdVector {
  Eigen::VectorXd values;
  int p = 0;  // source matrix dimension

  int q() const { return static_cast<int>(values.size()); }
};

/// The p^2 x q matrix D with vec(Y) = D vecd(Y) and vecd(Y) = D' vec(Y).
struct DuplicationMatrix {
  int p = 0;
  Eigen::MatrixXd D;
};

int vecd_length(int p);            // q = p(p+1)/2
int vecd_source_dim(int q);        // inverse; throws if q is not triangular

VecdVector vecd(const SymMatrix& y);
SymMatrix vecd_inv(const VecdVector& v);
SymMatrix vecd_inv(const Eigen::VectorXd& v);  // p inferred from the length

DuplicationMatrix duplication_matrix(int p);

EigenDecomposition sym_eig(const SymMatrix& y);

SpdMatrix sym_exp(const SymMatrix& y);
SymMatrix spd_log(const SpdMatrix& x);
SpdMatrix spd_sqrt(const SpdMatrix& x);
SpdMatrix spd_inv(const SpdMatrix& x);

/// Kronecker difference Y (-) Y = Y (x) I - I (x) Y, a p^2 x p^2 matrix whose
/// eigenvalues are the pairwise differences lambda_i - lambda_j.
Eigen::MatrixXd kron_diff(const SymMatrix& y);

/// Commutator-free polynomial expansion of log(e^Y e^Z), truncated at the
/// degree-5 words. Approximation error is O((|Y|+|Z|)^6); exact when Y and Z
/// commute. The result is generally non-symmetric.
Eigen::MatrixXd bch_goldberg(const SymMatrix& y, const SymMatrix& z);

}  // namespace spdstats
