#include "spdstats/symcore.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace spdstats {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw InvalidArgumentError("SymMatrix requires a square matrix, p >= 1");
  }
  m_ = 0.5 * (m + m.transpose());
}

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& m) : SymMatrix(m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigensolver failed on SPD admission check");
  }
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw DomainError("matrix is not positive definite (min eigenvalue " +
                      std::to_string(es.eigenvalues().minCoeff()) + ")");
  }
}

int vecd_length(int p) {
  if (p < 1) throw InvalidArgumentError("dimension must be >= 1");
  return p * (p + 1) / 2;
}

int vecd_source_dim(int q) {
  // q = p(p+1)/2  =>  p = (-1 + sqrt(1+8q))/2
  int p = static_cast<int>(std::floor((std::sqrt(8.0 * q + 1.0) - 1.0) / 2.0));
  for (int c = p - 1; c <= p + 1; ++c) {
    if (c >= 1 && c * (c + 1) / 2 == q) return c;
  }
  throw InvalidArgumentError("length " + std::to_string(q) +
                             " is not p(p+1)/2 for any integer p");
}

VecdVector vecd(const SymMatrix& y) {
  const int p = y.dim();
  const int q = vecd_length(p);
  Eigen::VectorXd v(q);
  for (int i = 0; i < p; ++i) v(i) = y(i, i);
  int k = p;
  const double s = std::sqrt(2.0);
  for (int j = 0; j < p; ++j) {       // below-diagonal, columnwise
    for (int i = j + 1; i < p; ++i) {
      v(k++) = s * y(i, j);
    }
  }
  return VecdVector{v, p};
}

SymMatrix vecd_inv(const VecdVector& v) {
  if (v.q() != vecd_length(v.p)) {
    throw InvalidArgumentError("VecdVector length inconsistent with p");
  }
  return vecd_inv(v.values);
}

SymMatrix vecd_inv(const Eigen::VectorXd& v) {
  const int p = vecd_source_dim(static_cast<int>(v.size()));
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i) m(i, i) = v(i);
  int k = p;
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < p; ++j) {
    for (int i = j + 1; i < p; ++i) {
      m(i, j) = m(j, i) = s * v(k++);
    }
  }
  return SymMatrix(m);
}

DuplicationMatrix duplication_matrix(int p) {
  const int q = vecd_length(p);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p * p, q);
  const double s = 1.0 / std::sqrt(2.0);
  // vecd slot for the off-diagonal pair (i > j), columnwise order
  auto off_slot = [p](int i, int j) {
    // entries before column j: sum_{c<j} (p-1-c)
    int base = p;
    for (int c = 0; c < j; ++c) base += p - 1 - c;
    return base + (i - j - 1);
  };
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      const int row = j * p + i;  // columnwise vec
      if (i == j) {
        d(row, i) = 1.0;
      } else {
        const int lo = std::min(i, j), hi = std::max(i, j);
        d(row, off_slot(hi, lo)) = s;
      }
    }
  }
  return DuplicationMatrix{p, d};
}

EigenDecomposition sym_eig(const SymMatrix& y) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(y.mat());
  if (es.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver did not converge");
  }
  const int p = y.dim();
  // Eigen returns ascending order; flip to descending.
  Eigen::VectorXd lambda(p);
  Eigen::MatrixXd v(p, p);
  for (int i = 0; i < p; ++i) {
    lambda(i) = es.eigenvalues()(p - 1 - i);
    v.col(i) = es.eigenvectors().col(p - 1 - i);
  }
  // Sign fix: first nonzero component positive.
  for (int i = 0; i < p; ++i) {
    for (int r = 0; r < p; ++r) {
      if (v(r, i) != 0.0) {
        if (v(r, i) < 0.0) v.col(i) = -v.col(i);
        break;
      }
    }
  }
  // Among equal eigenvalues, order columns lexicographically.
  for (int i = 0; i + 1 < p; ++i) {
    for (int j = i + 1; j < p && lambda(j) == lambda(i); ++j) {
      for (int r = 0; r < p; ++r) {
        if (v(r, j) != v(r, i)) {
          if (v(r, j) > v(r, i)) {
            v.col(i).swap(v.col(j));
          }
          break;
        }
      }
    }
  }
  return EigenDecomposition{v, lambda};
}

namespace {

// Apply f to the eigenvalues of y and reassemble V f(L) V'.
Eigen::MatrixXd spectral_map(const SymMatrix& y, double (*f)(double)) {
  EigenDecomposition ed = sym_eig(y);
  Eigen::VectorXd fl(ed.lambda.size());
  for (int i = 0; i < fl.size(); ++i) fl(i) = f(ed.lambda(i));
  return ed.V * fl.asDiagonal() * ed.V.transpose();
}

}  // namespace

SpdMatrix sym_exp(const SymMatrix& y) {
  EigenDecomposition ed = sym_eig(y);
  if (ed.lambda.maxCoeff() > 700.0) {
    throw NumericError("sym_exp overflow: eigenvalue exceeds exp range");
  }
  Eigen::VectorXd el(ed.lambda.size());
  for (int i = 0; i < el.size(); ++i) el(i) = std::exp(ed.lambda(i));
  return SpdMatrix(ed.V * el.asDiagonal() * ed.V.transpose());
}

SymMatrix spd_log(const SpdMatrix& x) {
  return SymMatrix(spectral_map(x, [](double l) {
    if (l <= 0.0) throw DomainError("spd_log: nonpositive eigenvalue");
    return std::log(l);
  }));
}

SpdMatrix spd_sqrt(const SpdMatrix& x) {
  return SpdMatrix(spectral_map(x, [](double l) {
    if (l <= 0.0) throw DomainError("spd_sqrt: nonpositive eigenvalue");
    return std::sqrt(l);
  }));
}

SpdMatrix spd_inv(const SpdMatrix& x) {
  return SpdMatrix(spectral_map(x, [](double l) {
    if (l <= 0.0) throw DomainError("spd_inv: nonpositive eigenvalue");
    return 1.0 / l;
  }));
}

Eigen::MatrixXd kron_diff(const SymMatrix& y) {
  const int p = y.dim();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p * p, p * p);
  const Eigen::MatrixXd& m = y.mat();
  // Y (x) I
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      for (int i = 0; i < p; ++i) out(a * p + i, b * p + i) += m(a, b);
  // - I (x) Y
  for (int a = 0; a < p; ++a)
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) out(a * p + i, a * p + j) -= m(i, j);
  return out;
}

Eigen::MatrixXd bch_goldberg(const SymMatrix& ys, const SymMatrix& zs) {
  if (ys.dim() != zs.dim()) {
    throw InvalidArgumentError("bch_goldberg: dimension mismatch");
  }
  const Eigen::MatrixXd& Y = ys.mat();
  const Eigen::MatrixXd& Z = zs.mat();
  const Eigen::MatrixXd Y2 = Y * Y, Z2 = Z * Z;
  const Eigen::MatrixXd Y3 = Y2 * Y, Z3 = Z2 * Z;
  const Eigen::MatrixXd Y4 = Y3 * Y, Z4 = Z3 * Z;
  const Eigen::MatrixXd YZ = Y * Z, ZY = Z * Y;

  Eigen::MatrixXd r = Y + Z;
  r += 0.5 * (YZ - ZY);
  r += (1.0 / 12.0) * (Y * Z2 + Y2 * Z + Z * Y2 + Z2 * Y);
  r -= (1.0 / 6.0) * (Y * ZY + Z * YZ);
  r += (1.0 / 24.0) * (Y2 * Z2 - Z2 * Y2);
  r -= (1.0 / 12.0) * (YZ * YZ - ZY * ZY);
  r -= (1.0 / 720.0) * (Y * Z4 + Y4 * Z + Z * Y4 + Z4 * Y);
  r += (1.0 / 180.0) *
       (Y2 * Z3 + Y3 * Z2 + Z2 * Y3 + Z3 * Y2 + YZ * Y3 + Y * Z3 * Y +
        Y3 * ZY + ZY * Z3 + Z * Y3 * Z + Z3 * YZ);
  r -= (1.0 / 120.0) *
       (Y * Z2 * Y2 + Y2 * Z * Y2 + Y2 * Z2 * Y + Z * Y2 * Z2 + Z2 * Y * Z2 +
        Z2 * Y2 * Z);
  r -= (1.0 / 120.0) *
       (YZ * Y * Z2 + YZ * Y2 * Z + Y * Z2 * YZ + Y2 * Z * YZ + ZY * Z * Y2 +
        ZY * Z2 * Y + Z * Y2 * ZY + Z2 * Y * ZY);
  r += (1.0 / 30.0) * (YZ * YZ * Y + ZY * ZY * Z);
  return r;
}

}  // namespace spdstats
