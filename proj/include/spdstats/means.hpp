#pragma once

#include <optional>
#include <vector>

#include "spdstats/geometry.hpp"
#include "spdstats/symcore.hpp"

namespace spdstats {

/// An i.i.d. sample of SPD matrices of common dimension.
class SampleSet {
 public:
  explicit SampleSet(std::vector<SpdMatrix> items);

  int size() const { return static_cast<int>(items_.size()); }
  int dim() const { return items_.front().dim(); }
  const SpdMatrix& operator[](int i) const { return items_[i]; }
  const std::vector<SpdMatrix>& items() const { return items_; }

 private:
  std::vector<SpdMatrix> items_;
};

enum class KarcherInit { Euclidean, LogEuclidean, Explicit };

struct KarcherConfig {
  double tol = 1e-12;
  int max_iter = 100;
  KarcherInit init = KarcherInit::LogEuclidean;
  std::optional<SpdMatrix> init_value;  // used when init == Explicit
};

struct KarcherResult {
  SpdMatrix mean;
  int iterations = 0;
  double final_residual = 0.0;
};

/// Thrown when the fixed-point iteration fails to bring the mean tangent
/// residual below tol within max_iter; carries the last iterate.
class KarcherNonConvergence : public NumericError {
 public:
  KarcherNonConvergence(SpdMatrix last, double residual, int iterations)
      : NumericError("canonical mean did not converge: residual " +
                     std::to_string(residual) + " after " +
                     std::to_string(iterations) + " iterations"),
        last_iterate(std::move(last)),
        residual(residual),
        iterations(iterations) {}
  SpdMatrix last_iterate;
  double residual;
  int iterations;
};

/// Arithmetic mean; SPD by convexity of the cone.
SpdMatrix mean_euclidean(const SampleSet& s);

/// exp of the arithmetic mean of matrix logs.
SpdMatrix mean_log_euclidean(const SampleSet& s);

/// Fixed-point iteration for the intrinsic mean under the affine-invariant
/// metric. The returned mean satisfies
/// |(1/n) sum_i log(X^{-1/2} X_i X^{-1/2})|_F < cfg.tol.
KarcherResult mean_canonical(const SampleSet& s, const KarcherConfig& cfg = {});

/// Two-matrix geometric mean A#B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}.
SpdMatrix geo_mean_pair(const SpdMatrix& a, const SpdMatrix& b);

/// Solves M^{-1/2} Xr M^{-1/2} = B for M (a special case of the continuous
/// algebraic Riccati equation). All kernels stay spectral on symmetric
/// matrices: M = N^2 with N = B^{-1/2} (B^{1/2} Xr B^{1/2})^{1/2} B^{-1/2}.
SpdMatrix riccati_solve(const SpdMatrix& xr, const SpdMatrix& b);

}  // namespace spdstats
