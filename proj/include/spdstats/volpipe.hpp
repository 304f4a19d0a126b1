#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spdstats/inference.hpp"

namespace spdstats {

/// A 3-D voxel grid; each unmasked voxel holds n per-subject SPD matrices
/// stored as vecd vectors (voxel-major, subject-minor).
struct TensorVolume {
  int nx = 0, ny = 0, nz = 0;
  int p = 0;  // matrix dimension
  int n = 0;  // subjects per voxel
  std::vector<std::uint8_t> mask;  // 0/1 per voxel
  std::vector<double> data;        // nx*ny*nz * n * q doubles

  int q() const { return p * (p + 1) / 2; }
  int voxel_count() const { return nx * ny * nz; }
  int linear_index(int x, int y, int z) const { return (z * ny + y) * nx + x; }

  SpdMatrix tensor(int voxel, int subject) const;
  void set_tensor(int voxel, int subject, const SpdMatrix& x);
  SampleSet sample_at(int voxel) const;
};

/// An axis-aligned box of voxels drawing from one lognormal model.
struct SynthRegion {
  std::array<int, 3> lo{};  // inclusive
  std::array<int, 3> hi{};  // inclusive
  enum class Model { TypeI, TypeII } model = Model::TypeI;
  Eigen::MatrixXd mean;   // p x p SPD
  Eigen::MatrixXd sigma;  // q x q PSD
};

struct SynthConfig {
  int nx = 0, ny = 0, nz = 0;
  int p = 3;
  int n = 34;
  std::uint64_t seed = 0;
  std::vector<SynthRegion> regions;  // later regions win on overlap
};

/// Deterministic synthetic volume: each voxel's RNG state is derived from
/// (seed, voxel linear index), so output is bitwise reproducible regardless
/// of evaluation order. Voxels covered by no region are masked out.
TensorVolume synth_volume(const SynthConfig& config);

/// Fractional anisotropy of a 3x3 tensor: sqrt(3/2) |lambda - mean| / |lambda|.
double fa(const SpdMatrix& x);

/// Principal diffusion direction: unit eigenvector of the largest eigenvalue,
/// sign-normalized (first nonzero component positive).
Eigen::Vector3d pdd(const SpdMatrix& x);

/// Axial angle between two unit directions, arccos(|u.v|) in degrees [0, 90].
double pdd_angle(const Eigen::Vector3d& u, const Eigen::Vector3d& v);

/// Semiaxis lengths (sqrt eigenvalues) and orthonormal directions of the
/// ellipsoid representation of an SPD matrix.
struct EllipsoidSpec {
  Eigen::VectorXd lengths;
  Eigen::MatrixXd directions;  // columns
};

EllipsoidSpec ellipsoid_axes(const SpdMatrix& x);

/// Cross-average comparisons: <evaluated average> against <CR of this kind>.
enum class PairKind {
  LogEuclideanInEuclideanCr,
  EuclideanInLogEuclideanCr,
  CanonicalInLogEuclideanCr,
  LogEuclideanInCanonicalCr,
};

MetricKind pair_average(PairKind pair);
MetricKind pair_region(PairKind pair);
const char* pair_name(PairKind pair);

struct AnalysisOptions {
  std::vector<MetricKind> averages;  // always computed for requested pairs too
  std::vector<PairKind> pairs;
  double alpha = 0.05;
  double fdr_q = 0.2;
  KarcherConfig karcher;
};

struct AverageSummary {
  SpdMatrix mean;
  double fa = 0.0;
  Eigen::Vector3d pdd = Eigen::Vector3d::Zero();
};

struct PairSummary {
  PairKind pair{};
  double fa_diff = 0.0;
  double angle_deg = 0.0;
  double pvalue = 1.0;
};

struct VoxelReport {
  int index = 0;
  int x = 0, y = 0, z = 0;
  std::array<std::optional<AverageSummary>, 3> averages;  // by MetricKind
  std::vector<PairSummary> pairs;
};

struct PairTally {
  PairKind pair{};
  int below_005 = 0;  // voxels with p < 0.05
  FdrResult fdr;      // BH over this pair's p-value map
};

struct AnalysisResult {
  std::vector<VoxelReport> reports;  // ordered by voxel index
  std::vector<PairTally> tallies;
  int analyzed_voxels = 0;
  int failed_voxels = 0;  // Karcher non-convergence, excluded from summaries
};

AnalysisResult voxelwise_analysis(const TensorVolume& vol,
                                  const AnalysisOptions& opts);

// "SPDV1" container: magic "SPDVOL01", little-endian u32 nx, ny, nz, p, n,
// one mask byte per voxel, then float64 payload voxel-major subject-minor in
// vecd layout.
void save_volume(const TensorVolume& vol, const std::string& path);
TensorVolume load_volume(const std::string& path);

void write_report(const AnalysisResult& result, std::ostream& out);

}  // namespace spdstats
