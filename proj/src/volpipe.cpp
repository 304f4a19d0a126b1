#include "spdstats/volpipe.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

namespace spdstats {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng voxel_rng(std::uint64_t master_seed, std::uint64_t voxel_index) {
  return Rng(splitmix64(splitmix64(master_seed) ^
                        splitmix64(voxel_index + 0x51ED270B0A1ULL)));
}

}  // namespace

SpdMatrix TensorVolume::tensor(int voxel, int subject) const {
  const int stride = q();
  const std::size_t off =
      (static_cast<std::size_t>(voxel) * n + subject) * stride;
  Eigen::VectorXd v(stride);
  for (int i = 0; i < stride; ++i) v(i) = data[off + i];
  return SpdMatrix(vecd_inv(v).mat());
}

void TensorVolume::set_tensor(int voxel, int subject, const SpdMatrix& x) {
  const int stride = q();
  const std::size_t off =
      (static_cast<std::size_t>(voxel) * n + subject) * stride;
  const Eigen::VectorXd v = vecd(x).values;
  for (int i = 0; i < stride; ++i) data[off + i] = v(i);
}

SampleSet TensorVolume::sample_at(int voxel) const {
  std::vector<SpdMatrix> items;
  items.reserve(n);
  for (int s = 0; s < n; ++s) items.push_back(tensor(voxel, s));
  return SampleSet(std::move(items));
}

TensorVolume synth_volume(const SynthConfig& config) {
  if (config.nx < 1 || config.ny < 1 || config.nz < 1 || config.p < 1 ||
      config.n < 1) {
    throw InvalidArgumentError("synth_volume: dims, p and n must be >= 1");
  }
  if (config.regions.empty()) {
    throw InvalidArgumentError("synth_volume: at least one region required");
  }
  const std::array<int, 3> dims{config.nx, config.ny, config.nz};
  for (const auto& r : config.regions) {
    for (int a = 0; a < 3; ++a) {
      if (r.lo[a] < 0 || r.hi[a] < r.lo[a] || r.hi[a] >= dims[a]) {
        throw InvalidArgumentError("synth_volume: region box out of bounds");
      }
    }
  }

  // Materialize the per-region models once.
  std::vector<std::optional<LognormalTypeI>> models_1;
  std::vector<std::optional<LognormalTypeII>> models_2;
  for (const auto& r : config.regions) {
    if (r.model == SynthRegion::Model::TypeI) {
      models_1.emplace_back(LognormalTypeI(SpdMatrix(r.mean), r.sigma));
      models_2.emplace_back(std::nullopt);
    } else {
      models_1.emplace_back(std::nullopt);
      models_2.emplace_back(LognormalTypeII(SpdMatrix(r.mean), r.sigma));
    }
  }

  TensorVolume vol;
  vol.nx = config.nx;
  vol.ny = config.ny;
  vol.nz = config.nz;
  vol.p = config.p;
  vol.n = config.n;
  vol.mask.assign(vol.voxel_count(), 0);
  vol.data.assign(static_cast<std::size_t>(vol.voxel_count()) * vol.n * vol.q(),
                  0.0);

  for (int z = 0; z < config.nz; ++z) {
    for (int y = 0; y < config.ny; ++y) {
      for (int x = 0; x < config.nx; ++x) {
        const int idx = vol.linear_index(x, y, z);
        int region = -1;
        for (int r = static_cast<int>(config.regions.size()) - 1; r >= 0; --r) {
          const auto& b = config.regions[r];
          if (x >= b.lo[0] && x <= b.hi[0] && y >= b.lo[1] && y <= b.hi[1] &&
              z >= b.lo[2] && z <= b.hi[2]) {
            region = r;
            break;
          }
        }
        if (region < 0) continue;
        vol.mask[idx] = 1;
        Rng rng = voxel_rng(config.seed, static_cast<std::uint64_t>(idx));
        for (int s = 0; s < config.n; ++s) {
          const SpdMatrix xi = models_1[region]
                                   ? lnI_sample(*models_1[region], rng)
                                   : lnII_sample(*models_2[region], rng);
          vol.set_tensor(idx, s, xi);
        }
      }
    }
  }
  return vol;
}

double fa(const SpdMatrix& x) {
  if (x.dim() != 3) throw InvalidArgumentError("fa: requires p == 3");
  const Eigen::VectorXd l = sym_eig(x).lambda;
  const double mean = l.mean();
  const double num = (l.array() - mean).matrix().norm();
  const double den = l.norm();
  return std::sqrt(1.5) * num / den;
}

Eigen::Vector3d pdd(const SpdMatrix& x) {
  if (x.dim() != 3) throw InvalidArgumentError("pdd: requires p == 3");
  return sym_eig(x).V.col(0);
}

double pdd_angle(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  const double c = std::min(1.0, std::abs(u.dot(v)));
  return std::acos(c) * 180.0 / M_PI;
}

EllipsoidSpec ellipsoid_axes(const SpdMatrix& x) {
  const EigenDecomposition ed = sym_eig(x);
  return EllipsoidSpec{ed.lambda.cwiseSqrt(), ed.V};
}

MetricKind pair_average(PairKind pair) {
  switch (pair) {
    case PairKind::LogEuclideanInEuclideanCr: return MetricKind::LogEuclidean;
    case PairKind::EuclideanInLogEuclideanCr: return MetricKind::Euclidean;
    case PairKind::CanonicalInLogEuclideanCr: return MetricKind::Canonical;
    case PairKind::LogEuclideanInCanonicalCr: return MetricKind::LogEuclidean;
  }
  throw InvalidArgumentError("unknown pair");
}

MetricKind pair_region(PairKind pair) {
  switch (pair) {
    case PairKind::LogEuclideanInEuclideanCr: return MetricKind::Euclidean;
    case PairKind::EuclideanInLogEuclideanCr: return MetricKind::LogEuclidean;
    case PairKind::CanonicalInLogEuclideanCr: return MetricKind::LogEuclidean;
    case PairKind::LogEuclideanInCanonicalCr: return MetricKind::Canonical;
  }
  throw InvalidArgumentError("unknown pair");
}

const char* pair_name(PairKind pair) {
  switch (pair) {
    case PairKind::LogEuclideanInEuclideanCr: return "log-euclidean:euclidean";
    case PairKind::EuclideanInLogEuclideanCr: return "euclidean:log-euclidean";
    case PairKind::CanonicalInLogEuclideanCr: return "canonical:log-euclidean";
    case PairKind::LogEuclideanInCanonicalCr: return "log-euclidean:canonical";
  }
  throw InvalidArgumentError("unknown pair");
}

AnalysisResult voxelwise_analysis(const TensorVolume& vol,
                                  const AnalysisOptions& opts) {
  if (vol.p != 3) {
    throw InvalidArgumentError("voxelwise_analysis: requires p == 3 volumes");
  }
  // Union of explicitly requested averages and those implied by the pairs.
  bool need[3] = {false, false, false};
  for (MetricKind k : opts.averages) need[static_cast<int>(k)] = true;
  for (PairKind pr : opts.pairs) {
    need[static_cast<int>(pair_average(pr))] = true;
    need[static_cast<int>(pair_region(pr))] = true;
  }

  AnalysisResult out;
  for (PairKind pr : opts.pairs) out.tallies.push_back(PairTally{pr, 0, {}});
  std::vector<std::vector<double>> pair_pvals(opts.pairs.size());

  for (int idx = 0; idx < vol.voxel_count(); ++idx) {
    if (!vol.mask[idx]) continue;
    const SampleSet sample = vol.sample_at(idx);
    VoxelReport rep;
    rep.index = idx;
    rep.x = idx % vol.nx;
    rep.y = (idx / vol.nx) % vol.ny;
    rep.z = idx / (vol.nx * vol.ny);
    try {
      for (int k = 0; k < 3; ++k) {
        if (!need[k]) continue;
        const MetricKind kind = static_cast<MetricKind>(k);
        SpdMatrix m = [&] {
          switch (kind) {
            case MetricKind::Euclidean: return mean_euclidean(sample);
            case MetricKind::LogEuclidean: return mean_log_euclidean(sample);
            case MetricKind::Canonical:
              return mean_canonical(sample, opts.karcher).mean;
          }
          throw InvalidArgumentError("bad kind");
        }();
        AverageSummary s{m, fa(m), pdd(m)};
        rep.averages[k] = std::move(s);
      }
      for (std::size_t pi = 0; pi < opts.pairs.size(); ++pi) {
        const PairKind pr = opts.pairs[pi];
        const AverageSummary& avg =
            *rep.averages[static_cast<int>(pair_average(pr))];
        const AverageSummary& ctr =
            *rep.averages[static_cast<int>(pair_region(pr))];
        const ConfidenceRegion cr =
            build_cr(pair_region(pr), sample, opts.alpha, opts.karcher);
        PairSummary ps;
        ps.pair = pr;
        ps.fa_diff = avg.fa - ctr.fa;
        ps.angle_deg = pdd_angle(avg.pdd, ctr.pdd);
        ps.pvalue = cr_pvalue(cr, avg.mean);
        pair_pvals[pi].push_back(ps.pvalue);
        if (ps.pvalue < 0.05) ++out.tallies[pi].below_005;
        rep.pairs.push_back(std::move(ps));
      }
    } catch (const KarcherNonConvergence&) {
      ++out.failed_voxels;
      continue;
    }
    ++out.analyzed_voxels;
    out.reports.push_back(std::move(rep));
  }

  for (std::size_t pi = 0; pi < opts.pairs.size(); ++pi) {
    out.tallies[pi].fdr = bh_fdr(pair_pvals[pi], opts.fdr_q);
  }
  return out;
}

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, std::size_t& offset) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("truncated header", offset);
  offset += 4;
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

constexpr char kMagic[8] = {'S', 'P', 'D', 'V', 'O', 'L', '0', '1'};

}  // namespace

void save_volume(const TensorVolume& vol, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open file for writing: " + path, 0);
  out.write(kMagic, 8);
  write_u32(out, static_cast<std::uint32_t>(vol.nx));
  write_u32(out, static_cast<std::uint32_t>(vol.ny));
  write_u32(out, static_cast<std::uint32_t>(vol.nz));
  write_u32(out, static_cast<std::uint32_t>(vol.p));
  write_u32(out, static_cast<std::uint32_t>(vol.n));
  out.write(reinterpret_cast<const char*>(vol.mask.data()),
            static_cast<std::streamsize>(vol.mask.size()));
  out.write(reinterpret_cast<const char*>(vol.data.data()),
            static_cast<std::streamsize>(vol.data.size() * sizeof(double)));
  if (!out) throw FormatError("write failed: " + path, 0);
}

TensorVolume load_volume(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path, 0);
  std::size_t offset = 0;
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError("bad magic (expected SPDVOL01)", 0);
  }
  offset = 8;
  TensorVolume vol;
  vol.nx = static_cast<int>(read_u32(in, offset));
  vol.ny = static_cast<int>(read_u32(in, offset));
  vol.nz = static_cast<int>(read_u32(in, offset));
  vol.p = static_cast<int>(read_u32(in, offset));
  vol.n = static_cast<int>(read_u32(in, offset));
  if (vol.nx < 1 || vol.ny < 1 || vol.nz < 1 || vol.p < 1 || vol.n < 1) {
    throw FormatError("invalid shape fields", 8);
  }
  const std::size_t voxels = static_cast<std::size_t>(vol.voxel_count());
  vol.mask.resize(voxels);
  in.read(reinterpret_cast<char*>(vol.mask.data()),
          static_cast<std::streamsize>(voxels));
  if (!in) throw FormatError("truncated mask", offset);
  offset += voxels;
  const std::size_t count = voxels * vol.n * vol.q();
  vol.data.resize(count);
  in.read(reinterpret_cast<char*>(vol.data.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in || static_cast<std::size_t>(in.gcount()) != count * sizeof(double)) {
    throw FormatError("truncated payload",
                      offset + static_cast<std::size_t>(std::max<std::streamsize>(
                          in.gcount(), 0)));
  }
  return vol;
}

void write_report(const AnalysisResult& result, std::ostream& out) {
  out << "voxel\tx\ty\tz";
  bool have[3] = {false, false, false};
  std::vector<PairKind> pairs;
  if (!result.reports.empty()) {
    const VoxelReport& first = result.reports.front();
    for (int k = 0; k < 3; ++k) have[k] = first.averages[k].has_value();
    for (const auto& ps : first.pairs) pairs.push_back(ps.pair);
  }
  for (int k = 0; k < 3; ++k) {
    if (!have[k]) continue;
    const char* name = metric_name(static_cast<MetricKind>(k));
    out << '\t' << name << "_fa" << '\t' << name << "_pdd_x" << '\t' << name
        << "_pdd_y" << '\t' << name << "_pdd_z";
  }
  for (PairKind pr : pairs) {
    out << '\t' << pair_name(pr) << "_p" << '\t' << pair_name(pr) << "_fa_diff"
        << '\t' << pair_name(pr) << "_angle_deg";
  }
  out << '\n';
  for (const auto& rep : result.reports) {
    out << rep.index << '\t' << rep.x << '\t' << rep.y << '\t' << rep.z;
    for (int k = 0; k < 3; ++k) {
      if (!have[k]) continue;
      const auto& s = *rep.averages[k];
      out << '\t' << s.fa << '\t' << s.pdd(0) << '\t' << s.pdd(1) << '\t'
          << s.pdd(2);
    }
    for (const auto& ps : rep.pairs) {
      out << '\t' << ps.pvalue << '\t' << ps.fa_diff << '\t' << ps.angle_deg;
    }
    out << '\n';
  }
}

}  // namespace spdstats
