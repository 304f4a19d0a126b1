// Command-line frontend for the tensor-volume pipeline.
//
// Exit codes: 0 success, 2 configuration error, 3 file-format error,
// 4 numeric failure.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spdstats/volpipe.hpp"

using namespace spdstats;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kFormatError = 3;
constexpr int kNumericError = 4;

Eigen::MatrixXd parse_matrix(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw InvalidArgumentError(std::string(what) + ": expected a nested array");
  }
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw InvalidArgumentError(std::string(what) + ": ragged rows");
    }
    for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

SynthRegion parse_region(const std::string& text, int p,
                         const std::string& default_model) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw InvalidArgumentError(std::string("--region: ") + ex.what());
  }
  SynthRegion r;
  const auto triple = [&](const char* key, std::array<int, 3>* out) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
      throw InvalidArgumentError(std::string("--region: missing 3-vector '") +
                                 key + "'");
    }
    for (int i = 0; i < 3; ++i) (*out)[i] = j[key][i].get<int>();
  };
  triple("lo", &r.lo);
  triple("hi", &r.hi);
  const std::string model = j.value("model", default_model);
  if (model == "typeI") {
    r.model = SynthRegion::Model::TypeI;
  } else if (model == "typeII") {
    r.model = SynthRegion::Model::TypeII;
  } else {
    throw InvalidArgumentError("--region: model must be typeI or typeII");
  }
  if (!j.contains("mean")) {
    throw InvalidArgumentError("--region: missing 'mean'");
  }
  r.mean = parse_matrix(j["mean"], "--region mean");
  const int q = p * (p + 1) / 2;
  if (j.contains("sigma")) {
    r.sigma = parse_matrix(j["sigma"], "--region sigma");
  } else {
    r.sigma = 0.05 * Eigen::MatrixXd::Identity(q, q);
  }
  return r;
}

MetricKind parse_method(const std::string& name) {
  for (MetricKind k : {MetricKind::Euclidean, MetricKind::LogEuclidean,
                       MetricKind::Canonical}) {
    if (name == metric_name(k)) return k;
  }
  throw InvalidArgumentError(
      "method must be euclidean, log-euclidean or canonical");
}

PairKind parse_pair(const std::string& name) {
  for (PairKind pr : {PairKind::LogEuclideanInEuclideanCr,
                      PairKind::EuclideanInLogEuclideanCr,
                      PairKind::CanonicalInLogEuclideanCr,
                      PairKind::LogEuclideanInCanonicalCr}) {
    if (name == pair_name(pr)) return pr;
  }
  throw InvalidArgumentError(
      "--pair must be one of log-euclidean:euclidean, "
      "euclidean:log-euclidean, canonical:log-euclidean, "
      "log-euclidean:canonical");
}

void print_matrix(const char* label, const Eigen::MatrixXd& m) {
  std::printf("%s", label);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      std::printf("\t%.17g", m(i, j));
  std::printf("\n");
}

int run_synth(const std::vector<int>& dims, int p, int n, std::uint64_t seed,
              const std::string& model, const std::vector<std::string>& regions,
              const std::string& out) {
  SynthConfig cfg;
  cfg.nx = dims[0];
  cfg.ny = dims[1];
  cfg.nz = dims[2];
  cfg.p = p;
  cfg.n = n;
  cfg.seed = seed;
  for (const std::string& text : regions)
    cfg.regions.push_back(parse_region(text, p, model));
  const TensorVolume vol = synth_volume(cfg);
  save_volume(vol, out);
  int unmasked = 0;
  for (auto b : vol.mask) unmasked += b;
  std::printf("wrote %s: %dx%dx%d, p=%d, n=%d, %d unmasked voxels\n",
              out.c_str(), vol.nx, vol.ny, vol.nz, vol.p, vol.n, unmasked);
  return kOk;
}

int run_average(const std::string& method, double tol, int max_iter,
                const std::string& in, const std::string& out) {
  const MetricKind kind = parse_method(method);
  const TensorVolume vol = load_volume(in);
  KarcherConfig kc;
  kc.tol = tol;
  kc.max_iter = max_iter;

  TensorVolume mean_vol;
  mean_vol.nx = vol.nx;
  mean_vol.ny = vol.ny;
  mean_vol.nz = vol.nz;
  mean_vol.p = vol.p;
  mean_vol.n = 1;
  mean_vol.mask = vol.mask;
  mean_vol.data.assign(static_cast<size_t>(vol.voxel_count()) * vol.q(), 0.0);
  int failed = 0;
  for (int v = 0; v < vol.voxel_count(); ++v) {
    if (!vol.mask[v]) continue;
    const SampleSet s = vol.sample_at(v);
    try {
      SpdMatrix m = SpdMatrix::Identity(vol.p);
      switch (kind) {
        case MetricKind::Euclidean: m = mean_euclidean(s); break;
        case MetricKind::LogEuclidean: m = mean_log_euclidean(s); break;
        case MetricKind::Canonical: m = mean_canonical(s, kc).mean; break;
      }
      mean_vol.set_tensor(v, 0, m);
    } catch (const KarcherNonConvergence&) {
      mean_vol.mask[v] = 0;
      ++failed;
    }
  }
  save_volume(mean_vol, out);
  std::printf("wrote %s: %s averages, %d non-converged voxels masked out\n",
              out.c_str(), metric_name(kind), failed);
  return kOk;
}

int run_compare(const std::vector<std::string>& pairs, double alpha,
                double fdr_q, const std::string& in,
                const std::string& report_path) {
  const TensorVolume vol = load_volume(in);
  AnalysisOptions opts;
  opts.alpha = alpha;
  opts.fdr_q = fdr_q;
  for (const std::string& name : pairs) opts.pairs.push_back(parse_pair(name));
  const AnalysisResult res = voxelwise_analysis(vol, opts);

  std::ofstream out(report_path);
  if (!out) {
    throw InvalidArgumentError("cannot open report file " + report_path);
  }
  write_report(res, out);

  std::printf("analyzed %d voxels (%d failed)\n", res.analyzed_voxels,
              res.failed_voxels);
  for (const auto& tally : res.tallies) {
    std::printf("%s\tp<0.05: %d\tBH rejections at q=%g: %zu\n",
                pair_name(tally.pair), tally.below_005, fdr_q,
                tally.fdr.rejected.size());
  }
  std::printf("report written to %s\n", report_path.c_str());
  return kOk;
}

int run_cr(const std::string& method, double alpha,
           const std::vector<int>& voxel, const std::string& in) {
  const MetricKind kind = parse_method(method);
  const TensorVolume vol = load_volume(in);
  const int x = voxel[0], y = voxel[1], z = voxel[2];
  if (x < 0 || x >= vol.nx || y < 0 || y >= vol.ny || z < 0 || z >= vol.nz) {
    throw InvalidArgumentError("--voxel out of range");
  }
  const int idx = vol.linear_index(x, y, z);
  if (!vol.mask[idx]) {
    throw InvalidArgumentError("--voxel is masked out");
  }
  const ConfidenceRegion cr = build_cr(kind, vol.sample_at(idx), alpha);
  const auto [lo, hi] = cr_extreme_points(cr);

  std::printf("method\t%s\nalpha\t%g\nn\t%d\n", metric_name(kind), alpha,
              cr.n);
  print_matrix("center", cr.center.mat());
  print_matrix("extreme_lo", lo.mat());
  print_matrix("extreme_hi", hi.mat());
  for (const auto& [label, m] :
       {std::pair<const char*, const SpdMatrix&>{"center", cr.center},
        {"extreme_lo", lo},
        {"extreme_hi", hi}}) {
    const EllipsoidSpec es = ellipsoid_axes(m);
    for (int i = 0; i < es.lengths.size(); ++i) {
      std::printf("ellipsoid\t%s\t%.17g", label, es.lengths(i));
      for (int j = 0; j < es.directions.rows(); ++j)
        std::printf("\t%.17g", es.directions(j, i));
      std::printf("\n");
    }
  }
  return kOk;
}

int run_bench(const std::string& in) {
  const TensorVolume vol = load_volume(in);
  using clock = std::chrono::steady_clock;
  for (MetricKind k : {MetricKind::Euclidean, MetricKind::LogEuclidean,
                       MetricKind::Canonical}) {
    const auto t0 = clock::now();
    int voxels = 0;
    for (int v = 0; v < vol.voxel_count(); ++v) {
      if (!vol.mask[v]) continue;
      const SampleSet s = vol.sample_at(v);
      switch (k) {
        case MetricKind::Euclidean: (void)mean_euclidean(s); break;
        case MetricKind::LogEuclidean: (void)mean_log_euclidean(s); break;
        case MetricKind::Canonical: (void)mean_canonical(s); break;
      }
      ++voxels;
    }
    const double dt = std::chrono::duration<double>(clock::now() - t0).count();
    std::printf("%s\t%d voxels\t%.3f s\n", metric_name(k), voxels, dt);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statistics on volumes of symmetric positive definite matrices"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic volume");
  std::vector<int> dims;
  int p = 3, n = 34;
  std::uint64_t seed = 0;
  std::string model = "typeI", out_path, in_path, report_path;
  std::vector<std::string> regions;
  synth->add_option("--dims", dims, "grid size nx,ny,nz")
      ->delimiter(',')
      ->expected(3)
      ->required();
  synth->add_option("--p", p, "matrix dimension");
  synth->add_option("--n", n, "subjects per voxel");
  synth->add_option("--seed", seed, "master seed");
  synth->add_option("--model", model, "default model: typeI|typeII");
  synth
      ->add_option("--region", regions,
                   "region JSON: {\"lo\":[..],\"hi\":[..],\"mean\":[[..]],"
                   "\"sigma\":[[..]],\"model\":\"typeI\"}; repeatable")
      ->required();
  synth->add_option("--out", out_path, "output volume path")->required();

  // average
  auto* average = app.add_subcommand("average", "voxelwise averages");
  std::string method = "log-euclidean";
  double tol = 1e-12;
  int max_iter = 100;
  average->add_option("--method", method,
                      "euclidean|log-euclidean|canonical");
  average->add_option("--tol", tol, "fixed-point tolerance (canonical)");
  average->add_option("--max-iter", max_iter, "iteration cap (canonical)");
  average->add_option("--in", in_path, "input volume")->required();
  average->add_option("--out", out_path, "output volume (n=1)")->required();

  // compare
  auto* compare = app.add_subcommand("compare", "cross-average p-value maps");
  std::vector<std::string> pairs;
  double alpha = 0.05, fdr_q = 0.2;
  compare
      ->add_option("--pair", pairs,
                   "<average>:<region kind>, e.g. log-euclidean:euclidean; "
                   "repeatable")
      ->required();
  compare->add_option("--alpha", alpha, "region level");
  compare->add_option("--fdr-q", fdr_q, "Benjamini-Hochberg q");
  compare->add_option("--in", in_path, "input volume")->required();
  compare->add_option("--report", report_path, "report TSV path")->required();

  // cr
  auto* cr = app.add_subcommand("cr", "confidence region at one voxel");
  std::vector<int> voxel;
  cr->add_option("--method", method, "euclidean|log-euclidean|canonical");
  cr->add_option("--alpha", alpha, "region level");
  cr->add_option("--voxel", voxel, "voxel x,y,z")
      ->delimiter(',')
      ->expected(3)
      ->required();
  cr->add_option("--in", in_path, "input volume")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "time the three averages");
  bench->add_option("--in", in_path, "input volume")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (synth->parsed())
      return run_synth(dims, p, n, seed, model, regions, out_path);
    if (average->parsed())
      return run_average(method, tol, max_iter, in_path, out_path);
    if (compare->parsed())
      return run_compare(pairs, alpha, fdr_q, in_path, report_path);
    if (cr->parsed()) return run_cr(method, alpha, voxel, in_path);
    if (bench->parsed()) return run_bench(in_path);
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kFormatError;
  } catch (const InvalidArgumentError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumericError;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kNumericError;
  }
  return kConfigError;
}
