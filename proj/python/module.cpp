#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spdstats/volpipe.hpp"

namespace py = pybind11;
using namespace spdstats;

namespace {

MetricKind kind_from_name(const std::string& name) {
  for (MetricKind k : {MetricKind::Euclidean, MetricKind::LogEuclidean,
                       MetricKind::Canonical}) {
    if (name == metric_name(k)) return k;
  }
  throw InvalidArgumentError(
      "kind must be euclidean, log-euclidean or canonical");
}

SampleSet to_sample_set(const std::vector<Eigen::MatrixXd>& mats) {
  std::vector<SpdMatrix> items;
  items.reserve(mats.size());
  for (const auto& m : mats) items.emplace_back(m);
  return SampleSet(std::move(items));
}

KarcherConfig karcher_config(double tol, int max_iter) {
  KarcherConfig kc;
  kc.tol = tol;
  kc.max_iter = max_iter;
  return kc;
}

}  // namespace

PYBIND11_MODULE(_spdstats, m) {
  m.doc() = "statistics on symmetric positive definite matrices";

  py::register_exception<InvalidArgumentError>(m, "InvalidArgumentError",
                                               PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  m.def("vecd", [](const Eigen::MatrixXd& y) {
    return vecd(SymMatrix(y)).values;
  });
  m.def("vecd_inv", [](const Eigen::VectorXd& v) {
    return vecd_inv(v).mat();
  });
  m.def("duplication_matrix",
        [](int p) { return duplication_matrix(p).D; });
  m.def("sym_exp",
        [](const Eigen::MatrixXd& y) { return sym_exp(SymMatrix(y)).mat(); });
  m.def("spd_log",
        [](const Eigen::MatrixXd& x) { return spd_log(SpdMatrix(x)).mat(); });
  m.def("spd_sqrt",
        [](const Eigen::MatrixXd& x) { return spd_sqrt(SpdMatrix(x)).mat(); });
  m.def("spd_inv",
        [](const Eigen::MatrixXd& x) { return spd_inv(SpdMatrix(x)).mat(); });

  m.def("dist", [](const std::string& kind, const Eigen::MatrixXd& a,
                   const Eigen::MatrixXd& b) {
    return dist(kind_from_name(kind), SpdMatrix(a), SpdMatrix(b));
  });

  m.def(
      "mean",
      [](const std::string& kind, const std::vector<Eigen::MatrixXd>& mats,
         double tol, int max_iter) {
        const SampleSet s = to_sample_set(mats);
        switch (kind_from_name(kind)) {
          case MetricKind::Euclidean: return mean_euclidean(s).mat();
          case MetricKind::LogEuclidean: return mean_log_euclidean(s).mat();
          case MetricKind::Canonical:
            return mean_canonical(s, karcher_config(tol, max_iter)).mean.mat();
        }
        throw InvalidArgumentError("unknown kind");
      },
      py::arg("kind"), py::arg("samples"), py::arg("tol") = 1e-12,
      py::arg("max_iter") = 100);

  m.def("geo_mean_pair",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
          return geo_mean_pair(SpdMatrix(a), SpdMatrix(b)).mat();
        });
  m.def("riccati_solve",
        [](const Eigen::MatrixXd& xr, const Eigen::MatrixXd& b) {
          return riccati_solve(SpdMatrix(xr), SpdMatrix(b)).mat();
        });

  m.def("jacobian_logmap", [](const Eigen::MatrixXd& x) {
    return jacobian_logmap(SpdMatrix(x));
  });
  m.def("lognormal_density",
        [](const std::string& type, const Eigen::MatrixXd& x,
           const Eigen::MatrixXd& mean, const Eigen::MatrixXd& sigma) {
          if (type == "typeI")
            return lnI_density(SpdMatrix(x), LognormalTypeI(SpdMatrix(mean), sigma));
          if (type == "typeII")
            return lnII_density(SpdMatrix(x),
                                LognormalTypeII(SpdMatrix(mean), sigma));
          throw InvalidArgumentError("type must be typeI or typeII");
        },
        py::arg("type"), py::arg("x"), py::arg("mean"), py::arg("sigma"));
  m.def(
      "lognormal_sample",
      [](const std::string& type, const Eigen::MatrixXd& mean,
         const Eigen::MatrixXd& sigma, int count, std::uint64_t seed) {
        Rng rng(seed);
        std::vector<Eigen::MatrixXd> out;
        out.reserve(count);
        if (type == "typeI") {
          const LognormalTypeI model(SpdMatrix(mean), sigma);
          for (int i = 0; i < count; ++i)
            out.push_back(lnI_sample(model, rng).mat());
        } else if (type == "typeII") {
          const LognormalTypeII model(SpdMatrix(mean), sigma);
          for (int i = 0; i < count; ++i)
            out.push_back(lnII_sample(model, rng).mat());
        } else {
          throw InvalidArgumentError("type must be typeI or typeII");
        }
        return out;
      },
      py::arg("type"), py::arg("mean"), py::arg("sigma"), py::arg("count"),
      py::arg("seed"));
  m.def("lognormal_mle", [](const std::vector<Eigen::MatrixXd>& mats) {
    const LognormalMle fit = lnI_mle(to_sample_set(mats));
    return py::make_tuple(fit.model.m().mat(), fit.model.log_model().sigma(),
                          fit.sigma_singular);
  });

  m.def("chi2_cdf", &chi2_cdf);
  m.def("chi2_quantile", &chi2_quantile);

  m.def(
      "cr_pvalue",
      [](const std::string& kind, const std::vector<Eigen::MatrixXd>& mats,
         const Eigen::MatrixXd& candidate, double alpha) {
        const ConfidenceRegion cr =
            build_cr(kind_from_name(kind), to_sample_set(mats), alpha);
        return cr_pvalue(cr, SpdMatrix(candidate));
      },
      py::arg("kind"), py::arg("samples"), py::arg("candidate"),
      py::arg("alpha") = 0.05);
  m.def(
      "cr_extreme_points",
      [](const std::string& kind, const std::vector<Eigen::MatrixXd>& mats,
         double alpha) {
        const ConfidenceRegion cr =
            build_cr(kind_from_name(kind), to_sample_set(mats), alpha);
        const auto [lo, hi] = cr_extreme_points(cr);
        return py::make_tuple(cr.center.mat(), lo.mat(), hi.mat());
      },
      py::arg("kind"), py::arg("samples"), py::arg("alpha") = 0.05);

  m.def("bh_fdr", [](const std::vector<double>& pvalues, double q) {
    const FdrResult r = bh_fdr(pvalues, q);
    return py::make_tuple(r.rejected, r.threshold);
  });

  m.def("fa", [](const Eigen::MatrixXd& x) { return fa(SpdMatrix(x)); });
  m.def("pdd", [](const Eigen::MatrixXd& x) {
    return Eigen::VectorXd(pdd(SpdMatrix(x)));
  });
  m.def("pdd_angle", [](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return pdd_angle(Eigen::Vector3d(u), Eigen::Vector3d(v));
  });
  m.def("ellipsoid_axes", [](const Eigen::MatrixXd& x) {
    const EllipsoidSpec es = ellipsoid_axes(SpdMatrix(x));
    return py::make_tuple(es.lengths, es.directions);
  });
}
