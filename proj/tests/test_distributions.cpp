#include "spdstats/distributions.hpp"

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"

using namespace spdstats;

namespace {

Eigen::MatrixXd diagm(std::initializer_list<double> d) {
  Eigen::VectorXd v(static_cast<int>(d.size()));
  int i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

}  // namespace

TEST_CASE("standard_normal moments and engine consumption") {
  Rng rng(1);
  const int n = 200000;
  double s = 0, s2 = 0, s3 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = standard_normal(rng);
    s += x;
    s2 += x * x;
    s3 += x * x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(s3 / n) < 0.05);

  Rng a(7), b(7);
  (void)standard_normal(a);
  b.discard(2);  // each draw consumes exactly two engine outputs
  CHECK(a() == b());
}

TEST_CASE("symnormal sample moments") {
  const SymMatrix mean(oracles::random_sym(2, 0.5));
  Eigen::MatrixXd sigma(3, 3);
  sigma << 0.5, 0.1, 0.0, 0.1, 0.3, 0.05, 0.0, 0.05, 0.2;
  const SymNormalModel model(mean, sigma);
  Rng rng(2);
  const int n = 100000;
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  const Eigen::Vector3d mu = vecd(mean).values;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d v = vecd(symnormal_sample(model, rng)).values;
    acc += v;
    cov += (v - mu) * (v - mu).transpose();
  }
  CHECK((acc / n - mu).lpNorm<Eigen::Infinity>() < 0.01);
  CHECK((cov / n - sigma).lpNorm<Eigen::Infinity>() < 0.02);
}

TEST_CASE("symnormal accepts semidefinite sigma, rejects indefinite") {
  const SymMatrix mean(Eigen::MatrixXd::Zero(2, 2));
  CHECK_NOTHROW(SymNormalModel(mean, diagm({0.5, 0.5, 0.0})));
  CHECK_THROWS_AS(SymNormalModel(mean, diagm({0.5, 0.5, -0.1})), DomainError);
  CHECK_THROWS_AS(SymNormalModel(mean, diagm({1.0, 1.0})),
                  InvalidArgumentError);
}

TEST_CASE("Type I samples: log X is normal around log M") {
  const SpdMatrix m(oracles::random_spd(2));
  const Eigen::MatrixXd sigma = diagm({0.25, 0.5, 0.1});
  const LognormalTypeI model(m, sigma);
  Rng rng(3);
  const int n = 100000;
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  const Eigen::Vector3d mu = vecd(spd_log(m)).values;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d v =
        vecd(spd_log(lnI_sample(model, rng))).values;
    acc += v;
    cov += (v - mu) * (v - mu).transpose();
  }
  CHECK((acc / n - mu).lpNorm<Eigen::Infinity>() < 0.01);
  CHECK((cov / n - sigma).lpNorm<Eigen::Infinity>() < 0.02);
}

TEST_CASE("Type II samples: whitened log is centered normal") {
  const SpdMatrix m(oracles::random_spd(2));
  const Eigen::MatrixXd sigma = diagm({0.3, 0.2, 0.15});
  const LognormalTypeII model(m, sigma);
  Rng rng(4);
  const int n = 100000;
  const Eigen::MatrixXd mih = spd_inv(model.m_sqrt()).mat();
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int i = 0; i < n; ++i) {
    const SpdMatrix x = lnII_sample(model, rng);
    const Eigen::Vector3d v =
        vecd(spd_log(SpdMatrix(mih * x.mat() * mih))).values;
    acc += v;
    cov += v * v.transpose();
  }
  CHECK((acc / n).lpNorm<Eigen::Infinity>() < 0.01);
  CHECK((cov / n - sigma).lpNorm<Eigen::Infinity>() < 0.02);
}

TEST_CASE("degenerate dispersion directions stay degenerate") {
  // sigma = Diag(0.5, 0.5, 0): with a diagonal mean every sample is diagonal.
  const SpdMatrix m(diagm({2.0, 0.5}));
  const Eigen::MatrixXd sigma = diagm({0.5, 0.5, 0.0});
  const LognormalTypeI mi(m, sigma);
  const LognormalTypeII mii(m, sigma);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    CHECK(std::abs(lnI_sample(mi, rng).mat()(0, 1)) < 1e-13);
    CHECK(std::abs(lnII_sample(mii, rng).mat()(0, 1)) < 1e-13);
  }
  // zero dispersion reproduces the mean exactly up to exp/log roundoff
  const LognormalTypeI z(m, Eigen::MatrixXd::Zero(3, 3));
  CHECK((lnI_sample(z, rng).mat() - m.mat()).norm() < 1e-13);
}

TEST_CASE("jacobian_logmap against finite differences") {
  CHECK(jacobian_logmap(SpdMatrix::Identity(3)) == doctest::Approx(1.0));
  // p = 1: d log x / d x = 1/x
  const SpdMatrix s(Eigen::MatrixXd::Constant(1, 1, 3.0));
  CHECK(jacobian_logmap(s) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  for (int rep = 0; rep < 30; ++rep) {
    for (int p : {2, 3}) {
      const SpdMatrix x(oracles::random_spd(p, 0.6));
      CHECK(jacobian_logmap(x) ==
            doctest::Approx(oracles::jacobian_logmap_fd(x)).epsilon(1e-5));
    }
  }
}

TEST_CASE("jacobian_logmap is continuous across the equal-eigenvalue branch") {
  // switch sits at |l1 - l2| = 1e-8 * max; probe both sides of it
  const double base = 2.0;
  const double at = 1e-8 * base;
  const SpdMatrix below(diagm({base, base + 0.5 * at}));
  const SpdMatrix above(diagm({base, base + 2.0 * at}));
  const double jb = jacobian_logmap(below);
  const double ja = jacobian_logmap(above);
  CHECK(std::abs(jb - ja) / jb < 1e-7);
  // exactly equal eigenvalues: closed form 1/(l1 l2 l3) * (1/l)^{3}
  const SpdMatrix eq(diagm({base, base, base}));
  CHECK(jacobian_logmap(eq) ==
        doctest::Approx(std::pow(base, -6.0)).epsilon(1e-12));
}

TEST_CASE("densities: scalar lognormal reduction at p = 1") {
  const double mval = 1.7, var = 0.4;
  const SpdMatrix m(Eigen::MatrixXd::Constant(1, 1, mval));
  const Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(1, 1, var);
  const LognormalTypeI mi(m, sigma);
  const LognormalTypeII mii(m, sigma);
  for (double x : {0.3, 0.9, 1.7, 4.2}) {
    const double expect =
        std::exp(-0.5 * std::pow(std::log(x) - std::log(mval), 2) / var) /
        (x * std::sqrt(2.0 * std::numbers::pi * var));
    const SpdMatrix xs(Eigen::MatrixXd::Constant(1, 1, x));
    CHECK(lnI_density(xs, mi) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(lnII_density(xs, mii) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("densities coincide when the mean is a multiple of the identity") {
  const SpdMatrix m(2.0 * Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd sigma = 0.3 * Eigen::MatrixXd::Identity(6, 6);
  sigma(0, 1) = sigma(1, 0) = 0.05;
  const LognormalTypeI mi(m, sigma);
  const LognormalTypeII mii(m, sigma);
  for (int rep = 0; rep < 50; ++rep) {
    const SpdMatrix x(oracles::random_spd(3));
    const double fi = lnI_density(x, mi);
    const double fii = lnII_density(x, mii);
    CHECK(std::abs(fi - fii) < 1e-12 * std::max(fi, fii));
  }
}

TEST_CASE("whitening determinant identity") {
  for (int rep = 0; rep < 30; ++rep) {
    const SpdMatrix x(oracles::random_spd(3));
    const SpdMatrix m(oracles::random_spd(3));
    const Eigen::MatrixXd mih = spd_inv(spd_sqrt(m)).mat();
    const double lhs = (mih * x.mat() * mih).determinant();
    const double rhs = x.mat().determinant() / m.mat().determinant();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("density refuses singular sigma") {
  const SpdMatrix m(diagm({2.0, 0.5}));
  const LognormalTypeI mi(m, diagm({0.5, 0.5, 0.0}));
  CHECK_THROWS_AS(lnI_density(SpdMatrix::Identity(2), mi), DomainError);
}

TEST_CASE("Type I maximum likelihood") {
  const SpdMatrix m(oracles::random_spd(2));
  Eigen::MatrixXd sigma(3, 3);
  sigma << 0.4, 0.1, 0.0, 0.1, 0.3, -0.05, 0.0, -0.05, 0.25;
  const LognormalTypeI truth(m, sigma);
  Rng rng(6);
  std::vector<SpdMatrix> items;
  const int n = 20000;
  for (int i = 0; i < n; ++i) items.push_back(lnI_sample(truth, rng));
  const SampleSet s(items);
  const LognormalMle fit = lnI_mle(s);
  CHECK_FALSE(fit.sigma_singular);
  CHECK((fit.model.m().mat() - m.mat()).lpNorm<Eigen::Infinity>() < 0.03);
  CHECK((fit.model.log_model().sigma() - sigma).lpNorm<Eigen::Infinity>() <
        0.02);

  // m-hat is exactly the log-Euclidean average, sigma-hat the centered
  // second moment of the vecd logs
  const SampleSet small({items[0], items[1], items[2]});
  const LognormalMle fs = lnI_mle(small);
  CHECK((fs.model.m().mat() - mean_log_euclidean(small).mat()).norm() < 1e-12);
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  const Eigen::Vector3d mu = vecd(spd_log(fs.model.m())).values;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d r = vecd(spd_log(small[i])).values - mu;
    acc += r * r.transpose();
  }
  CHECK((fs.model.log_model().sigma() - acc / 3.0).norm() < 1e-12);

  // one observation: zero residuals, flagged singular
  CHECK(lnI_mle(SampleSet({items[0]})).sigma_singular);
}
