#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

#include "ksd/gaussian.hpp"
#include "ksd/sample.hpp"
#include "ksd/stein.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinRel;

namespace {
Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

ksd::GaussianMeasure random_target(ksd::Rng& rng, int d) {
  Eigen::VectorXd mu(d);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    mu[j] = rng.normal();
    cov(j, j) = 0.5 + 1.5 * rng.uniform01();
  }
  return ksd::GaussianMeasure(std::move(mu), std::move(cov));
}
}  // namespace

TEST_CASE("score of the standard normal is the negated point") {
  const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(2);
  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  const Eigen::VectorXd s = t.score(x);
  CHECK(s[0] == -1.0);
  CHECK(s[1] == -2.0);
  CHECK(t.score(Eigen::VectorXd::Zero(2)).isZero(0.0));
}

TEST_CASE("score with a general mean and covariance") {
  // N(1, 2) at x = 2: -(x - mu) / var = -0.5
  const ksd::GaussianMeasure t(vec1(1.0), Eigen::MatrixXd::Constant(1, 1, 2.0));
  CHECK_THAT(t.score(vec1(2.0))[0], WithinRel(-0.5, 1e-15));
  CHECK(t.score(vec1(1.0))[0] == 0.0);
}

TEST_CASE("batch scores agree with pointwise scores") {
  ksd::Rng rng(201);
  const ksd::GaussianMeasure t = random_target(rng, 3);
  Eigen::MatrixXd rows(5, 3);
  for (int i = 0; i < 5; ++i) rows.row(i) = support::random_point(rng, 3, 2.0).transpose();
  const Eigen::MatrixXd s = t.scores(rows);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd one = t.score(rows.row(i).transpose());
    CHECK((s.row(i).transpose() - one).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("measure construction rejects invalid covariance") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(ksd::GaussianMeasure(Eigen::VectorXd::Zero(2), asym), ksd::model_error);
  Eigen::MatrixXd indef(2, 2);
  indef << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(ksd::GaussianMeasure(Eigen::VectorXd::Zero(2), indef), ksd::model_error);
  CHECK_THROWS_AS(ksd::GaussianMeasure(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2)),
                  ksd::model_error);
  CHECK_THROWS_AS(ksd::GaussianMeasure(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(3, 3)),
                  ksd::input_error);
  CHECK_THROWS_AS(ksd::GaussianMeasure(Eigen::VectorXd(0), Eigen::MatrixXd(0, 0)),
                  ksd::input_error);
}

TEST_CASE("stein kernel at the origin of the standard pair is exactly two") {
  const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(1);
  const ksd::GaussianKernel k(1.0, 1);
  CHECK(ksd::stein_kernel_eval(t, k, vec1(0.0), vec1(0.0)) == 2.0);
}

TEST_CASE("stein kernel frozen value at unit separation") {
  // standard normal, gamma 1, x = 1, y = 0: -4 / e
  const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(1);
  const ksd::GaussianKernel k(1.0, 1);
  CHECK_THAT(ksd::stein_kernel_eval(t, k, vec1(1.0), vec1(0.0)),
             WithinRel(-1.4715177646857693, 1e-14));
}

TEST_CASE("stein kernel is symmetric") {
  ksd::Rng rng(202);
  for (int d : {1, 2, 4}) {
    const ksd::GaussianMeasure t = random_target(rng, d);
    const ksd::GaussianKernel k(support::log_uniform(rng, 0.25, 4.0), d);
    for (int tr = 0; tr < 30; ++tr) {
      const Eigen::VectorXd x = support::random_point(rng, d, 2.0);
      const Eigen::VectorXd y = support::random_point(rng, d, 2.0);
      const double a = ksd::stein_kernel_eval(t, k, x, y);
      const double b = ksd::stein_kernel_eval(t, k, y, x);
      CHECK(support::guarded_rel(a, b) < 1e-13);
    }
  }
}

TEST_CASE("stein kernel on the diagonal of the standard pair") {
  // K0(x, x) = |x|^2 + 2 gamma d for the standard target
  ksd::Rng rng(203);
  for (int d : {1, 3}) {
    const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(d);
    const ksd::GaussianKernel k(0.7, d);
    for (int tr = 0; tr < 20; ++tr) {
      const Eigen::VectorXd x = support::random_point(rng, d, 3.0);
      CHECK_THAT(ksd::stein_kernel_eval(t, k, x, x),
                 WithinRel(x.squaredNorm() + 2.0 * 0.7 * d, 1e-14));
    }
  }
}

TEST_CASE("stein kernel matches the finite-difference composition") {
  ksd::Rng rng(204);
  int checked = 0;
  while (checked < 100) {
    const int d = 1 + static_cast<int>(rng.below(4));
    const ksd::GaussianMeasure t = random_target(rng, d);
    const ksd::GaussianKernel k(support::log_uniform(rng, 0.25, 2.0), d);
    const Eigen::VectorXd x = support::random_point(rng, d, 1.5);
    const Eigen::VectorXd y = support::random_point(rng, d, 1.5);
    const double exact = ksd::stein_kernel_eval(t, k, x, y);
    const double fd = support::fd_stein_kernel(t, k, x, y, 1e-5, 1e-4);
    CHECK(support::guarded_rel(exact, fd) < 1e-6);
    ++checked;
  }
}

TEST_CASE("stein kernel rejects dimension mismatches") {
  const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(2);
  const ksd::GaussianKernel k(1.0, 3);
  CHECK_THROWS_AS(
      ksd::stein_kernel_eval(t, k, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)),
      ksd::input_error);
}

TEST_CASE("gram of a single point") {
  const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(1);
  const ksd::GaussianKernel k(1.0, 1);
  ksd::SampleSet s;
  s.data = Eigen::MatrixXd::Zero(1, 1);
  const ksd::SteinGram g = ksd::stein_gram(t, k, s);
  REQUIRE(g.full.rows() == 1);
  CHECK(g.full(0, 0) == 2.0);
  CHECK_FALSE(g.cross.has_value());
  CHECK_FALSE(g.landmark.has_value());
}

TEST_CASE("gram entries match pointwise evaluation") {
  ksd::Rng rng(205);
  const int d = 3;
  const ksd::GaussianMeasure t = random_target(rng, d);
  const ksd::GaussianKernel k(0.6, d);
  ksd::SampleSet s = ksd::sample_gaussian(t, 17, rng);
  const ksd::SteinGram g = ksd::stein_gram(t, k, s);
  for (int i = 0; i < 17; ++i) {
    for (int j = 0; j < 17; ++j) {
      const double direct =
          ksd::stein_kernel_eval(t, k, s.data.row(i).transpose(), s.data.row(j).transpose());
      CHECK(support::guarded_rel(g.full(i, j), direct) < 1e-12);
    }
  }
}

TEST_CASE("gram is exactly symmetric and duplicate rows coincide") {
  ksd::Rng rng(206);
  const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(2);
  const ksd::GaussianKernel k(1.0, 2);
  ksd::SampleSet s = ksd::sample_gaussian(t, 12, rng);
  s.data.row(7) = s.data.row(3);
  const ksd::SteinGram g = ksd::stein_gram(t, k, s);
  CHECK(g.full == g.full.transpose().eval());
  for (int j = 0; j < 12; ++j) {
    CHECK(support::guarded_rel(g.full(3, j), g.full(7, j)) < 1e-13);
  }
  CHECK(g.full(3, 3) == g.full(7, 7));
}

TEST_CASE("gram is positive semidefinite") {
  ksd::Rng rng(207);
  const ksd::GaussianMeasure t = random_target(rng, 3);
  const ksd::GaussianKernel k(0.8, 3);
  const ksd::SampleSet s = ksd::sample_gaussian(t, 50, rng);
  const ksd::SteinGram g = ksd::stein_gram(t, k, s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.full, Eigen::EigenvaluesOnly);
  REQUIRE(es.info() == Eigen::Success);
  const double lmax = es.eigenvalues().maxCoeff();
  CHECK(es.eigenvalues().minCoeff() >= -1e-8 * lmax);
}

TEST_CASE("landmark blocks match pointwise evaluation") {
  ksd::Rng rng(208);
  const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(2);
  const ksd::GaussianKernel k(1.0, 2);
  const ksd::SampleSet s = ksd::sample_gaussian(t, 9, rng);
  const std::vector<Eigen::Index> lm = {4, 0, 4, 8};
  const ksd::SteinGram g = ksd::stein_gram(t, k, s, &lm);
  REQUIRE(g.cross.has_value());
  REQUIRE(g.landmark.has_value());
  REQUIRE(g.cross->rows() == 4);
  REQUIRE(g.cross->cols() == 9);
  REQUIRE(g.landmark->rows() == 4);
  for (int a = 0; a < 4; ++a) {
    const Eigen::VectorXd xa = s.data.row(lm[static_cast<std::size_t>(a)]).transpose();
    for (int b = 0; b < 9; ++b) {
      const double direct = ksd::stein_kernel_eval(t, k, xa, s.data.row(b).transpose());
      CHECK(support::guarded_rel((*g.cross)(a, b), direct) < 1e-12);
    }
    for (int b = 0; b < 4; ++b) {
      const Eigen::VectorXd xb = s.data.row(lm[static_cast<std::size_t>(b)]).transpose();
      CHECK(support::guarded_rel((*g.landmark)(a, b), ksd::stein_kernel_eval(t, k, xa, xb)) <
            1e-12);
    }
  }
  // duplicated landmark rows are identical slices
  CHECK((*g.cross).row(0) == (*g.cross).row(2));
}

TEST_CASE("gram rejects bad landmark indices") {
  ksd::Rng rng(209);
  const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(1);
  const ksd::GaussianKernel k(1.0, 1);
  const ksd::SampleSet s = ksd::sample_gaussian(t, 5, rng);
  const std::vector<Eigen::Index> out = {5};
  CHECK_THROWS_AS(ksd::stein_gram(t, k, s, &out), ksd::input_error);
  const std::vector<Eigen::Index> neg = {-1};
  CHECK_THROWS_AS(ksd::stein_gram(t, k, s, &neg), ksd::input_error);
  const std::vector<Eigen::Index> empty;
  CHECK_THROWS_AS(ksd::stein_gram(t, k, s, &empty), ksd::input_error);
}

TEST_CASE("gram is identical for every thread count") {
  ksd::Rng rng(210);
  const ksd::GaussianMeasure t = ksd::GaussianMeasure::standard(3);
  const ksd::GaussianKernel k(0.9, 3);
  // spans multiple row blocks
  const ksd::SampleSet s = ksd::sample_gaussian(t, 600, rng);
  const ksd::SteinGram g1 = ksd::stein_gram(t, k, s, nullptr, 1);
  const ksd::SteinGram g4 = ksd::stein_gram(t, k, s, nullptr, 4);
  CHECK(g1.full == g4.full);
}
