#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "ksd/finite_domain.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// two states, uniform base, phi = (1, -1), one feature column (1, -1):
// M2 = 1, C_phi = 1
ksd::FiniteDomainModel coin_model() {
  ksd::FiniteDomainModel m;
  m.p0.resize(2);
  m.p0 << 0.5, 0.5;
  m.psi.resize(2, 1);
  m.psi << 1.0, -1.0;
  return m;
}

Eigen::VectorXd coin_phi() {
  Eigen::VectorXd phi(2);
  phi << 1.0, -1.0;
  return phi;
}

}  // namespace

TEST_CASE("centering a direction against the base distribution") {
  Eigen::VectorXd raw(2);
  raw << 2.0, 0.0;
  Eigen::VectorXd p0(2);
  p0 << 0.5, 0.5;
  const Eigen::VectorXd phi = ksd::center_phi(raw, p0);
  CHECK(phi[0] == 1.0);
  CHECK(phi[1] == -1.0);
  // centering is idempotent
  CHECK(ksd::center_phi(phi, p0) == phi);
}

TEST_CASE("centering rejects directions constant on the support") {
  Eigen::VectorXd p0(2);
  p0 << 0.5, 0.5;
  CHECK_THROWS_AS(ksd::center_phi(Eigen::VectorXd::Constant(2, 5.0), p0), ksd::degeneracy_error);
  // constant only where p0 has mass
  Eigen::VectorXd point(2);
  point << 1.0, 0.0;
  Eigen::VectorXd raw(2);
  raw << 3.0, 7.0;
  CHECK_THROWS_AS(ksd::center_phi(raw, point), ksd::degeneracy_error);
}

TEST_CASE("centering validation") {
  Eigen::VectorXd p0(2);
  p0 << 0.5, 0.5;
  Eigen::VectorXd raw(2);
  raw << 1.0, std::nan("");
  CHECK_THROWS_AS(ksd::center_phi(raw, p0), ksd::input_error);
  Eigen::VectorXd badp(2);
  badp << 0.7, 0.7;
  CHECK_THROWS_AS(ksd::center_phi(Eigen::VectorXd::Zero(2), badp), ksd::input_error);
  CHECK_THROWS_AS(ksd::center_phi(Eigen::VectorXd(0), Eigen::VectorXd(0)), ksd::input_error);
}

TEST_CASE("perturbation of the two-state model") {
  const ksd::FiniteDomainModel m = coin_model();
  const Eigen::VectorXd pn = ksd::perturb(m, ksd::PerturbationSpec{coin_phi(), 0.2});
  CHECK_THAT(pn[0], WithinRel(0.6, 1e-15));
  CHECK_THAT(pn[1], WithinRel(0.4, 1e-15));
  // zero tilt returns the base exactly
  CHECK(ksd::perturb(m, ksd::PerturbationSpec{coin_phi(), 0.0}) == m.p0);
}

TEST_CASE("perturbation guards") {
  const ksd::FiniteDomainModel m = coin_model();
  CHECK_THROWS_AS(ksd::perturb(m, ksd::PerturbationSpec{coin_phi(), 1.5}),
                  ksd::negativity_error);
  CHECK_THROWS_AS(ksd::perturb(m, ksd::PerturbationSpec{coin_phi(), -1.5}),
                  ksd::negativity_error);
  Eigen::VectorXd uncentered(2);
  uncentered << 1.0, 0.0;
  CHECK_THROWS_AS(ksd::perturb(m, ksd::PerturbationSpec{uncentered, 0.1}), ksd::input_error);
  CHECK_THROWS_AS(ksd::perturb(m, ksd::PerturbationSpec{Eigen::VectorXd::Zero(3), 0.1}),
                  ksd::input_error);
}

TEST_CASE("perturbed vectors stay on the simplex") {
  ksd::Rng rng(601);
  for (int trial = 0; trial < 50; ++trial) {
    const support::FiniteModelDraw draw = support::draw_finite_model(rng);
    const double eps = 0.9 * draw.eps_max * rng.uniform01();
    const Eigen::VectorXd pn = ksd::perturb(draw.model, ksd::PerturbationSpec{draw.phi, eps});
    CHECK(pn.minCoeff() >= 0.0);
    ksd::Accumulator mass;
    for (Eigen::Index i = 0; i < pn.size(); ++i) mass.add(pn[i]);
    CHECK_THAT(mass.total(), WithinAbs(1.0, 1e-13));
  }
}

TEST_CASE("exact divergence on the two-state model") {
  const ksd::FiniteDomainModel m = coin_model();
  Eigen::VectorXd p(2);
  p << 0.6, 0.4;
  CHECK_THAT(ksd::ksd_finite_exact(m, p), WithinRel(0.2, 1e-14));
  CHECK(ksd::ksd_finite_exact(m, m.p0) == 0.0);
  Eigen::VectorXd point(2);
  point << 1.0, 0.0;
  CHECK_THAT(ksd::ksd_finite_exact(m, point), WithinRel(1.0, 1e-15));
  CHECK_THROWS_AS(ksd::ksd_finite_exact(m, Eigen::VectorXd::Constant(3, 1.0 / 3.0)),
                  ksd::input_error);
}

TEST_CASE("point masses evaluate to the feature norm") {
  ksd::Rng rng(602);
  for (int trial = 0; trial < 20; ++trial) {
    const support::FiniteModelDraw draw = support::draw_finite_model(rng, 10, 5);
    const Eigen::Index k = draw.model.states();
    const Eigen::Index pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(k)));
    Eigen::VectorXd point = Eigen::VectorXd::Zero(k);
    point[pick] = 1.0;
    CHECK(support::guarded_rel(ksd::ksd_finite_exact(draw.model, point),
                               draw.model.psi.row(pick).norm()) < 1e-14);
  }
}

TEST_CASE("norm of the mean agrees with the kernel double sum") {
  ksd::Rng rng(603);
  for (int trial = 0; trial < 200; ++trial) {
    const support::FiniteModelDraw draw = support::draw_finite_model(rng);
    const Eigen::Index k = draw.model.states();
    // The double sum cancels at the squared scale, so agreement is asserted
    // on the squares; near the base its square root floors around 1e-8 while
    // the mean-first path cancels before squaring.
    const double eps = 0.9 * draw.eps_max * rng.uniform01();
    const Eigen::VectorXd pn = ksd::perturb(draw.model, ksd::PerturbationSpec{draw.phi, eps});
    const double e1 = ksd::ksd_finite_exact(draw.model, pn);
    const double b1 = ksd::ksd_finite_bruteforce(draw.model, pn);
    CHECK(std::abs(e1 * e1 - b1 * b1) <= 1e-12);
    // at an unrelated distribution
    const Eigen::VectorXd q = support::random_probability(rng, static_cast<int>(k));
    const double e2 = ksd::ksd_finite_exact(draw.model, q);
    const double b2 = ksd::ksd_finite_bruteforce(draw.model, q);
    CHECK(std::abs(e2 * e2 - b2 * b2) <= 1e-12);
    // at the base itself, both near zero
    CHECK(ksd::ksd_finite_exact(draw.model, draw.model.p0) <= 1e-12);
    const double b0 = ksd::ksd_finite_bruteforce(draw.model, draw.model.p0);
    CHECK(b0 * b0 <= 1e-12);
  }
}

TEST_CASE("divergence is linear in the tilt size") {
  ksd::Rng rng(604);
  int accepted = 0;
  int attempts = 0;
  while (accepted < 100) {
    REQUIRE(++attempts < 2000);
    const support::FiniteModelDraw draw = support::draw_finite_model(rng);
    const double eps = 0.9 * draw.eps_max;
    if (eps * draw.c_phi < 1e-3) continue;  // below round-off resolution of the identity
    const Eigen::VectorXd pn = ksd::perturb(draw.model, ksd::PerturbationSpec{draw.phi, eps});
    const double ksd_val = ksd::ksd_finite_exact(draw.model, pn);
    CHECK(support::guarded_rel(ksd_val, eps * draw.c_phi) < 1e-12);
    ++accepted;
  }
}

TEST_CASE("finite kl frozen values") {
  Eigen::VectorXd p(2);
  p << 0.6, 0.4;
  Eigen::VectorXd q(2);
  q << 0.5, 0.5;
  CHECK_THAT(ksd::kl_finite(p, q), WithinRel(0.020135513550688863, 1e-14));
  CHECK(ksd::kl_finite(q, q) == 0.0);
}

TEST_CASE("finite kl absolute-continuity sentinel") {
  Eigen::VectorXd p(2);
  p << 0.5, 0.5;
  Eigen::VectorXd point(2);
  point << 1.0, 0.0;
  CHECK(ksd::kl_finite(p, point) == std::numeric_limits<double>::infinity());
  // the reverse direction is finite: only states with p mass contribute
  CHECK_THAT(ksd::kl_finite(point, p), WithinRel(std::log(2.0), 1e-15));
  CHECK_THROWS_AS(ksd::kl_finite(p, Eigen::VectorXd::Constant(3, 1.0 / 3.0)), ksd::input_error);
}

TEST_CASE("finite kl satisfies the quadratic tilt bound") {
  ksd::Rng rng(605);
  for (int trial = 0; trial < 100; ++trial) {
    const support::FiniteModelDraw draw = support::draw_finite_model(rng);
    for (double frac : {0.1, 0.5, 0.9}) {
      const double eps = frac * draw.eps_max;
      const Eigen::VectorXd pn = ksd::perturb(draw.model, ksd::PerturbationSpec{draw.phi, eps});
      const double kl = ksd::kl_finite(pn, draw.model.p0);
      CHECK(kl >= 0.0);
      CHECK(kl <= eps * eps * draw.m2 + 1e-15);
    }
  }
}

TEST_CASE("lower-bound walk on the two-state model") {
  const ksd::FiniteDomainModel m = coin_model();
  const ksd::LowerBoundTable table = ksd::lower_bound_demo(m, coin_phi(), {25, 100, 10000});
  CHECK_THAT(table.m2, WithinRel(1.0, 1e-15));
  CHECK_THAT(table.c, WithinRel(0.8325546111576977, 1e-14));
  CHECK_THAT(table.c_phi, WithinRel(1.0, 1e-15));
  REQUIRE(table.rows.size() == 3);
  const double ln2 = std::log(2.0);
  for (const ksd::LowerBoundRow& row : table.rows) {
    CHECK(row.feasible);
    CHECK(support::guarded_rel(row.epsilon, table.c / std::sqrt(static_cast<double>(row.n))) <
          1e-15);
    CHECK(support::guarded_rel(row.ksd, row.epsilon * table.c_phi) < 1e-12);
    // the scaled separation is constant down the walk
    CHECK(support::guarded_rel(row.ksd * std::sqrt(static_cast<double>(row.n)),
                               table.c * table.c_phi) < 1e-12);
    CHECK(row.n_kl <= ln2);
    CHECK(row.n_kl > 0.0);
    CHECK(row.le_cam == ksd::le_cam_bound(ln2));
  }
  // half the budget is attained in the small-tilt limit: n_kl -> ln2 / 2
  CHECK_THAT(table.rows[2].n_kl, WithinAbs(0.5 * ln2, 1e-3));
}

TEST_CASE("infeasible rows are flagged rather than fatal") {
  // skewed base with a steep direction: the tilt goes negative for small n
  ksd::FiniteDomainModel m;
  m.p0.resize(2);
  m.p0 << 0.9, 0.1;
  m.psi.resize(2, 1);
  m.psi << 1.0, -9.0;
  Eigen::VectorXd raw(2);
  raw << 1.0, -5.0;
  const Eigen::VectorXd phi = ksd::center_phi(raw, m.p0);
  CHECK_THAT(phi[0], WithinRel(0.6, 1e-13));
  CHECK_THAT(phi[1], WithinRel(-5.4, 1e-13));

  const ksd::LowerBoundTable table = ksd::lower_bound_demo(m, phi, {1, 4, 25, 100});
  CHECK_THAT(table.m2, WithinRel(3.24, 1e-13));
  REQUIRE(table.rows.size() == 4);
  CHECK_FALSE(table.rows[0].feasible);
  CHECK_FALSE(table.rows[1].feasible);
  CHECK(table.rows[2].feasible);
  CHECK(table.rows[3].feasible);
  for (int i : {0, 1}) {
    CHECK(std::isnan(table.rows[i].ksd));
    CHECK(std::isnan(table.rows[i].n_kl));
    CHECK(table.rows[i].epsilon > 0.0);
    CHECK(table.rows[i].le_cam > 0.0);
  }
  CHECK(table.rows[2].n_kl <= std::log(2.0));
}

TEST_CASE("lower-bound walk validation") {
  const ksd::FiniteDomainModel m = coin_model();
  Eigen::VectorXd uncentered(2);
  uncentered << 1.0, 0.0;
  CHECK_THROWS_AS(ksd::lower_bound_demo(m, uncentered, {10}), ksd::input_error);
  CHECK_THROWS_AS(ksd::lower_bound_demo(m, Eigen::VectorXd::Zero(2), {10}),
                  ksd::degeneracy_error);
  CHECK_THROWS_AS(ksd::lower_bound_demo(m, coin_phi(), {}), ksd::input_error);
  CHECK_THROWS_AS(ksd::lower_bound_demo(m, coin_phi(), {10, 10}), ksd::input_error);
  CHECK_THROWS_AS(ksd::lower_bound_demo(m, coin_phi(), {10, 5}), ksd::input_error);
  CHECK_THROWS_AS(ksd::lower_bound_demo(m, Eigen::VectorXd::Zero(3), {10}), ksd::input_error);
}

TEST_CASE("affinely independent features separate every perturbation") {
  ksd::FiniteDomainModel m;
  m.p0.resize(3);
  m.p0 << 0.25, 0.25, 0.5;
  m.psi.resize(3, 2);
  m.psi << 1.0, 1.0, -1.0, 1.0, 0.0, -1.0;
  ksd::validate(m);
  CHECK(ksd::ksd_finite_exact(m, m.p0) == 0.0);
  ksd::Rng rng(606);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd raw(3);
    for (int i = 0; i < 3; ++i) raw[i] = rng.normal();
    Eigen::VectorXd phi;
    try {
      phi = ksd::center_phi(raw, m.p0);
    } catch (const ksd::degeneracy_error&) {
      continue;
    }
    const double eps = std::min(0.5 / phi.cwiseAbs().maxCoeff(), 1.0);
    const Eigen::VectorXd pn = ksd::perturb(m, ksd::PerturbationSpec{phi, eps});
    if ((pn - m.p0).cwiseAbs().maxCoeff() < 1e-12) continue;
    CHECK(ksd::ksd_finite_exact(m, pn) > 1e-13);
  }
}

TEST_CASE("model validation") {
  ksd::FiniteDomainModel bad = coin_model();
  bad.p0[0] = 0.6;  // mass 1.1
  CHECK_THROWS_AS(ksd::validate(bad), ksd::model_error);

  ksd::FiniteDomainModel negative = coin_model();
  negative.p0 << 1.2, -0.2;
  CHECK_THROWS_AS(ksd::validate(negative), ksd::model_error);

  ksd::FiniteDomainModel skewed = coin_model();
  skewed.psi << 1.0, 0.0;  // nonzero mean under p0
  CHECK_THROWS_AS(ksd::validate(skewed), ksd::model_error);

  ksd::FiniteDomainModel ragged = coin_model();
  ragged.psi.resize(3, 1);
  ragged.psi << 1.0, -1.0, 0.0;
  CHECK_THROWS_AS(ksd::validate(ragged), ksd::model_error);

  ksd::FiniteDomainModel labeled = coin_model();
  labeled.labels = {"heads"};
  CHECK_THROWS_AS(ksd::validate(labeled), ksd::model_error);
  labeled.labels = {"heads", "tails"};
  ksd::validate(labeled);

  ksd::FiniteDomainModel empty;
  empty.p0.resize(0);
  empty.psi.resize(0, 0);
  CHECK_THROWS_AS(ksd::validate(empty), ksd::model_error);
}
