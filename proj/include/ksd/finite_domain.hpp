#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ksd/accum.hpp"
#include "ksd/errors.hpp"
#include "ksd/minimax.hpp"

namespace ksd {

// Discrete model: K states, base distribution p0, and a K x D feature matrix
// whose rows are the feature-space images of the states. The reproducing
// kernel is the feature inner product, so every divergence is exactly
// computable.
struct FiniteDomainModel {
  std::vector<std::string> labels;  // empty or one per state
  Eigen::VectorXd p0;               // length K
  Eigen::MatrixXd psi;              // K x D

  [[nodiscard]] Eigen::Index states() const { return p0.size(); }
  [[nodiscard]] Eigen::Index feature_dim() const { return psi.cols(); }
};

// Multiplicative tilt of p0: p(k) = (1 + epsilon * phi(k)) * p0(k).
struct PerturbationSpec {
  Eigen::VectorXd phi;  // length K, zero mean under p0
  double epsilon = 0.0;
};

namespace detail {

inline void check_probability_vector(const Eigen::VectorXd& p, Eigen::Index k,
                                     const char* name) {
  if (p.size() != k) throw input_error(std::string(name) + ": length mismatch");
  if (!p.allFinite()) throw input_error(std::string(name) + ": entries must be finite");
  if (p.minCoeff() < -1e-12) throw input_error(std::string(name) + ": entries must be >= 0");
  Accumulator acc;
  for (Eigen::Index i = 0; i < k; ++i) acc.add(p[i]);
  if (std::abs(acc.total() - 1.0) > 1e-9)
    throw input_error(std::string(name) + ": entries must sum to 1");
}

}  // namespace detail

inline void validate(const FiniteDomainModel& model) {
  const Eigen::Index k = model.states();
  if (k < 1) throw model_error("finite model: needs at least one state");
  if (model.psi.rows() != k) throw model_error("finite model: psi must have K rows");
  if (model.feature_dim() < 1) throw model_error("finite model: feature dimension must be >= 1");
  if (!model.p0.allFinite() || !model.psi.allFinite())
    throw model_error("finite model: entries must be finite");
  if (model.p0.minCoeff() < 0.0) throw model_error("finite model: p0 entries must be >= 0");
  Accumulator mass;
  for (Eigen::Index i = 0; i < k; ++i) mass.add(model.p0[i]);
  if (std::abs(mass.total() - 1.0) > 1e-12) throw model_error("finite model: p0 must sum to 1");
  if (!model.labels.empty() && static_cast<Eigen::Index>(model.labels.size()) != k)
    throw model_error("finite model: labels must be empty or one per state");
  // mean-zero feature map under p0
  Accumulator norm2;
  for (Eigen::Index j = 0; j < model.feature_dim(); ++j) {
    Accumulator col;
    for (Eigen::Index i = 0; i < k; ++i) col.add(model.p0[i] * model.psi(i, j));
    norm2.add(col.total() * col.total());
  }
  if (std::sqrt(std::max(norm2.total(), 0.0)) > 1e-10)
    throw model_error("finite model: features must have zero mean under p0");
}

// Centers a direction against p0: raw - E_{p0}[raw]. A second pass removes
// the round-off left by the first. Directions that are constant on the
// support of p0 center to zero and are rejected.
[[nodiscard]] inline Eigen::VectorXd center_phi(const Eigen::VectorXd& raw,
                                                const Eigen::VectorXd& p0) {
  const Eigen::Index k = raw.size();
  if (k < 1) throw input_error("center_phi: empty direction");
  if (!raw.allFinite()) throw input_error("center_phi: entries must be finite");
  detail::check_probability_vector(p0, k, "center_phi: p0");
  Eigen::VectorXd phi = raw;
  for (int pass = 0; pass < 2; ++pass) {
    Accumulator mean;
    for (Eigen::Index i = 0; i < k; ++i) mean.add(p0[i] * phi[i]);
    phi.array() -= mean.total();
  }
  double sup = 0.0;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    scale = std::max(scale, std::abs(raw[i]));
    if (p0[i] > 0.0) sup = std::max(sup, std::abs(phi[i]));
  }
  if (sup <= 1e-13 * std::max(1.0, scale))
    throw degeneracy_error("center_phi: direction is constant on the support of p0");
  return phi;
}

// p(k) = (1 + epsilon * phi(k)) * p0(k). Requires the tilt to stay
// nonnegative on every state.
[[nodiscard]] inline Eigen::VectorXd perturb(const FiniteDomainModel& model,
                                             const PerturbationSpec& spec) {
  validate(model);
  const Eigen::Index k = model.states();
  if (spec.phi.size() != k) throw input_error("perturb: phi length mismatch");
  if (!spec.phi.allFinite() || !std::isfinite(spec.epsilon))
    throw input_error("perturb: entries must be finite");
  Accumulator mean;
  for (Eigen::Index i = 0; i < k; ++i) mean.add(model.p0[i] * spec.phi[i]);
  if (std::abs(mean.total()) > 1e-12)
    throw input_error("perturb: phi must have zero mean under p0");
  if (1.0 + spec.epsilon * spec.phi.minCoeff() < 0.0 ||
      1.0 + spec.epsilon * spec.phi.maxCoeff() < 0.0)
    throw negativity_error("perturb: 1 + epsilon * phi goes negative");
  return ((1.0 + spec.epsilon * spec.phi.array()) * model.p0.array()).matrix();
}

// KSD(p0, p) as the norm of the feature-space mean: ||p' psi||_2.
[[nodiscard]] inline double ksd_finite_exact(const FiniteDomainModel& model,
                                             const Eigen::VectorXd& p) {
  validate(model);
  detail::check_probability_vector(p, model.states(), "ksd_finite_exact: p");
  Accumulator norm2;
  for (Eigen::Index j = 0; j < model.feature_dim(); ++j) {
    Accumulator col;
    for (Eigen::Index i = 0; i < model.states(); ++i) col.add(p[i] * model.psi(i, j));
    norm2.add(col.total() * col.total());
  }
  return std::sqrt(std::max(norm2.total(), 0.0));
}

// Same quantity through the kernel double sum
// sqrt(sum_{k,l} p(k) p(l) <psi_k, psi_l>), the independent cross-check for
// ksd_finite_exact. Compensated summation keeps the cancellation near p = p0
// at round-off level.
[[nodiscard]] inline double ksd_finite_bruteforce(const FiniteDomainModel& model,
                                                  const Eigen::VectorXd& p) {
  validate(model);
  const Eigen::Index k = model.states();
  detail::check_probability_vector(p, k, "ksd_finite_bruteforce: p");
  Accumulator total;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      Accumulator dot;
      for (Eigen::Index j = 0; j < model.feature_dim(); ++j)
        dot.add(model.psi(a, j) * model.psi(b, j));
      total.add(p[a] * p[b] * dot.total());
    }
  }
  return std::sqrt(std::max(total.total(), 0.0));
}

// KL(p || q) = sum_{k: p(k) > 0} p(k) ln(p(k)/q(k)). States where p vanishes
// contribute nothing; p putting mass where q has none yields +infinity (the
// absolute-continuity sentinel, not an overflow).
[[nodiscard]] inline double kl_finite(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw input_error("kl_finite: length mismatch");
  detail::check_probability_vector(p, p.size(), "kl_finite: p");
  detail::check_probability_vector(q, q.size(), "kl_finite: q");
  Accumulator acc;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    acc.add(p[i] * std::log(p[i] / q[i]));
  }
  return std::max(acc.total(), 0.0);
}

struct LowerBoundRow {
  std::int64_t n = 0;
  bool feasible = false;
  double epsilon = 0.0;
  double ksd = 0.0;   // KSD(p0, p_n) = epsilon * c_phi, the pair separation 2 s_n
  double n_kl = 0.0;  // n * KL(p_n || p0), <= ln 2 on feasible rows
  double le_cam = 0.0;
};

struct LowerBoundTable {
  double m2 = 0.0;     // E_{p0}[phi^2]
  double c = 0.0;      // sqrt(ln 2 / m2), the scaling of epsilon_n = c / sqrt(n)
  double c_phi = 0.0;  // ||sum_k p0(k) phi(k) psi_k||
  std::vector<LowerBoundRow> rows;
};

// Walks the perturbation construction down epsilon_n = c / sqrt(n): row n
// carries the perturbed KSD, the KL budget n * KL(p_n || p0), and the
// testing-risk floor at budget ln 2. Rows where the tilt would go negative
// are flagged infeasible instead of failing the run.
[[nodiscard]] inline LowerBoundTable lower_bound_demo(const FiniteDomainModel& model,
                                                      const Eigen::VectorXd& phi,
                                                      const std::vector<std::int64_t>& n_grid) {
  validate(model);
  const Eigen::Index k = model.states();
  if (phi.size() != k) throw input_error("lower_bound_demo: phi length mismatch");
  if (!phi.allFinite()) throw input_error("lower_bound_demo: phi must be finite");
  Accumulator mean;
  for (Eigen::Index i = 0; i < k; ++i) mean.add(model.p0[i] * phi[i]);
  if (std::abs(mean.total()) > 1e-12)
    throw input_error("lower_bound_demo: phi must have zero mean under p0 (center it first)");
  if (n_grid.empty()) throw input_error("lower_bound_demo: n_grid must be nonempty");
  std::int64_t prev = 0;
  for (std::int64_t n : n_grid) {
    if (n <= prev) throw input_error("lower_bound_demo: n_grid must be strictly increasing and >= 1");
    prev = n;
  }

  LowerBoundTable table;
  Accumulator m2;
  for (Eigen::Index i = 0; i < k; ++i) m2.add(model.p0[i] * phi[i] * phi[i]);
  table.m2 = m2.total();
  if (!(table.m2 > 0.0))
    throw degeneracy_error("lower_bound_demo: phi vanishes on the support of p0");
  const double ln2 = std::log(2.0);
  table.c = std::sqrt(ln2 / table.m2);
  Accumulator cphi2;
  for (Eigen::Index j = 0; j < model.feature_dim(); ++j) {
    Accumulator col;
    for (Eigen::Index i = 0; i < k; ++i) col.add(model.p0[i] * phi[i] * model.psi(i, j));
    cphi2.add(col.total() * col.total());
  }
  table.c_phi = std::sqrt(std::max(cphi2.total(), 0.0));
  const double le_cam = le_cam_bound(ln2);

  table.rows.reserve(n_grid.size());
  for (std::int64_t n : n_grid) {
    LowerBoundRow row;
    row.n = n;
    row.epsilon = table.c / std::sqrt(static_cast<double>(n));
    row.le_cam = le_cam;
    const bool ok = 1.0 + row.epsilon * phi.minCoeff() >= 0.0 &&
                    1.0 + row.epsilon * phi.maxCoeff() >= 0.0;
    if (!ok) {
      row.feasible = false;
      row.ksd = std::numeric_limits<double>::quiet_NaN();
      row.n_kl = std::numeric_limits<double>::quiet_NaN();
      table.rows.push_back(row);
      continue;
    }
    row.feasible = true;
    const Eigen::VectorXd pn = perturb(model, PerturbationSpec{phi, row.epsilon});
    row.ksd = ksd_finite_exact(model, pn);
    row.n_kl = static_cast<double>(n) * kl_finite(pn, model.p0);
    if (!(row.n_kl <= ln2 + 1e-9))
      throw model_error("lower_bound_demo: KL budget exceeded, construction is inconsistent");
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace ksd
