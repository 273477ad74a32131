#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ksd/accum.hpp"
#include "ksd/errors.hpp"
#include "ksd/rng.hpp"
#include "ksd/stein.hpp"

namespace ksd {

enum class EstimatorMethod { v_statistic, nystrom };

[[nodiscard]] inline const char* method_name(EstimatorMethod m) {
  return m == EstimatorMethod::v_statistic ? "v" : "nystrom";
}

struct EstimatorResult {
  double ksd = 0.0;          // sqrt(max(ksd_squared, 0))
  double ksd_squared = 0.0;  // value as computed, before the clamp
  EstimatorMethod method = EstimatorMethod::v_statistic;
  Eigen::Index landmarks_used = 0;       // 0 for the V-statistic
  Eigen::Index dropped_eigenvalues = 0;  // 0 for the V-statistic
};

namespace detail {

[[nodiscard]] inline EstimatorResult make_result(double ksd2, EstimatorMethod m,
                                                 Eigen::Index landmarks, Eigen::Index dropped) {
  EstimatorResult r;
  r.ksd_squared = ksd2;
  r.ksd = std::sqrt(std::max(ksd2, 0.0));
  r.method = m;
  r.landmarks_used = landmarks;
  r.dropped_eigenvalues = dropped;
  return r;
}

}  // namespace detail

// V-statistic: the mean of all n^2 Gram entries. Nonnegative because the
// Stein kernel is positive semidefinite.
[[nodiscard]] inline EstimatorResult ksd_v_statistic(const SteinGram& gram) {
  const Eigen::Index n = gram.full.rows();
  if (n < 1 || gram.full.cols() != n)
    throw input_error("ksd_v_statistic: full Gram must be square and nonempty");
  Accumulator acc;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) acc.add(gram.full(i, j));
  }
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  return detail::make_result(acc.total() / n2, EstimatorMethod::v_statistic, 0, 0);
}

// Streaming V-statistic: same value as ksd_v_statistic(stein_gram(...)) up to
// summation roundoff, without materializing the n x n matrix. Upper-trapezoid
// blocks count the diagonal once and off-diagonal entries twice; block
// partials combine in block order, so the result does not depend on the
// thread count.
[[nodiscard]] inline EstimatorResult ksd_v_statistic(const GaussianMeasure& target,
                                                     const GaussianKernel& k,
                                                     const SampleSet& samples, int threads = 1) {
  validate(samples);
  if (target.dim() != k.dim() || samples.dim() != k.dim())
    throw input_error("ksd_v_statistic: dimension mismatch");
  const Eigen::Index n = samples.n();
  const Eigen::MatrixXd& x = samples.data;
  const Eigen::MatrixXd s = target.scores(x);
  const Eigen::Index block = detail::kSteinBlockRows;
  const Eigen::Index nblocks = (n + block - 1) / block;
  std::vector<Accumulator> partial(static_cast<std::size_t>(nblocks));
  parallel_for(0, nblocks, threads, [&](std::int64_t bi) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(bi) * block;
    const Eigen::Index rows = std::min(block, n - r0);
    const Eigen::Index cols = n - r0;
    const Eigen::MatrixXd blk = detail::stein_block(
        k, x.middleRows(r0, rows), s.middleRows(r0, rows), x.bottomRows(cols), s.bottomRows(cols));
    Accumulator acc;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Eigen::Index top = std::min(j - 1, rows - 1);
      for (Eigen::Index i = 0; i <= top; ++i) acc.add(2.0 * blk(i, j));
      if (j < rows) acc.add(blk(j, j));
    }
    partial[static_cast<std::size_t>(bi)] = acc;
  });
  Accumulator acc;
  for (const Accumulator& p : partial) {
    acc.add(p.sum);
    acc.add(p.comp);
  }
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  return detail::make_result(acc.total() / n2, EstimatorMethod::v_statistic, 0, 0);
}

// m indices drawn uniformly i.i.d. (with replacement) from [0, n).
[[nodiscard]] inline std::vector<Eigen::Index> sample_landmarks(Eigen::Index n, Eigen::Index m,
                                                                Rng& rng) {
  if (n < 1) throw input_error("sample_landmarks: n must be >= 1");
  if (m < 1) throw input_error("sample_landmarks: m must be >= 1");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  for (auto& v : idx) v = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  return idx;
}

// Minimum-norm solution of a x = rhs for symmetric positive semidefinite a,
// through a full eigendecomposition. Eigenvalues at or below
// rel_tol * max(lambda_max, 0) are treated as zero; *dropped (optional)
// receives how many were zeroed.
[[nodiscard]] inline Eigen::VectorXd psd_pseudo_solve(const Eigen::MatrixXd& a,
                                                      const Eigen::VectorXd& rhs,
                                                      double rel_tol = 1e-10,
                                                      Eigen::Index* dropped = nullptr) {
  const Eigen::Index m = a.rows();
  if (m < 1 || a.cols() != m)
    throw input_error("psd_pseudo_solve: matrix must be square and nonempty");
  if (rhs.size() != m) throw input_error("psd_pseudo_solve: rhs size mismatch");
  if (!(rel_tol >= 0.0) || !std::isfinite(rel_tol))
    throw input_error("psd_pseudo_solve: rel_tol must be finite and >= 0");
  if (!a.allFinite() || !rhs.allFinite())
    throw input_error("psd_pseudo_solve: entries must be finite");
  const double scale = a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale))
    throw input_error("psd_pseudo_solve: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw convergence_error("psd_pseudo_solve: eigendecomposition did not converge",
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::infinity());
  const Eigen::VectorXd& val = es.eigenvalues();
  const double thr = rel_tol * std::max(val.maxCoeff(), 0.0);
  Eigen::VectorXd coef = es.eigenvectors().transpose() * rhs;
  Eigen::Index drop = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (val[i] > thr) {
      coef[i] /= val[i];
    } else {
      coef[i] = 0.0;
      ++drop;
    }
  }
  if (dropped != nullptr) *dropped = drop;
  return es.eigenvectors() * coef;
}

// Nystrom estimate from an explicit landmark multiset:
//   beta_a = (1/n) sum_b K0(xt_a, x_b),   ksd^2 = beta' pinv(K_mm) beta.
// A projection of the V-statistic embedding, so it never exceeds the
// V-statistic on the same sample beyond roundoff, and it reproduces the
// V-statistic when the landmarks span the full sample.
[[nodiscard]] inline EstimatorResult ksd_nystrom_at(const GaussianMeasure& target,
                                                    const GaussianKernel& k,
                                                    const SampleSet& samples,
                                                    const std::vector<Eigen::Index>& landmarks,
                                                    double rel_tol = 1e-10) {
  validate(samples);
  if (target.dim() != k.dim() || samples.dim() != k.dim())
    throw input_error("ksd_nystrom_at: dimension mismatch");
  const Eigen::Index n = samples.n();
  const Eigen::Index m = static_cast<Eigen::Index>(landmarks.size());
  if (m < 1) throw input_error("ksd_nystrom_at: need at least one landmark");
  const Eigen::MatrixXd& x = samples.data;
  const Eigen::MatrixXd s = target.scores(x);
  Eigen::MatrixXd xl(m, x.cols());
  Eigen::MatrixXd sl(m, x.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index idx = landmarks[static_cast<std::size_t>(i)];
    if (idx < 0 || idx >= n) throw input_error("ksd_nystrom_at: landmark index out of range");
    xl.row(i) = x.row(idx);
    sl.row(i) = s.row(idx);
  }
  const Eigen::MatrixXd kmn = detail::stein_block(k, xl, sl, x, s);
  const Eigen::MatrixXd kmm = detail::stein_block(k, xl, sl, xl, sl);
  std::vector<Accumulator> rows(static_cast<std::size_t>(m));
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < m; ++a) rows[static_cast<std::size_t>(a)].add(kmn(a, b));
  }
  Eigen::VectorXd beta(m);
  for (Eigen::Index a = 0; a < m; ++a)
    beta[a] = rows[static_cast<std::size_t>(a)].total() / static_cast<double>(n);
  Eigen::Index dropped = 0;
  const Eigen::VectorXd alpha = psd_pseudo_solve(kmm, beta, rel_tol, &dropped);
  Accumulator dot;
  for (Eigen::Index a = 0; a < m; ++a) dot.add(beta[a] * alpha[a]);
  return detail::make_result(dot.total(), EstimatorMethod::nystrom, m, dropped);
}

// Draws the landmark multiset from rng, then delegates to ksd_nystrom_at.
[[nodiscard]] inline EstimatorResult ksd_nystrom(const GaussianMeasure& target,
                                                 const GaussianKernel& k, const SampleSet& samples,
                                                 Eigen::Index m, Rng& rng, double rel_tol = 1e-10) {
  return ksd_nystrom_at(target, k, samples, sample_landmarks(samples.n(), m, rng), rel_tol);
}

}  // namespace ksd
