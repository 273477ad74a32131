#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "ksd/errors.hpp"
#include "ksd/gaussian.hpp"
#include "ksd/kernel.hpp"
#include "ksd/parallel.hpp"
#include "ksd/sample.hpp"

namespace ksd {

// Langevin-Stein kernel of target p0 under base kernel k:
//   K0(x, y) = <s(x), s(y)> k(x, y) + <s(y), grad_x k> + <s(x), grad_y k>
//            + sum_j d2k/dx_j dy_j,        s = score of p0.
// Symmetric and positive semidefinite, with E_{X ~ p0}[K0(x, X)] = 0 for
// every fixed x.
[[nodiscard]] inline double stein_kernel_eval(const GaussianMeasure& target,
                                              const GaussianKernel& k, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& y) {
  if (target.dim() != k.dim())
    throw input_error("stein_kernel_eval: target and kernel dimensions differ");
  const double kv = kernel_eval(k, x, y);
  const KernelDerivatives kd = kernel_derivatives(k, x, y);
  const Eigen::VectorXd sx = target.score(x);
  const Eigen::VectorXd sy = target.score(y);
  return sx.dot(sy) * kv + sy.dot(kd.grad_x) + sx.dot(kd.grad_y) + kd.mixed_trace;
}

namespace detail {

// K0 block for row points xa against column points xb with scores sa, sb.
// Every pairwise term reduces to a rank-d product plus rank-one updates:
//   K0      = exp(-g R2) .* (sa sb' + 2g T + 2g d - 4 g^2 R2)
//   T(a,b)  = <s_a - s_b, x_a - x_b>
//           = <s_a, x_a> + <s_b, x_b> - (sa xb')(a,b) - (xa sb')(a,b)
//   R2(a,b) = |x_a|^2 + |x_b|^2 - 2 (xa xb')(a,b), clamped at 0.
// Each entry depends only on its own pair of rows, so blocks assembled in any
// partition agree bit for bit.
[[nodiscard]] inline Eigen::MatrixXd stein_block(const GaussianKernel& k, const Eigen::MatrixXd& xa,
                                                 const Eigen::MatrixXd& sa,
                                                 const Eigen::MatrixXd& xb,
                                                 const Eigen::MatrixXd& sb) {
  const double g = k.gamma();
  const Eigen::VectorXd na = xa.rowwise().squaredNorm();
  const Eigen::VectorXd nb = xb.rowwise().squaredNorm();
  const Eigen::VectorXd ua = (sa.array() * xa.array()).rowwise().sum();
  const Eigen::VectorXd ub = (sb.array() * xb.array()).rowwise().sum();

  Eigen::MatrixXd r2;
  r2.noalias() = -2.0 * (xa * xb.transpose());
  r2.colwise() += na;
  r2.rowwise() += nb.transpose();
  r2 = r2.cwiseMax(0.0);

  Eigen::MatrixXd t;
  t.noalias() = -(sa * xb.transpose());
  t.noalias() -= xa * sb.transpose();
  t.colwise() += ua;
  t.rowwise() += ub.transpose();

  Eigen::MatrixXd k0;
  k0.noalias() = sa * sb.transpose();
  const double g2 = 2.0 * g;
  const double trace0 = 2.0 * g * k.dim();
  const double quad = 4.0 * g * g;
  k0 = ((-g * r2.array()).exp() * (k0.array() + g2 * t.array() + trace0 - quad * r2.array()))
           .matrix();
  return k0;
}

inline constexpr Eigen::Index kSteinBlockRows = 256;

}  // namespace detail

// Gram views of the Stein kernel over a sample.
struct SteinGram {
  Eigen::MatrixXd full;                     // n x n, exactly symmetric
  std::optional<Eigen::MatrixXd> cross;     // m x n; row a is K0(landmark_a, x_b)
  std::optional<Eigen::MatrixXd> landmark;  // m x m over the landmark multiset
};

// Assembles the full Gram matrix, plus the landmark cross and square blocks
// when landmark indices are given (duplicates allowed). The upper triangle is
// computed once and mirrored, and block partials do not interact, so the
// result is identical for every thread count.
[[nodiscard]] inline SteinGram stein_gram(const GaussianMeasure& target, const GaussianKernel& k,
                                          const SampleSet& samples,
                                          const std::vector<Eigen::Index>* landmarks = nullptr,
                                          int threads = 1) {
  validate(samples);
  if (target.dim() != k.dim() || samples.dim() != k.dim())
    throw input_error("stein_gram: dimension mismatch");
  const Eigen::Index n = samples.n();
  const Eigen::MatrixXd& x = samples.data;
  const Eigen::MatrixXd s = target.scores(x);

  SteinGram gram;
  gram.full.resize(n, n);
  const Eigen::Index block = detail::kSteinBlockRows;
  const Eigen::Index nblocks = (n + block - 1) / block;
  parallel_for(0, nblocks, threads, [&](std::int64_t bi) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(bi) * block;
    const Eigen::Index rows = std::min(block, n - r0);
    const Eigen::Index cols = n - r0;
    gram.full.block(r0, r0, rows, cols) =
        detail::stein_block(k, x.middleRows(r0, rows), s.middleRows(r0, rows), x.bottomRows(cols),
                            s.bottomRows(cols));
  });
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) gram.full(i, j) = gram.full(j, i);
  }

  if (landmarks != nullptr) {
    const Eigen::Index m = static_cast<Eigen::Index>(landmarks->size());
    if (m < 1) throw input_error("stein_gram: landmark multiset must be nonempty when given");
    Eigen::MatrixXd xl(m, x.cols());
    Eigen::MatrixXd sl(m, x.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index idx = (*landmarks)[static_cast<std::size_t>(i)];
      if (idx < 0 || idx >= n) throw input_error("stein_gram: landmark index out of range");
      xl.row(i) = x.row(idx);
      sl.row(i) = s.row(idx);
    }
    gram.cross = detail::stein_block(k, xl, sl, x, s);
    gram.landmark = detail::stein_block(k, xl, sl, xl, sl);
  }
  return gram;
}

}  // namespace ksd
