#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "ksd/accum.hpp"
#include "ksd/errors.hpp"
#include "ksd/estimators.hpp"
#include "ksd/gaussian.hpp"
#include "ksd/kernel.hpp"
#include "ksd/oracle.hpp"
#include "ksd/parallel.hpp"
#include "ksd/rng.hpp"
#include "ksd/sample.hpp"

namespace ksd {

// Two-point alternative for the lower-bound construction: the null N(0, I_d)
// against a mean shift of size rho along one coordinate axis.
struct AdversarialPair {
  GaussianMeasure p1;  // N(rho * e_axis, I_d)
  GaussianMeasure p0;  // N(0, I_d)
  double rho = 0.0;
  int axis = 1;  // 1-based
};

// Builds the pair with rho = n^{-1/2}.
[[nodiscard]] inline AdversarialPair adversarial_pair(std::int64_t n, int d, int axis_j = 1) {
  if (n < 1) throw input_error("adversarial_pair: n must be >= 1");
  if (d < 1) throw input_error("adversarial_pair: d must be >= 1");
  if (axis_j < 1 || axis_j > d) throw input_error("adversarial_pair: axis out of range");
  const double rho = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  mean[axis_j - 1] = rho;
  return AdversarialPair{GaussianMeasure(mean, Eigen::MatrixXd::Identity(d, d)),
                         GaussianMeasure::standard(d), rho, axis_j};
}

// KL(N(mu1, sigma1) || N(mu0, sigma0)) =
//   [tr(sigma0^{-1} sigma1) - d + quad + ln det sigma0 - ln det sigma1] / 2.
// The trace term is computed as tr(sigma0^{-1} (sigma1 - sigma0)) so equal
// covariances cancel exactly instead of through a d - d difference.
[[nodiscard]] inline double kl_gaussians(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1,
                                         const Eigen::VectorXd& mu0,
                                         const Eigen::MatrixXd& sigma0) {
  const Eigen::Index d = mu1.size();
  if (d < 1) throw input_error("kl_gaussians: dimension must be >= 1");
  if (mu0.size() != d || sigma1.rows() != d || sigma1.cols() != d || sigma0.rows() != d ||
      sigma0.cols() != d)
    throw input_error("kl_gaussians: dimension mismatch");
  const GaussianMeasure g1(mu1, sigma1);  // validates SPD
  const GaussianMeasure g0(mu0, sigma0);
  const Eigen::LLT<Eigen::MatrixXd> llt0(sigma0);
  const Eigen::LLT<Eigen::MatrixXd> llt1(sigma1);
  if (llt0.info() != Eigen::Success || llt1.info() != Eigen::Success)
    throw model_error("kl_gaussians: covariance is not positive definite");
  const double tr_minus_d = llt0.solve((sigma1 - sigma0).eval()).trace();
  const Eigen::VectorXd diff = mu0 - mu1;
  const double quad = diff.dot(llt0.solve(diff));
  const double logdet_ratio = 2.0 * (llt0.matrixLLT().diagonal().array().log().sum() -
                                     llt1.matrixLLT().diagonal().array().log().sum());
  return 0.5 * (tr_minus_d + quad + logdet_ratio);
}

// KL divergence of n-fold product measures: n * kl_single.
[[nodiscard]] inline double kl_product(std::int64_t n, double kl_single) {
  if (n < 1) throw input_error("kl_product: n must be >= 1");
  if (!(kl_single >= 0.0)) throw input_error("kl_product: kl_single must be >= 0");
  return static_cast<double>(n) * kl_single;
}

// Two-point testing-risk floor at KL budget alpha:
//   max(exp(-alpha)/4, (1 - sqrt(alpha/2))/2).
// Non-increasing in alpha with values in (0, 1/2].
[[nodiscard]] inline double le_cam_bound(double alpha) {
  if (!(alpha >= 0.0)) throw input_error("le_cam_bound: alpha must be >= 0");
  const double first = 0.25 * std::exp(-alpha);
  const double second = 0.5 * (1.0 - std::sqrt(0.5 * alpha));
  return std::max(first, second);
}

struct RiskPoint {
  std::int64_t n = 0;
  double mean_abs_error = 0.0;
  double std_error = 0.0;
  int reps = 0;
  EstimatorMethod method = EstimatorMethod::v_statistic;
};

struct RiskCurve {
  std::vector<RiskPoint> rows;
};

inline void validate(const RiskCurve& curve) {
  std::int64_t prev = 0;
  for (const RiskPoint& row : curve.rows) {
    if (row.n <= prev) throw input_error("risk curve: n must be strictly increasing");
    if (row.reps < 2) throw input_error("risk curve: reps must be >= 2");
    if (!(row.std_error >= 0.0)) throw input_error("risk curve: std_error must be >= 0");
    prev = row.n;
  }
}

struct SweepOptions {
  int landmarks = 0;       // 0: ceil(sqrt(n)) per grid point
  double rel_tol = 1e-10;  // low-rank pseudo-inverse cutoff
  int threads = 1;
};

// Monte Carlo risk of an estimator against the closed-form reference: for
// each n, draws `reps` samples of size n from p_true, estimates
// KSD(target, .), and records mean and standard error of the absolute error.
// Replication r of grid point n uses the stream derive_seed(base_seed, n, r)
// for both the sample and, for the low-rank method, the landmark draw, so
// the curve is reproducible for any thread count.
[[nodiscard]] inline RiskCurve risk_sweep(const GaussianMeasure& target, const GaussianKernel& k,
                                          const GaussianMeasure& p_true,
                                          const std::vector<std::int64_t>& n_grid, int reps,
                                          EstimatorMethod method, std::uint64_t base_seed,
                                          const SweepOptions& opts = {}) {
  if (n_grid.empty()) throw input_error("risk_sweep: n_grid must be nonempty");
  std::int64_t prev = 0;
  for (std::int64_t n : n_grid) {
    if (n <= prev) throw input_error("risk_sweep: n_grid must be strictly increasing and >= 1");
    prev = n;
  }
  if (reps < 2) throw input_error("risk_sweep: reps must be >= 2");
  if (opts.landmarks < 0) throw input_error("risk_sweep: landmarks must be >= 0");
  if (target.dim() != k.dim() || p_true.dim() != k.dim())
    throw input_error("risk_sweep: dimension mismatch between target, kernel, and p_true");
  if (!target.is_standard())
    throw input_error("risk_sweep: closed-form reference requires the standard Gaussian target");

  const double oracle =
      ksd_gaussian_closed_form(k.gamma(), k.dim(), p_true.mean(), p_true.covariance());

  RiskCurve curve;
  curve.rows.reserve(n_grid.size());
  for (std::int64_t n : n_grid) {
    std::vector<double> errs(static_cast<std::size_t>(reps));
    parallel_for(0, reps, opts.threads, [&](std::int64_t r) {
      Rng rng(derive_seed(base_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)));
      const SampleSet s = sample_gaussian(p_true, n, rng);
      EstimatorResult est;
      if (method == EstimatorMethod::v_statistic) {
        est = ksd_v_statistic(target, k, s);
      } else {
        const Eigen::Index m = opts.landmarks > 0
                                   ? opts.landmarks
                                   : static_cast<Eigen::Index>(
                                         std::ceil(std::sqrt(static_cast<double>(n))));
        est = ksd_nystrom(target, k, s, m, rng, opts.rel_tol);
      }
      errs[static_cast<std::size_t>(r)] = std::abs(est.ksd - oracle);
    });

    Accumulator mean_acc;
    for (double e : errs) mean_acc.add(e);
    const double mean = mean_acc.total() / reps;
    Accumulator var_acc;
    for (double e : errs) var_acc.add((e - mean) * (e - mean));
    const double std_error = std::sqrt(var_acc.total() / (reps - 1) / reps);

    curve.rows.push_back(RiskPoint{n, mean, std_error, reps, method});
  }
  validate(curve);
  return curve;
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares of log(mean_abs_error) on log(n).
[[nodiscard]] inline RateFit rate_fit(const RiskCurve& curve) {
  validate(curve);
  const std::size_t m = curve.rows.size();
  if (m < 2) throw input_error("rate_fit: need at least 2 rows");
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(curve.rows[i].mean_abs_error > 0.0))
      throw input_error("rate_fit: mean_abs_error must be positive");
    xs[i] = std::log(static_cast<double>(curve.rows[i].n));
    ys[i] = std::log(curve.rows[i].mean_abs_error);
  }
  Accumulator xa, ya;
  for (std::size_t i = 0; i < m; ++i) {
    xa.add(xs[i]);
    ya.add(ys[i]);
  }
  const double xbar = xa.total() / static_cast<double>(m);
  const double ybar = ya.total() / static_cast<double>(m);
  Accumulator sxx, sxy;
  for (std::size_t i = 0; i < m; ++i) {
    sxx.add((xs[i] - xbar) * (xs[i] - xbar));
    sxy.add((xs[i] - xbar) * (ys[i] - ybar));
  }
  if (!(sxx.total() > 0.0)) throw input_error("rate_fit: n values must not be all equal");
  const double slope = sxy.total() / sxx.total();
  return RateFit{slope, ybar - slope * xbar};
}

}  // namespace ksd
