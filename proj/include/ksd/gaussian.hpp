#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <utility>

#include "ksd/errors.hpp"
#include "ksd/rng.hpp"

namespace ksd {

// Gaussian measure N(mean, cov) with symmetric positive definite covariance.
// The Cholesky factor backs the score and sampling; an exact identity
// covariance takes a fast path without factorization.
class GaussianMeasure {
 public:
  GaussianMeasure(Eigen::VectorXd mean, Eigen::MatrixXd cov)
      : mean_(std::move(mean)), cov_(std::move(cov)) {
    const Eigen::Index d = mean_.size();
    if (d < 1) throw input_error("GaussianMeasure: dimension must be >= 1");
    if (!mean_.allFinite()) throw input_error("GaussianMeasure: mean must be finite");
    if (cov_.rows() != d || cov_.cols() != d)
      throw input_error("GaussianMeasure: covariance must be d x d");
    if (!cov_.allFinite()) throw input_error("GaussianMeasure: covariance must be finite");
    identity_ = cov_.isIdentity(0.0);
    if (!identity_) {
      const double scale = cov_.cwiseAbs().maxCoeff();
      if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale))
        throw model_error("GaussianMeasure: covariance is not symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success)
        throw model_error("GaussianMeasure: covariance eigenvalue check failed");
      const double lmax = es.eigenvalues().maxCoeff();
      if (!(es.eigenvalues().minCoeff() > 1e-10 * std::max(1.0, lmax)))
        throw model_error("GaussianMeasure: covariance is not positive definite");
      llt_.compute(cov_);
      if (llt_.info() != Eigen::Success)
        throw model_error("GaussianMeasure: covariance factorization failed");
    }
  }

  // N(0, I_d).
  [[nodiscard]] static GaussianMeasure standard(int dim) {
    if (dim < 1) throw input_error("GaussianMeasure: dimension must be >= 1");
    return GaussianMeasure(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
  }

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(mean_.size()); }
  [[nodiscard]] const Eigen::VectorXd& mean() const noexcept { return mean_; }
  [[nodiscard]] const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  [[nodiscard]] bool identity_covariance() const noexcept { return identity_; }
  [[nodiscard]] bool is_standard() const { return identity_ && mean_.isZero(0.0); }

  // score(x) = grad log density at x = -cov^{-1} (x - mean).
  [[nodiscard]] Eigen::VectorXd score(const Eigen::VectorXd& x) const {
    if (x.size() != mean_.size()) throw input_error("score: x has the wrong dimension");
    if (!x.allFinite()) throw input_error("score: x must be finite");
    if (identity_) return mean_ - x;
    return -llt_.solve(x - mean_);
  }

  // Scores of a row-per-observation matrix, one score per row.
  [[nodiscard]] Eigen::MatrixXd scores(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != mean_.size())
      throw input_error("scores: column count does not match the dimension");
    Eigen::MatrixXd centered = rows.rowwise() - mean_.transpose();
    if (identity_) return -centered;
    return -llt_.solve(centered.transpose()).transpose();
  }

  // One draw mean + L z with z standard normal and L the lower Cholesky factor.
  [[nodiscard]] Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd z(mean_.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng.normal();
    if (identity_) return mean_ + z;
    return mean_ + llt_.matrixL() * z;
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool identity_ = false;
};

}  // namespace ksd
