#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "ksd/errors.hpp"

namespace ksd {

// Isotropic Gaussian kernel k(x, y) = exp(-gamma |x - y|^2) on R^d.
// Immutable after construction.
class GaussianKernel {
 public:
  GaussianKernel(double gamma, int dim) : gamma_(gamma), dim_(dim) {
    if (!std::isfinite(gamma) || gamma <= 0.0)
      throw input_error("GaussianKernel: gamma must be finite and positive");
    if (dim < 1) throw input_error("GaussianKernel: dim must be >= 1");
  }

  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] int dim() const noexcept { return dim_; }

 private:
  double gamma_;
  int dim_;
};

namespace detail {

inline void check_point(const GaussianKernel& k, const Eigen::VectorXd& x, const char* name) {
  if (x.size() != k.dim())
    throw input_error(std::string(name) + ": size does not match the kernel dimension");
  if (!x.allFinite()) throw input_error(std::string(name) + ": entries must be finite");
}

}  // namespace detail

// 0 < k(x, y) <= 1, with equality iff x = y.
[[nodiscard]] inline double kernel_eval(const GaussianKernel& k, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& y) {
  detail::check_point(k, x, "kernel_eval: x");
  detail::check_point(k, y, "kernel_eval: y");
  return std::exp(-k.gamma() * (x - y).squaredNorm());
}

// First derivatives and the mixed second-derivative trace of the kernel:
//   dk/dx_j             = -2 gamma (x_j - y_j) k(x, y)
//   dk/dy_j             = +2 gamma (x_j - y_j) k(x, y)
//   sum_j d2k/dx_j dy_j = (2 gamma d - 4 gamma^2 |x - y|^2) k(x, y)
// At x = y the trace is exactly 2 gamma d.
struct KernelDerivatives {
  Eigen::VectorXd grad_x;
  Eigen::VectorXd grad_y;
  double mixed_trace = 0.0;
};

[[nodiscard]] inline KernelDerivatives kernel_derivatives(const GaussianKernel& k,
                                                          const Eigen::VectorXd& x,
                                                          const Eigen::VectorXd& y) {
  detail::check_point(k, x, "kernel_derivatives: x");
  detail::check_point(k, y, "kernel_derivatives: y");
  const double g = k.gamma();
  const Eigen::VectorXd diff = x - y;
  const double kv = std::exp(-g * diff.squaredNorm());
  KernelDerivatives d;
  d.grad_x = -2.0 * g * kv * diff;
  d.grad_y = 2.0 * g * kv * diff;
  d.mixed_trace = (2.0 * g * k.dim() - 4.0 * g * g * diff.squaredNorm()) * kv;
  return d;
}

// Bochner spectral density of the kernel at frequency w:
//   (4 pi gamma)^{-d/2} exp(-|w|^2 / (4 gamma)).
// Strictly positive on all of R^d and integrates to k(x, x) = 1, so the
// kernel is characteristic.
[[nodiscard]] inline double spectral_density(const GaussianKernel& k, const Eigen::VectorXd& omega) {
  detail::check_point(k, omega, "spectral_density: omega");
  const double g = k.gamma();
  return std::pow(4.0 * std::numbers::pi * g, -0.5 * k.dim()) *
         std::exp(-omega.squaredNorm() / (4.0 * g));
}

}  // namespace ksd
