#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "ksd/errors.hpp"
#include "ksd/gaussian.hpp"
#include "ksd/rng.hpp"

namespace ksd {

// n observations of dimension d, one per row.
struct SampleSet {
  Eigen::MatrixXd data;    // n x d
  std::uint64_t seed = 0;  // stream the rows came from; 0 marks external data

  [[nodiscard]] Eigen::Index n() const noexcept { return data.rows(); }
  [[nodiscard]] Eigen::Index dim() const noexcept { return data.cols(); }
};

inline void validate(const SampleSet& s) {
  if (s.n() < 1) throw input_error("SampleSet: need at least one observation");
  if (s.dim() < 1) throw input_error("SampleSet: dimension must be >= 1");
  if (!s.data.allFinite()) throw input_error("SampleSet: entries must be finite");
}

// Draws n i.i.d. rows from p, consuming the stream row by row.
[[nodiscard]] inline SampleSet sample_gaussian(const GaussianMeasure& p, Eigen::Index n, Rng& rng) {
  if (n < 1) throw input_error("sample_gaussian: n must be >= 1");
  SampleSet s;
  s.data.resize(n, p.dim());
  for (Eigen::Index i = 0; i < n; ++i) s.data.row(i) = p.sample(rng).transpose();
  return s;
}

[[nodiscard]] inline SampleSet sample_gaussian(const GaussianMeasure& p, Eigen::Index n,
                                               std::uint64_t seed) {
  Rng rng(seed);
  SampleSet s = sample_gaussian(p, n, rng);
  s.seed = seed;
  return s;
}

}  // namespace ksd
