#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ksd/accum.hpp"
#include "ksd/errors.hpp"

namespace ksd {

// Controls the truncated adaptive integration behind the quadrature oracle.
struct QuadratureConfig {
  double truncation_radius = 0.0;  // half-width L of the box [-L, L]^d
  double abs_tol = 1e-9;           // absolute error target for the integral
  int max_subdivisions = 2000;     // bisection budget per axis
};

inline void validate(const QuadratureConfig& cfg) {
  if (!std::isfinite(cfg.truncation_radius) || cfg.truncation_radius <= 0.0)
    throw input_error("QuadratureConfig: truncation_radius must be finite and positive");
  if (!std::isfinite(cfg.abs_tol) || cfg.abs_tol <= 0.0)
    throw input_error("QuadratureConfig: abs_tol must be finite and positive");
  if (cfg.max_subdivisions < 1)
    throw input_error("QuadratureConfig: max_subdivisions must be >= 1");
}

namespace detail {

// Gauss-Kronrod 15(7) on [a, b]: value from the 15-point Kronrod rule, error
// estimated against the embedded 7-point Gauss rule. Standard node and weight
// table; Gauss nodes sit at the odd Kronrod indices plus the center.
template <class F>
inline void gk15(F&& f, double a, double b, double& value, double& error) {
  static constexpr double xgk[8] = {
      0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
      0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
  static constexpr double wgk[8] = {
      0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
      0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
  static constexpr double wg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                                   0.417959183673469};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = wgk[7] * fc;
  double resg = wg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    resk += wgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
  }
  value = resk * h;
  error = std::abs((resk - resg) * h);
}

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

// Adaptive bisection until the summed error estimate drops to abs_tol.
// Throws convergence_error carrying the running estimate when the budget is
// exhausted. The final value re-sums segments sorted by left endpoint, so it
// does not depend on the subdivision history.
//
// edges are the initial panel boundaries, strictly increasing, at least two.
// A single panel spanning far beyond a narrow feature can place every node
// where the integrand vanishes; the rule then reports zero error and the
// feature is never seen. Callers that know a feature scale must grade the
// initial edges around it.
template <class F>
inline double integrate_adaptive(F&& f, const std::vector<double>& edges, double abs_tol,
                                 int max_subdivisions) {
  if (edges.size() < 2) throw input_error("quadrature: need at least two panel edges");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1]))
      throw input_error("quadrature: panel edges must be strictly increasing");
  }
  auto make = [&](double lo, double hi) {
    Segment s;
    s.a = lo;
    s.b = hi;
    gk15(f, lo, hi, s.value, s.error);
    return s;
  };
  std::vector<Segment> segs;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    segs.push_back(make(edges[i], edges[i + 1]));
    total_error += segs.back().error;
  }
  int splits = 0;
  while (total_error > abs_tol) {
    auto worst = std::max_element(
        segs.begin(), segs.end(),
        [](const Segment& x, const Segment& y) { return x.error < y.error; });
    const Segment seg = *worst;
    const double mid = 0.5 * (seg.a + seg.b);
    if (splits >= max_subdivisions || !(seg.a < mid && mid < seg.b)) {
      Accumulator est;
      for (const Segment& s : segs) est.add(s.value);
      throw convergence_error("quadrature: subdivision budget exhausted before reaching abs_tol",
                              est.total(), total_error);
    }
    segs.erase(worst);
    total_error -= seg.error;
    const Segment left = make(seg.a, mid);
    const Segment right = make(mid, seg.b);
    total_error += left.error + right.error;
    segs.push_back(left);
    segs.push_back(right);
    ++splits;
  }
  std::sort(segs.begin(), segs.end(),
            [](const Segment& x, const Segment& y) { return x.a < y.a; });
  Accumulator acc;
  for (const Segment& s : segs) acc.add(s.value);
  return acc.total();
}

template <class F>
inline double integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                 int max_subdivisions) {
  return integrate_adaptive(std::forward<F>(f), std::vector<double>{a, b}, abs_tol,
                            max_subdivisions);
}

}  // namespace detail
}  // namespace ksd
