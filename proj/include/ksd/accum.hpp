#pragma once

#include <cmath>

namespace ksd {

// Neumaier compensated accumulator. Keeps the running-sum error near one ulp
// of the true sum regardless of term count, which makes reductions agree
// across summation orders at double precision.
struct Accumulator {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  [[nodiscard]] double total() const { return sum + comp; }
};

}  // namespace ksd
