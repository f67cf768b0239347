// SPDX-License-Identifier: Apache-2.0
#include "avoco/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avoco/error.hpp"

namespace avoco {

Vector finite_difference_gradient(const ScalarFunction& f, std::span<const double> point, double step) {
  if (!(step > 0.0)) throw ParameterError("finite-difference step must be positive");
  Vector x(point.begin(), point.end());
  Vector g(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double plus = f(x);
    x[i] = saved - step;
    const double minus = f(x);
    x[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("function not finite around coordinate " + std::to_string(i));
    }
    g[i] = (plus - minus) / (2.0 * step);
  }
  return g;
}

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) throw ShapeError("relative_error: length mismatch");
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  if (scale == 0.0) return 0.0;
  return diff / scale;
}

}  // namespace avoco
