// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>

#include "avoco/matrix.hpp"

namespace avoco {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences: g_i = (f(x + h e_i) - f(x - h e_i)) / (2h).
/// Throws ParameterError for h <= 0 and NumericError when f returns a
/// non-finite value.
Vector finite_difference_gradient(const ScalarFunction& f, std::span<const double> point, double step);

/// Norm-wise relative error max_i |a_i - b_i| / max(max|a|, max|b|).
/// Returns 0 when both are identically zero.
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

}  // namespace avoco
