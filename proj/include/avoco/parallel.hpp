// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

namespace avoco {

/// How a data-parallel kernel runs. kSerial is the reference path; kParallel
/// fans the independent iterations out with OpenMP (when built with it).
/// Every kernel writes results into index-addressed slots and reduces in
/// ascending index order, so both paths produce bit-identical output.
enum class Execution : std::uint8_t { kSerial, kParallel };

/// Calls body(i) for i in [0, n). Bodies must only touch slot i of shared
/// output. Exceptions thrown by a body are rethrown after the loop (the one
/// with the lowest index wins).
template <class Body>
void for_each_index(std::size_t n, Execution exec, Body&& body);

/// Number of worker threads kParallel will use.
int parallel_threads() noexcept;

}  // namespace avoco

#include "avoco/parallel_impl.hpp"
