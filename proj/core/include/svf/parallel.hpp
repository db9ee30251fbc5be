// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace svf {

// Process-wide worker count used by every parallel stage. 0 selects
// std::thread::hardware_concurrency().
void set_num_threads(unsigned n);
unsigned num_threads();

// Splits [0, n) into contiguous chunks, one per worker, and calls
// body(begin, end) for each. Chunk boundaries depend only on n and the
// worker count; body must write to disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace svf
