#pragma once

// Helpers shared by the likelihood translation units; not installed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace copmarkov::detail {

/// Sum that does not depend on the order of `values`: sorted, then
/// Neumaier-compensated.
inline double ordered_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

/// Runs body(begin, end) over contiguous chunks of [0, count) on up to
/// worker_threads() threads. Exceptions are rethrown on the calling thread.
void parallel_chunks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t)>& body);

inline constexpr double kProbabilityFloor = 1.0e-300;

}  // namespace copmarkov::detail
