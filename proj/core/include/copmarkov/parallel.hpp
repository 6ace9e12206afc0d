#pragma once

#include <cstddef>

namespace copmarkov {

/// Upper bound on worker threads used by the likelihood evaluators (default 1).
void set_worker_threads(std::size_t count);
std::size_t worker_threads();

}  // namespace copmarkov
