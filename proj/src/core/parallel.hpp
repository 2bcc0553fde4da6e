#pragma once

#include <cstddef>
#include <functional>

namespace authdrift {

inline constexpr const char* kThreadsEnvVar = "AUTHDRIFT_THREADS";

// AUTHDRIFT_THREADS if set and positive, else hardware concurrency.
std::size_t ThreadCount();

// Runs body(i) for every i in [0, n), even after a failure, so the exception
// rethrown (the one from the lowest failing index) does not depend on timing.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace authdrift
