#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace ehrcsd {

/// Selects between the OpenMP kernel and its serial reference loop. Both
/// paths compute identical results; the serial one is kept for testing and
/// for nesting inside an already-parallel region.
enum class Execution { serial, parallel };

/// Calls body(i) for i in [0, n). Exceptions thrown by any index are
/// captured and the first one (lowest index) is rethrown after the loop.
template <class Body>
void for_each_index(Execution execution, std::size_t n, Body&& body) {
  if (execution == Execution::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex guard;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first_error = std::current_exception();
      }
    }
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

/// Number of threads an OpenMP region would use.
int max_threads();

} // namespace ehrcsd
