#ifndef TBSPEC_PARALLEL_HPP
#define TBSPEC_PARALLEL_HPP

#include <exception>
#include <mutex>

namespace tbspec {

// Runs body(i) for i in [0, n), in parallel when OpenMP is available.
// Each index writes its own output slot, so results do not depend on the
// thread count. The first exception thrown by any iteration is rethrown.
template <typename Body>
void parallel_for(long n, Body&& body)
{
  std::exception_ptr err;
  std::mutex mtx;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    {
      std::lock_guard<std::mutex> lk(mtx);
      if (err) continue;
    }
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lk(mtx);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace tbspec

#endif
