#pragma once

#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>

namespace bicr::detail {

// Exceptions must not leave an OpenMP region. Loop bodies report them here and
// the caller rethrows after the region; the lowest iteration index wins so the
// surfaced error does not depend on scheduling.
class ParallelErrors {
 public:
  template <class Body>
  void run(std::size_t index, Body&& body) noexcept {
    try {
      body();
    } catch (...) {
      const std::lock_guard<std::mutex> lock(mutex_);
      if (index < index_) {
        index_ = index;
        error_ = std::current_exception();
      }
    }
  }

  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::size_t index_ = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error_;
};

}  // namespace bicr::detail
