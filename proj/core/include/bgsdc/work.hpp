#pragma once

#include <cstdint>

namespace bgsdc {

/// Number of force-evaluation equivalents spent. One field sample at a new
/// position and one application of the Boris trick both count as one.
struct WorkCounter {
  std::int64_t f_evals = 0;

  void add(std::int64_t n = 1) { f_evals += n; }
};

inline void count(WorkCounter* counter, std::int64_t n = 1) {
  if (counter != nullptr) counter->add(n);
}

}  // namespace bgsdc
