// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MCOMP_PARALLEL_HPP_
#define MCOMP_PARALLEL_HPP_

#include <algorithm>
#include <cstdint>
#include <exception>
#include <random>
#include <thread>
#include <vector>

namespace mcomp {

// Runs body(i) for i in [0, count) on up to `threads` workers, each owning a
// contiguous block.  Callers write results into per-index slots and reduce
// serially, so output does not depend on the thread count.  The first
// exception thrown by any worker is rethrown.
template <class Body>
void parallel_for(std::int64_t count, int threads, Body&& body) {
  if (count <= 0) return;
  const std::int64_t workers =
      std::clamp<std::int64_t>(threads, 1, count);
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::int64_t w = 0; w < workers; ++w) {
    const std::int64_t begin = count * w / workers;
    const std::int64_t end = count * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        for (std::int64_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Independent generator for (seed, stream), e.g. one per replicate.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x6d63u};
  return std::mt19937_64(seq);
}

}  // namespace mcomp

#endif  // MCOMP_PARALLEL_HPP_
