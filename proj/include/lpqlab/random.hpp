#pragma once

// Counter-based random streams and the trial-parallel driver.
//
// Every Monte Carlo trial draws from its own stream keyed by
// (seed, trial index), so results never depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace lpqlab {

namespace detail {

// MurmurHash3 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-based generator: draw k of stream (seed, index) is a fixed
/// function of (seed, index, k). Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t index)
      : seed_key_(detail::splitmix64(seed)),
        // fmix64 is bijective, so distinct indices give distinct keys.
        index_key_(detail::fmix64(index ^ 0x5851f42d4c957f2dULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t c = counter_++;
    return detail::fmix64(detail::fmix64(c ^ index_key_) + seed_key_);
  }

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t seed_key_;
  std::uint64_t index_key_;
  std::uint64_t counter_ = 0;
};

inline Stream derive_substream(std::uint64_t seed, std::uint64_t trial_index) {
  return Stream(seed, trial_index);
}

/// Worker count used when a caller passes 0.
inline unsigned default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(t) for t in [0, count) on up to `threads` workers and returns the
/// results in index order. The first exception thrown by any trial is
/// rethrown after all workers join.
template <typename Fn>
auto parallel_trials(std::size_t count, unsigned threads, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t t = 0; t < count; ++t) out[t] = fn(t);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= count) return;
      try {
        out[t] = fn(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace lpqlab
