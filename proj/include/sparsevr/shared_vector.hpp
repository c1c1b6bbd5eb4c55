#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

namespace sparsevr {

// The shared iterate z: a d-length array of 64-bit floating words with
// per-coordinate atomic access. Reads never tear and concurrent adds to the
// same coordinate never lose an update; no ordering is guaranteed across
// coordinates.
class SharedVector {
  static_assert(std::atomic<double>::is_always_lock_free,
                "need lock-free 64-bit floating atomics");

 public:
  explicit SharedVector(std::size_t d) : words_(d) {
    for (auto& w : words_) w.store(0.0, std::memory_order_relaxed);
  }

  std::size_t size() const { return words_.size(); }

  double load(std::size_t v,
              std::memory_order mo = std::memory_order_relaxed) const {
    return words_[v].load(mo);
  }

  void store(std::size_t v, double x,
             std::memory_order mo = std::memory_order_relaxed) {
    words_[v].store(x, mo);
  }

  // Atomic read-modify-write add; compare-and-swap retry on the word.
  void add(std::size_t v, double delta) {
    auto& w = words_[v];
    double cur = w.load(std::memory_order_relaxed);
    while (!w.compare_exchange_weak(cur, cur + delta,
                                    std::memory_order_relaxed,
                                    std::memory_order_relaxed)) {
    }
  }

  void assign(std::span<const double> x) {
    for (std::size_t v = 0; v < words_.size(); ++v)
      words_[v].store(x[v], std::memory_order_relaxed);
  }

  // Per-coordinate atomic loads of the whole vector; no cross-coordinate
  // snapshot consistency.
  void read_all(std::span<double> out) const {
    for (std::size_t v = 0; v < words_.size(); ++v)
      out[v] = words_[v].load(std::memory_order_relaxed);
  }

 private:
  std::vector<std::atomic<double>> words_;
};

inline void shared_add(SharedVector& sv, std::size_t v, double delta) {
  sv.add(v, delta);
}

// Per-coordinate atomic loads on a sorted support.
inline void inconsistent_read(const SharedVector& sv,
                              std::span<const std::int32_t> support,
                              std::span<double> out) {
  for (std::size_t t = 0; t < support.size(); ++t)
    out[t] = sv.load(static_cast<std::size_t>(support[t]));
}

}  // namespace sparsevr
