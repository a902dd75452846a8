#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace csf {

// Deterministic RNG wrapper. All randomness in the library goes through this
// so results are reproducible across standard library implementations
// (std::uniform_*_distribution is not portable bit-for-bit).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1)
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // uniform integer in [0, n)
  int below(int n) { return static_cast<int>(unit() * n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[below(i + 1)]);
    }
  }

  // k distinct values from [0, n), order as drawn
  std::vector<int> sample_without_replacement(int n, int k);

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

// Shortest decimal form that round-trips a 64-bit double exactly.
std::string format_double(double v);

// Runs fn(0..n-1) on a pool of worker threads. Pool size comes from the
// CSF_THREADS environment variable when set, else hardware concurrency.
// Tasks must not share mutable state except through their own index.
void parallel_for_indexed(std::size_t n, const std::function<void(std::size_t)>& fn);

int worker_pool_size();

}  // namespace csf
