#ifndef TIERSIM_RNG_H_
#define TIERSIM_RNG_H_

#include <cstdint>
#include <random>

namespace tiersim {

// The single seeded source for every stochastic choice in a run.
// mt19937_64's output sequence is fixed by the standard, and the helpers
// below avoid library distributions so runs are bit-reproducible across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // True with probability p (p outside [0, 1] is clamped).
  bool Bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    // 2^64 * p, compared against a uniform 64-bit draw.
    const auto threshold = static_cast<std::uint64_t>(p * 18446744073709551616.0);
    return Next() < threshold;
  }

  // Uniform in [0, n). n must be nonzero.
  std::uint64_t Below(std::uint64_t n) { return Next() % n; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tiersim

#endif  // TIERSIM_RNG_H_
