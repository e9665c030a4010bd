#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pgcgan {

// Deterministic, serializable PRNG: splitmix64 core with Box-Muller normals.
// Behaves identically on every platform, which keeps training runs, synthesis
// and checkpoint resumes reproducible bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; caches the second draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Independent stream derived from (seed, stream id), e.g. one per class.
  static Rng stream(std::uint64_t seed, std::uint64_t id) {
    Rng mixer(seed ^ (0x8c2f1d7b9e4a6c35ull + id * 0xd1342543de82ef95ull));
    return Rng(mixer.next_u64());
  }

  struct State {
    std::uint64_t state = 0;
    bool has_spare = false;
    double spare = 0.0;
  };

  State save() const { return {state_, has_spare_, spare_}; }
  void restore(const State& s) {
    state_ = s.state;
    has_spare_ = s.has_spare;
    spare_ = s.spare;
  }

 private:
  std::uint64_t state_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pgcgan
