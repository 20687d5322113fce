#pragma once

#include <cstdint>
#include <string_view>

namespace oscmfg {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter, lane), so paths do not depend on N or on the order
// in which oscillators are visited.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t bits(std::uint64_t counter, std::uint32_t lane = 0) const;
  // Uniform on [0, 1).
  double uniform(std::uint64_t counter, std::uint32_t lane = 0) const;
  // Standard normal via Box-Muller on lanes 0 and 1 of the counter.
  double gaussian(std::uint64_t counter) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
};

// A family of streams sharing one seed; stream i belongs to oscillator or
// particle i.
struct NoiseSource {
  std::uint64_t seed = 0;

  double gaussian(std::uint64_t stream, std::uint64_t counter) const {
    return RandomStream(seed, stream).gaussian(counter);
  }
};

std::uint64_t splitmix64(std::uint64_t x);

// Child seed for a named purpose, so that e.g. initial phases and Wiener
// increments of the same run never share draws.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

}  // namespace oscmfg
