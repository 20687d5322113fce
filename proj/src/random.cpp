#include "oscmfg/random.hpp"

#include <cmath>
#include <numbers>

namespace oscmfg {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 1))) {}

std::uint64_t RandomStream::bits(std::uint64_t counter, std::uint32_t lane) const {
  std::uint64_t x = key_ ^ splitmix64(counter * 0xA24BAED4963EE407ULL + lane);
  return splitmix64(splitmix64(x) + key_);
}

double RandomStream::uniform(std::uint64_t counter, std::uint32_t lane) const {
  return static_cast<double>(bits(counter, lane) >> 11) * 0x1.0p-53;
}

double RandomStream::gaussian(std::uint64_t counter) const {
  double u1 = 1.0 - uniform(counter, 0);
  double u2 = uniform(counter, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return splitmix64(seed ^ splitmix64(h));
}

}  // namespace oscmfg
