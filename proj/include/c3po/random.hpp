#pragma once

// Seeded randomness. One base seed per scenario; every consumer draws from
// its own named substream so adding draws in one place never shifts another.
// mt19937_64 output is fixed by the standard and the conversions below avoid
// the implementation-defined std:: distributions, so traces are bit-identical
// across platforms.

#include <cstdint>
#include <random>

namespace c3po {

enum class Substream : std::uint64_t {
  Arrivals = 1,
  ServiceChoice = 2,
  ExecTime = 3,
  ControllerDraw = 4,
  Catalog = 5,
  Replicate = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, Substream stream,
                                 std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ index);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t base, Substream stream, std::uint64_t index = 0)
      : engine_(derive_seed(base, stream, index)) {}

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
  // (0, 1)
  double open_uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace c3po
