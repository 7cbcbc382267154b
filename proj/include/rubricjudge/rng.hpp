#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace rubricjudge {

// Deterministic counter-based randomness shared by the mock judge, the
// perturbation operators, corpus sampling, and the bootstrap. The generator
// is fully specified here so that an independent implementation reproduces
// every draw:
//
//   key      = FNV-1a 64 over the UTF-8 key parts joined with byte 0x1F
//   draw(n)  = splitmix64_mix(key + (n + 1) * 0x9E3779B97F4A7C15), n = 0,1,...
//   double   = (draw >> 11) * 2^-53, uniform in [0, 1)
//   below(m) = draw % m
//
// where splitmix64_mix is the standard SplitMix64 finalizer
// (xor-shift 30, * 0xBF58476D1CE4E5B9, xor-shift 27, * 0x94D049BB133111EB,
// xor-shift 31).

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // Key parts are joined with 0x1F before hashing; integers are rendered in
  // decimal by callers.
  static CounterRng keyed(std::initializer_list<std::string_view> parts) {
    std::uint64_t h = kFnvOffset;
    bool first = true;
    for (std::string_view p : parts) {
      if (!first) {
        h ^= 0x1F;
        h *= kFnvPrime;
      }
      first = false;
      h = fnv1a64(p, h);
    }
    return CounterRng(h);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (counter_ + 1) * 0x9E3779B97F4A7C15ULL;
    ++counter_;
    return splitmix64_mix(z);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, m). Modulo reduction on a 64-bit draw; bias is
  // negligible for the small m used here and keeps the draw replayable.
  std::uint64_t next_below(std::uint64_t m) { return next_u64() % m; }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline std::string to_hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace rubricjudge
