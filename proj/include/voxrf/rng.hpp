#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

#include "voxrf/common.hpp"

namespace voxrf {

// Deterministic generator with explicit stream derivation. Results are
// identical across platforms and thread counts because every consumer owns a
// stream keyed by (seed, purpose, index) instead of sharing one sequence.
class Rng {
 public:
  Rng() : Rng(0, "default") {}

  Rng(uint64_t seed, std::string_view purpose, uint64_t index = 0) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the purpose tag
    for (char c : purpose) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    uint64_t x = seed;
    x = splitmix(x ^ h);
    x = splitmix(x ^ index);
    s0_ = splitmix(x);
    s1_ = splitmix(x);
    if (s0_ == 0 && s1_ == 0) s1_ = 1;
  }

  // xoroshiro128++
  uint64_t next_u64() {
    uint64_t a = s0_, b = s1_;
    uint64_t r = rotl(a + b, 17) + a;
    b ^= a;
    s0_ = rotl(a, 49) ^ b ^ (b << 21);
    s1_ = rotl(b, 28);
    return r;
  }

  uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection-free 128-bit multiply-shift.
  uint64_t next_below(uint64_t n) {
    if (n == 0) throw ValidationError("next_below requires n > 0");
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  Vec3 next_in_box(const Vec3& lo, const Vec3& hi) {
    return {lo.x + next_double() * (hi.x - lo.x), lo.y + next_double() * (hi.y - lo.y),
            lo.z + next_double() * (hi.z - lo.z)};
  }

 private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  static uint64_t splitmix(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static uint64_t splitmix(uint64_t&& seed) {
    uint64_t s = seed;
    return splitmix(s);
  }

  uint64_t s0_, s1_;
};

}  // namespace voxrf
