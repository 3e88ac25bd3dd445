#pragma once

// Counter-based random number generation.
//
// Every stochastic decision in the simulator is a pure function of
// (seed, draw site, site-specific identifiers). Nothing keeps generator
// state between decisions, so results cannot depend on thread count,
// partition count, or the order in which work happens to be scheduled.
//
// The block function is Philox 4x64 with 10 rounds. The 256-bit counter is
// laid out as four 64-bit words; word 0 packs the draw-site tag (high 16
// bits) with the simulation day (low 48 bits), and the remaining words hold
// site-specific identifiers:
//
//   site            word 0 (low bits)  word 1        word 2       word 3
//   Contact         day                location      min visit    max visit
//   Infection       day                person        -            -
//   Transition      day                person        -            (stream)
//   Seeding         day                attempt       -            -
//   Suppression     day                name hash     visit        -
//   SyntheticHome   0                  person        -            (stream)
//   SyntheticVisit  day of week        person        -            (stream)
//
// Sites marked (stream) consume consecutive blocks via KeyedStream, which
// places the block sequence number in word 3. The 128-bit key is
// (user seed, fixed project constant).

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "episim/types.hpp"

namespace episim::rng {

enum class Site : std::uint64_t {
  kContact = 1,
  kInfection = 2,
  kTransition = 3,
  kSeeding = 4,
  kSuppression = 5,
  kSyntheticHome = 6,
  kSyntheticVisit = 7,
};

using Block = std::array<std::uint64_t, 4>;

namespace detail {

inline constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;
// Arbitrary non-zero second key word (fractional bits of pi).
inline constexpr std::uint64_t kKeyConstant = 0x243F6A8885A308D3ULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t* hi,
                    std::uint64_t* lo) {
  const unsigned __int128 product =
      static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
  *hi = static_cast<std::uint64_t>(product >> 64);
  *lo = static_cast<std::uint64_t>(product);
}

}  // namespace detail

// One application of the 10-round Philox 4x64 bijection.
inline Block philox4x64(Block counter, std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += detail::kWeyl0;
      key[1] += detail::kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    detail::mulhilo(detail::kMul0, counter[0], &hi0, &lo0);
    detail::mulhilo(detail::kMul1, counter[2], &hi1, &lo1);
    counter = Block{hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
  }
  return counter;
}

inline constexpr std::uint64_t pack_site(Site site, std::uint64_t day) {
  return (static_cast<std::uint64_t>(site) << 48) | (day & 0xFFFFFFFFFFFFULL);
}

inline Block draw_block(std::uint64_t seed, Site site, std::uint64_t day,
                        std::uint64_t a, std::uint64_t b = 0,
                        std::uint64_t c = 0) {
  return philox4x64(Block{pack_site(site, day), a, b, c},
                    {seed, detail::kKeyConstant});
}

// Maps a 64-bit word onto [0, 1) with 53-bit resolution.
inline double to_unit(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Maps a 64-bit word onto [0, n) by fixed-point multiply (bias < n / 2^64).
inline std::uint64_t to_below(std::uint64_t word, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(word) * n) >> 64);
}

inline double draw_unit(std::uint64_t seed, Site site, std::uint64_t day,
                        std::uint64_t a, std::uint64_t b = 0,
                        std::uint64_t c = 0) {
  return to_unit(draw_block(seed, site, day, a, b, c)[0]);
}

inline bool draw_bernoulli(double p, std::uint64_t seed, Site site,
                           std::uint64_t day, std::uint64_t a,
                           std::uint64_t b = 0, std::uint64_t c = 0) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return draw_unit(seed, site, day, a, b, c) < p;
}

// FNV-1a, used to fold names (e.g. intervention names) into a key word.
inline constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const char ch : text) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

// Buffered view over consecutive counter blocks of one draw site, for places
// that need a variable number of words (synthetic generation, transition
// sampling). Word 3 of the counter carries the block sequence number.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, Site site, std::uint64_t day,
              std::uint64_t a, std::uint64_t b = 0)
      : key_{seed, detail::kKeyConstant},
        prefix_{pack_site(site, day), a, b, 0} {}

  std::uint64_t next_u64() {
    if (cursor_ == 4) {
      Block counter = prefix_;
      counter[3] = block_index_++;
      buffer_ = philox4x64(counter, key_);
      cursor_ = 0;
    }
    return buffer_[cursor_++];
  }

  double next_unit() { return to_unit(next_u64()); }

  bool next_bernoulli(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return next_unit() < p;
  }

  // Integer in [0, n) by fixed-point multiply; bias is below n / 2^64, far
  // under anything observable here, and it never rejects (fixed draw count).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Knuth's product method; fine for the small rates used here.
  int next_poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double threshold = std::exp(-lambda);
    int k = 0;
    double product = 1.0;
    do {
      ++k;
      product *= next_unit();
    } while (product > threshold);
    return k - 1;
  }

  double next_exponential(double mean) {
    return -mean * std::log(1.0 - next_unit());
  }

 private:
  std::array<std::uint64_t, 2> key_;
  Block prefix_;
  Block buffer_{};
  std::uint64_t block_index_ = 0;
  int cursor_ = 4;
};

}  // namespace episim::rng
