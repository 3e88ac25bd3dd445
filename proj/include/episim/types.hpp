#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace episim {

// Dense indices into Population vectors. Raw file identifiers are kept on the
// records themselves; everything downstream works in index space.
using PersonIndex = std::int32_t;
using LocationIndex = std::int32_t;
using VisitIndex = std::int32_t;
using StateIndex = std::int32_t;
using Seconds = std::int32_t;

inline constexpr Seconds kSecondsPerDay = 86400;
inline constexpr int kDaysPerWeek = 7;

// Input file could not be read or tokenized; message carries "path:line".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parsed input violates a documented requirement (bad reference, bad range,
// probabilities that do not normalize, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace episim
