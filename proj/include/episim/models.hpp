#pragma once

// Contact and transmission models.
//
// Contact: at a location whose peak daily occupancy is N, a co-present pair
// is in contact with probability
//
//     c = min{ 1, [A + (B - A) * (1 - e^{-N / alpha})] / (N - 1) }
//
// i.e. the expected number of distinct contacts per person saturates from A
// toward B as the location gets busier, and is divided among the N - 1
// possible partners. Locations with N < 2 use c = 1 (a degenerate "pair is
// the whole crowd" case). An older variant multiplied the terms instead of
// adding them; it is kept behind `product_numerator` for comparison runs.
// A fixed global probability is available as a baseline mode.
//
// Transmission: a contact of duration T seconds between susceptible i and
// infectious j contributes propensity
//
//     rho = T * tau * b_sus(i) * sus(state_i) * b_inf(j) * inf(state_j)
//
// and person i converts the day's total propensity A into an infection
// probability 1 - e^{-A}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include "episim/types.hpp"

namespace episim {

struct ContactModel {
  enum class Kind { kMinMaxAlpha, kGlobal };

  Kind kind = Kind::kMinMaxAlpha;
  double min_contacts = 5.0;   // A, floor of expected contacts
  double max_contacts = 40.0;  // B, saturation ceiling
  double alpha = 1000.0;       // occupancy scale of the saturation
  double global_probability = 0.0;
  bool product_numerator = false;  // legacy A * (B - A) * (1 - e^{-N/alpha})

  void validate() const {
    if (kind == Kind::kGlobal) {
      if (!(global_probability >= 0.0 && global_probability <= 1.0))
        throw ValidationError("global contact probability must be in [0, 1]");
      return;
    }
    if (!(min_contacts >= 0.0) || !std::isfinite(min_contacts))
      throw ValidationError("contact model: min contacts must be >= 0");
    if (!(max_contacts >= min_contacts) || !std::isfinite(max_contacts))
      throw ValidationError("contact model: max contacts must be >= min contacts");
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw ValidationError("contact model: alpha must be > 0");
  }

  // Per-pair contact probability for a location with peak occupancy n.
  double probability(double n) const {
    if (kind == Kind::kGlobal) return global_probability;
    if (n < 2.0) return 1.0;
    const double saturation = 1.0 - std::exp(-n / alpha);
    const double numerator =
        product_numerator
            ? min_contacts * (max_contacts - min_contacts) * saturation
            : min_contacts + (max_contacts - min_contacts) * saturation;
    return std::min(1.0, numerator / (n - 1.0));
  }
};

// Contribution of one contact to the target's daily infection pressure.
inline double propensity(double duration_seconds, double tau,
                         double target_beta_sus, double target_sus,
                         double source_beta_inf, double source_inf) {
  return duration_seconds * tau * target_beta_sus * target_sus *
         source_beta_inf * source_inf;
}

inline double infection_probability(double total_propensity) {
  return 1.0 - std::exp(-total_propensity);
}

// One susceptible-infectious contact, emitted by the per-location sweep and
// delivered to the target person's partition for the end-of-day update.
struct ExposureRecord {
  PersonIndex target = -1;
  PersonIndex source = -1;
  LocationIndex location = -1;
  Seconds overlap_start = 0;  // when the two visits began overlapping
  double duration = 0.0;      // seconds of co-presence, always > 0
  double propensity = 0.0;

  friend bool operator==(const ExposureRecord&, const ExposureRecord&) = default;
};

// Deterministic accumulation order for records of one target. Records are
// identical across partition layouts, so sorting before summation pins the
// floating-point result bit-for-bit.
inline bool exposure_order(const ExposureRecord& a, const ExposureRecord& b) {
  return std::tie(a.source, a.overlap_start, a.location, a.duration) <
         std::tie(b.source, b.overlap_start, b.location, b.duration);
}

// Order used when records for many targets are accumulated in one pass;
// groups by target first, then matches exposure_order within the group.
inline bool exposure_order_by_target(const ExposureRecord& a,
                                     const ExposureRecord& b) {
  if (a.target != b.target) return a.target < b.target;
  return exposure_order(a, b);
}

// Total infection pressure for one person-day. All records must share one
// target; summation happens in exposure_order regardless of input order.
inline double total_propensity(std::vector<ExposureRecord> records) {
  if (records.empty()) return 0.0;
  for (const ExposureRecord& record : records)
    if (record.target != records.front().target)
      throw std::logic_error("total_propensity: records target different people");
  std::sort(records.begin(), records.end(), exposure_order);
  double total = 0.0;
  for (const ExposureRecord& record : records) total += record.propensity;
  return total;
}

}  // namespace episim
