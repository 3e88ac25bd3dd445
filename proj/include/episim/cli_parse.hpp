#pragma once

// Parsers for the compact flag syntaxes: --synthetic, --contact-model, and
// --seeding. Kept separate from the CLI wiring so they are unit-testable.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "episim/engine.hpp"
#include "episim/models.hpp"
#include "episim/population.hpp"
#include "episim/types.hpp"

namespace episim::cli {

namespace detail {

inline std::vector<std::string_view> split(std::string_view text, char separator) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == separator) {
      parts.push_back(text.substr(begin, i - begin));
      begin = i + 1;
    }
  }
  return parts;
}

inline double parse_double(std::string_view text, const std::string& what) {
  double value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError(what + ": '" + std::string(text) + "' is not a number");
  return value;
}

inline std::int64_t parse_int(std::string_view text, const std::string& what) {
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError(what + ": '" + std::string(text) + "' is not an integer");
  return value;
}

}  // namespace detail

// "WxH,people[,visits_per_day,hops]" or a named preset. Presets follow the
// ~4 people per location, 280k-people-per-unit scale used in benchmarking.
inline SyntheticConfig parse_synthetic_spec(std::string_view spec) {
  SyntheticConfig config;
  if (spec == "1x-scaled") {
    config.grid_width = 350;
    config.grid_height = 200;
    config.people_count = 280000;
    return config;
  }
  if (spec == "2x-scaled") {
    config.grid_width = 400;
    config.grid_height = 350;
    config.people_count = 560000;
    return config;
  }
  if (spec == "4x-scaled") {
    config.grid_width = 560;
    config.grid_height = 500;
    config.people_count = 1120000;
    return config;
  }
  const auto parts = detail::split(spec, ',');
  if (parts.size() != 2 && parts.size() != 4)
    throw ValidationError(
        "--synthetic expects WxH,people[,visits_per_day,hops] or a preset name");
  const auto grid = detail::split(parts[0], 'x');
  if (grid.size() != 2)
    throw ValidationError("--synthetic: grid must be WxH, e.g. 100x100");
  config.grid_width = static_cast<int>(detail::parse_int(grid[0], "--synthetic width"));
  config.grid_height = static_cast<int>(detail::parse_int(grid[1], "--synthetic height"));
  config.people_count = detail::parse_int(parts[1], "--synthetic people");
  if (parts.size() == 4) {
    config.lambda_visits = detail::parse_double(parts[2], "--synthetic visits_per_day");
    config.lambda_hops = detail::parse_double(parts[3], "--synthetic hops");
  }
  return config;
}

// "minmax:A,B,alpha" or "global:p".
inline ContactModel parse_contact_spec(std::string_view spec) {
  ContactModel model;
  const auto colon = spec.find(':');
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view rest =
      colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (kind == "minmax") {
    const auto parts = detail::split(rest, ',');
    if (parts.size() != 3)
      throw ValidationError("--contact-model minmax expects minmax:A,B,alpha");
    model.kind = ContactModel::Kind::kMinMaxAlpha;
    model.min_contacts = detail::parse_double(parts[0], "--contact-model A");
    model.max_contacts = detail::parse_double(parts[1], "--contact-model B");
    model.alpha = detail::parse_double(parts[2], "--contact-model alpha");
  } else if (kind == "global") {
    if (rest.empty())
      throw ValidationError("--contact-model global expects global:p");
    model.kind = ContactModel::Kind::kGlobal;
    model.global_probability = detail::parse_double(rest, "--contact-model p");
  } else {
    throw ValidationError("--contact-model must start with minmax: or global:");
  }
  model.validate();
  return model;
}

// "count,day_from,day_to".
inline SeedingSchedule parse_seeding_spec(std::string_view spec) {
  const auto parts = detail::split(spec, ',');
  if (parts.size() != 3)
    throw ValidationError("--seeding expects count,day_from,day_to");
  SeedingSchedule schedule;
  schedule.per_day = static_cast<int>(detail::parse_int(parts[0], "--seeding count"));
  schedule.day_from = static_cast<int>(detail::parse_int(parts[1], "--seeding day_from"));
  schedule.day_to = static_cast<int>(detail::parse_int(parts[2], "--seeding day_to"));
  if (schedule.per_day < 0)
    throw ValidationError("--seeding count must be >= 0");
  return schedule;
}

}  // namespace episim::cli
