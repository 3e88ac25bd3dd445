#pragma once

// Population data: people, locations, and the weekly visit schedule that
// connects them. Also: loading the three CSV inputs, generating synthetic
// grid populations, and the peak-occupancy precomputation the contact model
// depends on. Loading and generation are single-threaded; once a Population
// is finalized it is treated as read-only by the engine.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "episim/csv.hpp"
#include "episim/rng.hpp"
#include "episim/types.hpp"

namespace episim {

struct Person {
  std::int64_t id = 0;  // identifier from the input file (or dense synthetic id)
  int age = 0;
  LocationIndex home_location = -1;
  double beta_susceptibility = 1.0;
  double beta_infectivity = 1.0;
  std::vector<double> attributes;  // aligned with Population::person_attribute_names

  friend bool operator==(const Person&, const Person&) = default;
};

struct Location {
  std::int64_t id = 0;
  // Sort key for the spatial partitioner: census (state, county, tract,
  // block group) for loaded data, (row, col, 0, 0) for synthetic grids.
  std::array<std::int64_t, 4> geo{};
  std::int64_t max_occupancy = 0;   // peak simultaneous visitors on the busiest day
  double contact_probability = 1.0;  // filled from the contact model at startup
  std::vector<double> attributes;   // aligned with Population::location_attribute_names

  friend bool operator==(const Location&, const Location&) = default;
};

struct Visit {
  PersonIndex person = -1;
  LocationIndex location = -1;
  std::int8_t day_of_week = 0;  // 0..6, schedule repeats weekly
  Seconds start = 0;            // seconds from midnight, start < end <= 86400
  Seconds end = 0;

  friend bool operator==(const Visit&, const Visit&) = default;
};

struct Population {
  std::vector<Person> people;
  std::vector<Location> locations;
  std::vector<Visit> visits;
  std::vector<std::string> person_attribute_names;
  std::vector<std::string> location_attribute_names;

  // Visits grouped by (location, day of week), in input order. Built by
  // finalize(); all engine lookups go through this index.
  std::span<const VisitIndex> visits_at(LocationIndex location, int day_of_week) const {
    const std::size_t slot =
        static_cast<std::size_t>(location) * kDaysPerWeek +
        static_cast<std::size_t>(day_of_week);
    return std::span<const VisitIndex>(visit_ids_)
        .subspan(visit_offsets_[slot], visit_offsets_[slot + 1] - visit_offsets_[slot]);
  }

  std::optional<int> person_attribute_index(std::string_view name) const {
    for (std::size_t i = 0; i < person_attribute_names.size(); ++i)
      if (person_attribute_names[i] == name) return static_cast<int>(i);
    return std::nullopt;
  }

  std::optional<int> location_attribute_index(std::string_view name) const {
    for (std::size_t i = 0; i < location_attribute_names.size(); ++i)
      if (location_attribute_names[i] == name) return static_cast<int>(i);
    return std::nullopt;
  }

  // Validates cross references and bounds, then builds the visit index.
  void finalize() {
    const auto people_count = static_cast<std::int64_t>(people.size());
    const auto location_count = static_cast<std::int64_t>(locations.size());
    for (std::size_t i = 0; i < people.size(); ++i) {
      const Person& person = people[i];
      if (person.home_location < 0 || person.home_location >= location_count)
        throw ValidationError("person " + std::to_string(person.id) +
                              ": home location does not exist");
      if (!(person.beta_susceptibility >= 0.0) ||
          !std::isfinite(person.beta_susceptibility) ||
          !(person.beta_infectivity >= 0.0) ||
          !std::isfinite(person.beta_infectivity))
        throw ValidationError("person " + std::to_string(person.id) +
                              ": transmission weights must be finite and >= 0");
    }
    for (const Visit& visit : visits) {
      if (visit.person < 0 || visit.person >= people_count)
        throw ValidationError("visit references unknown person index " +
                              std::to_string(visit.person));
      if (visit.location < 0 || visit.location >= location_count)
        throw ValidationError("visit references unknown location index " +
                              std::to_string(visit.location));
      if (visit.day_of_week < 0 || visit.day_of_week >= kDaysPerWeek)
        throw ValidationError("visit day_of_week must be 0..6");
      if (visit.start < 0 || visit.end > kSecondsPerDay || visit.start >= visit.end)
        throw ValidationError(
            "visit times must satisfy 0 <= start < end <= 86400");
    }

    const std::size_t slots =
        static_cast<std::size_t>(location_count) * kDaysPerWeek;
    visit_offsets_.assign(slots + 1, 0);
    for (const Visit& visit : visits)
      ++visit_offsets_[static_cast<std::size_t>(visit.location) * kDaysPerWeek +
                       static_cast<std::size_t>(visit.day_of_week) + 1];
    for (std::size_t i = 1; i <= slots; ++i)
      visit_offsets_[i] += visit_offsets_[i - 1];
    visit_ids_.resize(visits.size());
    std::vector<std::size_t> cursor(visit_offsets_.begin(), visit_offsets_.end() - 1);
    for (std::size_t v = 0; v < visits.size(); ++v) {
      const Visit& visit = visits[v];
      const std::size_t slot =
          static_cast<std::size_t>(visit.location) * kDaysPerWeek +
          static_cast<std::size_t>(visit.day_of_week);
      visit_ids_[cursor[slot]++] = static_cast<VisitIndex>(v);
    }
    finalized_ = true;
  }

  bool finalized() const { return finalized_; }

  // Weekly visit count per location: the partitioner's load measure.
  std::vector<std::int64_t> weekly_visit_loads() const {
    std::vector<std::int64_t> loads(locations.size(), 0);
    for (const Visit& visit : visits) ++loads[static_cast<std::size_t>(visit.location)];
    return loads;
  }

  friend bool operator==(const Population& a, const Population& b) {
    return a.people == b.people && a.locations == b.locations &&
           a.visits == b.visits &&
           a.person_attribute_names == b.person_attribute_names &&
           a.location_attribute_names == b.location_attribute_names;
  }

 private:
  std::vector<std::size_t> visit_offsets_;
  std::vector<VisitIndex> visit_ids_;
  bool finalized_ = false;
};

// Value of a named person attribute; "age" is built in, everything else
// comes from the extra input columns. Missing names yield nullopt (callers
// treat that as "predicate does not match").
inline std::optional<double> person_attribute_value(const Population& pop,
                                                    PersonIndex person,
                                                    std::string_view name) {
  if (name == "age")
    return static_cast<double>(pop.people[static_cast<std::size_t>(person)].age);
  if (const auto index = pop.person_attribute_index(name))
    return pop.people[static_cast<std::size_t>(person)]
        .attributes[static_cast<std::size_t>(*index)];
  return std::nullopt;
}

inline std::optional<double> location_attribute_value(const Population& pop,
                                                      LocationIndex location,
                                                      std::string_view name) {
  if (const auto index = pop.location_attribute_index(name))
    return pop.locations[static_cast<std::size_t>(location)]
        .attributes[static_cast<std::size_t>(*index)];
  return std::nullopt;
}

namespace detail {

inline void require_columns(const CsvFile& file,
                            std::span<const std::string_view> expected) {
  const auto& columns = file.columns();
  if (columns.size() < expected.size())
    throw ParseError(file.path() + ":1: expected at least " +
                     std::to_string(expected.size()) + " columns");
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (columns[i] != expected[i])
      throw ParseError(file.path() + ":1: column " + std::to_string(i + 1) +
                       " must be '" + std::string(expected[i]) + "', found '" +
                       columns[i] + "'");
}

}  // namespace detail

// Loads the three-file population input. Column layouts:
//   people:    id,age,home_location,beta_susceptibility,beta_infectivity[,extra...]
//   locations: id,state,county,tract,blockgroup,max_occupancy[,extra...]
//   visits:    person,location,day_of_week,start,end
// Extra columns become named numeric attributes. Identifiers are arbitrary
// integers; references are resolved to dense indices here.
inline Population load_population(const std::string& people_path,
                                  const std::string& locations_path,
                                  const std::string& visits_path) {
  Population pop;
  std::unordered_map<std::int64_t, PersonIndex> person_index;
  std::unordered_map<std::int64_t, LocationIndex> location_index;

  {
    static constexpr std::string_view kColumns[] = {
        "id", "state", "county", "tract", "blockgroup", "max_occupancy"};
    CsvFile file(locations_path);
    detail::require_columns(file, kColumns);
    for (std::size_t i = std::size(kColumns); i < file.columns().size(); ++i)
      pop.location_attribute_names.push_back(file.columns()[i]);
    while (file.next_row()) {
      Location location;
      location.id = file.int_field(0);
      for (int g = 0; g < 4; ++g) location.geo[static_cast<std::size_t>(g)] = file.int_field(1 + g);
      location.max_occupancy = file.int_field(5);
      if (location.max_occupancy < 0) file.fail("max_occupancy must be >= 0");
      for (std::size_t i = std::size(kColumns); i < file.columns().size(); ++i)
        location.attributes.push_back(file.double_field(static_cast<int>(i)));
      const auto [it, inserted] = location_index.emplace(
          location.id, static_cast<LocationIndex>(pop.locations.size()));
      (void)it;
      if (!inserted) file.fail("duplicate location id " + std::to_string(location.id));
      pop.locations.push_back(std::move(location));
    }
  }

  {
    static constexpr std::string_view kColumns[] = {
        "id", "age", "home_location", "beta_susceptibility", "beta_infectivity"};
    CsvFile file(people_path);
    detail::require_columns(file, kColumns);
    for (std::size_t i = std::size(kColumns); i < file.columns().size(); ++i)
      pop.person_attribute_names.push_back(file.columns()[i]);
    while (file.next_row()) {
      Person person;
      person.id = file.int_field(0);
      person.age = static_cast<int>(file.int_field(1));
      if (person.age < 0) file.fail("age must be >= 0");
      const std::int64_t home_id = file.int_field(2);
      const auto home = location_index.find(home_id);
      if (home == location_index.end())
        file.fail("home location " + std::to_string(home_id) + " does not exist");
      person.home_location = home->second;
      person.beta_susceptibility = file.double_field(3);
      person.beta_infectivity = file.double_field(4);
      for (std::size_t i = std::size(kColumns); i < file.columns().size(); ++i)
        person.attributes.push_back(file.double_field(static_cast<int>(i)));
      const auto [it, inserted] = person_index.emplace(
          person.id, static_cast<PersonIndex>(pop.people.size()));
      (void)it;
      if (!inserted) file.fail("duplicate person id " + std::to_string(person.id));
      pop.people.push_back(std::move(person));
    }
  }

  {
    static constexpr std::string_view kColumns[] = {"person", "location",
                                                    "day_of_week", "start", "end"};
    CsvFile file(visits_path);
    detail::require_columns(file, kColumns);
    while (file.next_row()) {
      Visit visit;
      const std::int64_t person_id = file.int_field(0);
      const auto person = person_index.find(person_id);
      if (person == person_index.end())
        file.fail("person " + std::to_string(person_id) + " does not exist");
      visit.person = person->second;
      const std::int64_t location_id = file.int_field(1);
      const auto location = location_index.find(location_id);
      if (location == location_index.end())
        file.fail("location " + std::to_string(location_id) + " does not exist");
      visit.location = location->second;
      const std::int64_t dow = file.int_field(2);
      if (dow < 0 || dow >= kDaysPerWeek) file.fail("day_of_week must be 0..6");
      visit.day_of_week = static_cast<std::int8_t>(dow);
      const std::int64_t start = file.int_field(3);
      const std::int64_t end = file.int_field(4);
      if (start < 0 || end > kSecondsPerDay || start >= end)
        file.fail("times must satisfy 0 <= start < end <= 86400");
      visit.start = static_cast<Seconds>(start);
      visit.end = static_cast<Seconds>(end);
      pop.visits.push_back(visit);
    }
  }

  pop.finalize();
  return pop;
}

struct SyntheticConfig {
  int grid_width = 0;
  int grid_height = 0;
  std::int64_t people_count = 0;
  double lambda_visits = 4.6;       // mean visits per person per day
  double lambda_hops = 5.2;         // mean grid distance from home per visit
  double visit_duration_mean = 1800.0;  // seconds
  std::uint64_t seed = 0;

  std::int64_t location_count() const {
    return static_cast<std::int64_t>(grid_width) * grid_height;
  }

  void validate() const {
    if (grid_width < 1 || grid_height < 1)
      throw ValidationError("synthetic grid must have at least one cell");
    if (people_count < 0)
      throw ValidationError("synthetic population size must be >= 0");
    if (!(lambda_visits >= 0.0) || !(lambda_hops >= 0.0))
      throw ValidationError("synthetic visit rates must be >= 0");
    if (!(visit_duration_mean > 0.0))
      throw ValidationError("synthetic visit duration mean must be > 0");
  }
};

namespace detail {

// Cells of a W x H torus at exactly Manhattan distance d from (row, col),
// in sorted cell-index order. d must already be clamped to the maximum
// reachable distance floor(H/2) + floor(W/2).
inline void cells_at_distance(int row, int col, int d, int width, int height,
                              std::vector<std::int64_t>& out) {
  out.clear();
  auto axis_offsets = [](int k, int extent, std::array<int, 2>& offsets) {
    // Residues whose toroidal distance on this axis is exactly k.
    if (k > extent / 2) return 0;
    offsets[0] = k;
    if (k == 0 || k * 2 == extent) return 1;
    offsets[1] = extent - k;
    return 2;
  };
  for (int k = 0; k <= d; ++k) {
    std::array<int, 2> rows{}, cols{};
    const int row_count = axis_offsets(k, height, rows);
    const int col_count = axis_offsets(d - k, width, cols);
    for (int r = 0; r < row_count; ++r)
      for (int c = 0; c < col_count; ++c)
        out.push_back(static_cast<std::int64_t>((row + rows[static_cast<std::size_t>(r)]) % height) * width +
                      (col + cols[static_cast<std::size_t>(c)]) % width);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace detail

// Synthetic population on a toroidal grid: one location per cell, uniform
// homes, and a weekly schedule where each person makes Poisson(lambda_visits)
// visits per day to cells Poisson(lambda_hops) away from home, starting at a
// uniform second of the day and lasting an exponential time (clamped to the
// day). Identical inputs produce identical populations, independent of the
// machine or thread count.
inline Population generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  Population pop;
  const int width = config.grid_width;
  const int height = config.grid_height;
  const std::int64_t cells = config.location_count();

  pop.locations.resize(static_cast<std::size_t>(cells));
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    Location& location = pop.locations[static_cast<std::size_t>(cell)];
    location.id = cell;
    location.geo = {cell / width, cell % width, 0, 0};
  }

  pop.people.resize(static_cast<std::size_t>(config.people_count));
  for (std::int64_t p = 0; p < config.people_count; ++p) {
    rng::KeyedStream stream(config.seed, rng::Site::kSyntheticHome, 0,
                            static_cast<std::uint64_t>(p));
    Person& person = pop.people[static_cast<std::size_t>(p)];
    person.id = p;
    person.home_location = static_cast<LocationIndex>(
        stream.next_below(static_cast<std::uint64_t>(cells)));
    person.age = static_cast<int>(stream.next_below(90));
  }

  const int max_distance = height / 2 + width / 2;
  std::vector<std::int64_t> ring;
  for (std::int64_t p = 0; p < config.people_count; ++p) {
    const Person& person = pop.people[static_cast<std::size_t>(p)];
    const int home_row = static_cast<int>(person.home_location) / width;
    const int home_col = static_cast<int>(person.home_location) % width;
    for (int dow = 0; dow < kDaysPerWeek; ++dow) {
      rng::KeyedStream stream(config.seed, rng::Site::kSyntheticVisit,
                              static_cast<std::uint64_t>(dow),
                              static_cast<std::uint64_t>(p));
      const int count = stream.next_poisson(config.lambda_visits);
      for (int i = 0; i < count; ++i) {
        const int distance =
            std::min(stream.next_poisson(config.lambda_hops), max_distance);
        detail::cells_at_distance(home_row, home_col, distance, width, height, ring);
        const std::int64_t cell = ring[static_cast<std::size_t>(
            stream.next_below(ring.size()))];
        Visit visit;
        visit.person = static_cast<PersonIndex>(p);
        visit.location = static_cast<LocationIndex>(cell);
        visit.day_of_week = static_cast<std::int8_t>(dow);
        visit.start = static_cast<Seconds>(stream.next_below(kSecondsPerDay));
        const auto duration = static_cast<std::int64_t>(
            stream.next_exponential(config.visit_duration_mean));
        visit.end = static_cast<Seconds>(
            std::min<std::int64_t>(visit.start + std::max<std::int64_t>(1, duration),
                                   kSecondsPerDay));
        pop.visits.push_back(visit);
      }
    }
  }

  pop.finalize();
  return pop;
}

// Peak simultaneous occupancy per location: for each weekday, sweep visit
// start/end breakpoints (a departure at time t frees its slot before an
// arrival at t takes one); the per-location result is the maximum over the
// seven weekdays, stored on the Location and also returned.
inline std::vector<std::int64_t> compute_max_occupancy(Population& pop) {
  if (!pop.finalized())
    throw std::logic_error("compute_max_occupancy: population not finalized");
  std::vector<std::int64_t> result(pop.locations.size(), 0);
  std::vector<std::pair<Seconds, int>> breakpoints;  // (time, +1 arrival / -1 departure)
  for (std::size_t loc = 0; loc < pop.locations.size(); ++loc) {
    std::int64_t peak = 0;
    for (int dow = 0; dow < kDaysPerWeek; ++dow) {
      breakpoints.clear();
      for (const VisitIndex v :
           pop.visits_at(static_cast<LocationIndex>(loc), dow)) {
        breakpoints.emplace_back(pop.visits[static_cast<std::size_t>(v)].start, +1);
        breakpoints.emplace_back(pop.visits[static_cast<std::size_t>(v)].end, -1);
      }
      std::sort(breakpoints.begin(), breakpoints.end());  // -1 sorts before +1 at ties
      std::int64_t current = 0;
      for (const auto& [time, delta] : breakpoints) {
        (void)time;
        current += delta;
        peak = std::max(peak, current);
      }
    }
    result[loc] = peak;
    pop.locations[loc].max_occupancy = peak;
  }
  return result;
}

}  // namespace episim
