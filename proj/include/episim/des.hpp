#pragma once

// Per-location, per-day discrete event pass. Each visit contributes an
// arrival and a departure event; events are processed in time order with
// departures ahead of arrivals at the same instant, so touching intervals
// exchange nothing. The location keeps two occupancy lists (susceptible and
// infectious visitors). When a relevant visitor departs, it is paired once
// against every member of the opposite list; each such candidate pair makes
// one keyed contact draw, and successful contacts emit an ExposureRecord
// whose duration is the exact overlap of the two visits.
//
// Pairing at departure time means every overlapping pair is evaluated
// exactly once, no matter how the intervals nest.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "episim/models.hpp"
#include "episim/rng.hpp"
#include "episim/types.hpp"

namespace episim {

// Health snapshot of one visitor, as distributed to location partitions.
// Weights fold the person's own multiplier with the state multiplier.
struct VisitorSnapshot {
  StateIndex state = -1;
  bool susceptible = false;  // sus_weight may still be 0 if beta is 0
  bool infectious = false;
  double sus_weight = 0.0;  // beta_susceptibility * sus(state)
  double inf_weight = 0.0;  // beta_infectivity * inf(state)

  friend bool operator==(const VisitorSnapshot&, const VisitorSnapshot&) = default;
};

// One visit on the day under evaluation, with the visitor's snapshot
// resolved. `visit` is the population-wide visit index; it keys the contact
// draw so results are independent of partitioning.
struct DayVisit {
  VisitIndex visit = -1;
  PersonIndex person = -1;
  Seconds start = 0;
  Seconds end = 0;
  const VisitorSnapshot* snapshot = nullptr;
};

struct VisitEvent {
  Seconds time = 0;
  std::int8_t kind = 0;  // 0 departure, 1 arrival: departures first at ties
  PersonIndex person = -1;
  std::int32_t slot = 0;  // index into the day-visit span

  friend bool operator<(const VisitEvent& a, const VisitEvent& b) {
    return std::tie(a.time, a.kind, a.person, a.slot) <
           std::tie(b.time, b.kind, b.person, b.slot);
  }
};

inline std::vector<VisitEvent> build_event_queue(std::span<const DayVisit> visits) {
  std::vector<VisitEvent> events;
  events.reserve(visits.size() * 2);
  for (std::size_t i = 0; i < visits.size(); ++i) {
    const DayVisit& visit = visits[i];
    events.push_back({visit.start, 1, visit.person, static_cast<std::int32_t>(i)});
    events.push_back({visit.end, 0, visit.person, static_cast<std::int32_t>(i)});
  }
  std::sort(events.begin(), events.end());
  return events;
}

// True if any visit of the day is by a currently infectious person. Used to
// skip the sweep entirely at locations that cannot produce exposures.
inline bool has_infectious_visitor(std::span<const DayVisit> visits) {
  for (const DayVisit& visit : visits)
    if (visit.snapshot->infectious) return true;
  return false;
}

// Reusable buffers for one sweep; owned per worker to avoid reallocation.
struct SweepScratch {
  struct Occupant {
    std::int32_t slot = 0;
    PersonIndex person = -1;
    VisitIndex visit = -1;
    Seconds arrival = 0;
    double weight = 0.0;  // sus_weight or inf_weight, by list
  };
  std::vector<VisitEvent> events;
  std::vector<Occupant> susceptible;
  std::vector<Occupant> infectious;
};

struct SweepResult {
  std::int64_t candidate_pairs = 0;  // susceptible-infectious pairs evaluated
  std::size_t max_susceptible = 0;
  std::size_t max_infectious = 0;
};

// Runs the event sweep for one location-day and feeds every successful
// contact to `sink(const ExposureRecord&)`. `contact_probability` is the
// location's cached per-pair probability; `day` and `location` key the
// contact draws together with the two visit indices.
template <class Sink>
SweepResult compute_exposures(std::span<const DayVisit> visits,
                              double contact_probability, double tau,
                              std::uint64_t seed, int day,
                              LocationIndex location, Sink&& sink,
                              SweepScratch& scratch) {
  SweepResult result;
  scratch.events.clear();
  scratch.susceptible.clear();
  scratch.infectious.clear();
  for (std::size_t i = 0; i < visits.size(); ++i) {
    const DayVisit& visit = visits[i];
    scratch.events.push_back({visit.start, 1, visit.person, static_cast<std::int32_t>(i)});
    scratch.events.push_back({visit.end, 0, visit.person, static_cast<std::int32_t>(i)});
  }
  std::sort(scratch.events.begin(), scratch.events.end());

  std::int64_t occupancy = 0;
  auto remove_by_slot = [](std::vector<SweepScratch::Occupant>& list,
                           std::int32_t slot) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].slot == slot) {
        list[i] = list.back();
        list.pop_back();
        return true;
      }
    }
    return false;
  };

  for (const VisitEvent& event : scratch.events) {
    const DayVisit& visit = visits[static_cast<std::size_t>(event.slot)];
    const VisitorSnapshot& snapshot = *visit.snapshot;
    if (event.kind == 1) {  // arrival
      ++occupancy;
      if (snapshot.susceptible)
        scratch.susceptible.push_back({event.slot, visit.person, visit.visit,
                                       event.time, snapshot.sus_weight});
      else if (snapshot.infectious)
        scratch.infectious.push_back({event.slot, visit.person, visit.visit,
                                      event.time, snapshot.inf_weight});
      result.max_susceptible = std::max(result.max_susceptible, scratch.susceptible.size());
      result.max_infectious = std::max(result.max_infectious, scratch.infectious.size());
      if (static_cast<std::int64_t>(scratch.susceptible.size() +
                                    scratch.infectious.size()) > occupancy)
        throw std::logic_error("exposure sweep: tracked visitors exceed occupancy");
      continue;
    }

    // Departure: settle this visitor against the opposite list, then leave.
    --occupancy;
    if (snapshot.susceptible) {
      if (!remove_by_slot(scratch.susceptible, event.slot))
        throw std::logic_error("exposure sweep: departing susceptible not tracked");
      for (const SweepScratch::Occupant& other : scratch.infectious) {
        ++result.candidate_pairs;
        const VisitIndex lo = std::min(visit.visit, other.visit);
        const VisitIndex hi = std::max(visit.visit, other.visit);
        if (!rng::draw_bernoulli(contact_probability, seed, rng::Site::kContact,
                                 static_cast<std::uint64_t>(day),
                                 static_cast<std::uint64_t>(location),
                                 static_cast<std::uint64_t>(lo),
                                 static_cast<std::uint64_t>(hi)))
          continue;
        ExposureRecord record;
        record.target = visit.person;
        record.source = other.person;
        record.location = location;
        record.overlap_start = std::max(visit.start, other.arrival);
        record.duration = static_cast<double>(event.time - record.overlap_start);
        record.propensity = record.duration * tau * snapshot.sus_weight * other.weight;
        sink(record);
      }
    } else if (snapshot.infectious) {
      if (!remove_by_slot(scratch.infectious, event.slot))
        throw std::logic_error("exposure sweep: departing infectious not tracked");
      for (const SweepScratch::Occupant& other : scratch.susceptible) {
        ++result.candidate_pairs;
        const VisitIndex lo = std::min(visit.visit, other.visit);
        const VisitIndex hi = std::max(visit.visit, other.visit);
        if (!rng::draw_bernoulli(contact_probability, seed, rng::Site::kContact,
                                 static_cast<std::uint64_t>(day),
                                 static_cast<std::uint64_t>(location),
                                 static_cast<std::uint64_t>(lo),
                                 static_cast<std::uint64_t>(hi)))
          continue;
        ExposureRecord record;
        record.target = other.person;
        record.source = visit.person;
        record.location = location;
        record.overlap_start = std::max(visit.start, other.arrival);
        record.duration = static_cast<double>(event.time - record.overlap_start);
        record.propensity = record.duration * tau * other.weight * snapshot.inf_weight;
        sink(record);
      }
    }
  }

  if (!scratch.susceptible.empty() || !scratch.infectious.empty())
    throw std::logic_error("exposure sweep: visitors remain after the last event");
  return result;
}

}  // namespace episim
