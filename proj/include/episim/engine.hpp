#pragma once

// The simulation engine: a day-stepped loop over three phases, parallel
// across partitions within each phase and separated by barriers.
//
//   1. Health snapshot distribution: each person partition publishes the
//      current snapshot of every person whose snapshot changed (or all of
//      them on day 1 / in full-broadcast mode) to the location partitions
//      that person visits during the week. Visits themselves never move;
//      they live with the location partition.
//   2. Exposure computation: each location partition replays the day's
//      visits through the per-location event sweep and mails the resulting
//      exposure records to the target person's partition.
//   3. Person update: each person partition accumulates its incoming
//      records per target (in a fixed sort order), draws infections,
//      applies seed infections, and advances dwell-time countdowns.
//      Afterwards the control thread tallies statistics and evaluates
//      intervention triggers, whose effects apply from the next day.
//
// Every mailbox has one writing partition and one reading partition per
// phase, and all cross-partition reductions happen on the control thread in
// partition order, so results are bitwise independent of thread count. All
// randomness is keyed (see rng.hpp), so results are also independent of the
// partition count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "episim/des.hpp"
#include "episim/disease.hpp"
#include "episim/interventions.hpp"
#include "episim/models.hpp"
#include "episim/parallel.hpp"
#include "episim/partition.hpp"
#include "episim/population.hpp"
#include "episim/rng.hpp"
#include "episim/types.hpp"

namespace episim {

// Where a person is in the disease state machine. days_remaining == 0 means
// no pending transition (susceptible or terminal); a positive countdown
// starts decrementing the day after the state is entered, and the
// pre-sampled next_state fires when it hits zero.
struct HealthStatus {
  StateIndex state = -1;
  int days_remaining = 0;
  StateIndex next_state = -1;
};

struct SeedingSchedule {
  int per_day = 2;
  int day_from = 1;  // inclusive
  int day_to = 10;   // inclusive
};

struct RunConfig {
  int days = 0;
  std::uint64_t seed = 0;
  int partitions = 1;
  int threads = 1;
  double tau = 0.05;  // transmissibility per second of contact
  ContactModel contact;
  SeedingSchedule seeding;
  std::vector<InterventionSpec> interventions;
  // Exactness-preserving optimizations, togglable for comparison runs.
  bool short_circuit = true;   // skip locations with no infectious visitor
  bool delta_updates = true;   // send only changed snapshots after day 1
  // Test/diagnostic hooks.
  bool record_exposures = false;
  bool record_infections = false;

  void validate() const {
    if (days < 0) throw ValidationError("days must be >= 0");
    if (partitions < 1) throw ValidationError("partitions must be >= 1");
    if (threads < 1) throw ValidationError("threads must be >= 1");
    if (!(tau >= 0.0) || !std::isfinite(tau))
      throw ValidationError("tau must be finite and >= 0");
    if (seeding.per_day < 0) throw ValidationError("seeds per day must be >= 0");
    contact.validate();
  }
};

// One simulated day of output. The first block is epidemiology and is
// invariant across thread counts, partition counts, and the optimization
// toggles; the second block is instrumentation and legitimately varies with
// the toggles (that variation is how the optimizations are verified).
struct DayStats {
  int day = 0;
  std::vector<std::int64_t> state_counts;  // by disease-state index, end of day
  std::int64_t new_infections = 0;         // includes seed infections
  std::int64_t seed_infections = 0;
  std::int64_t exposure_records = 0;       // records delivered to targets
  std::int64_t traversed_edges = 0;        // susceptible-infectious pairs evaluated

  std::int64_t locations_evaluated = 0;    // sweeps actually run
  std::int64_t locations_skipped = 0;      // short-circuited sweeps
  std::int64_t snapshot_updates = 0;       // person-to-location messages sent
  double psc_seconds = 0.0;                // snapshot distribution
  double ecc_seconds = 0.0;                // exposure computation
  double psu_seconds = 0.0;                // person update + seeding + triggers
};

// Epidemiological equality: the fields that must match bit-for-bit between
// runs that differ only in threads, partitions, or optimization toggles.
inline bool same_epidemiology(const DayStats& a, const DayStats& b) {
  return a.day == b.day && a.state_counts == b.state_counts &&
         a.new_infections == b.new_infections &&
         a.seed_infections == b.seed_infections &&
         a.exposure_records == b.exposure_records &&
         a.traversed_edges == b.traversed_edges;
}

struct InfectionEvent {
  int day = 0;
  PersonIndex person = -1;
  bool seeded = false;  // true for seed infections, false for contact infections
};

class Simulation {
 public:
  Simulation(const Population& pop, const DiseaseModel& model, RunConfig config)
      : pop_(pop), model_(model), cfg_(std::move(config)) {
    const auto begin = Clock::now();
    cfg_.validate();
    if (!pop_.finalized())
      throw std::logic_error("Simulation: population is not finalized");
    build_partitions();
    build_visitor_index();
    init_people();
    init_locations();
    intervention_states_.resize(cfg_.interventions.size());
    psc_out_.assign(partition_count(), std::vector<SnapshotMail>(partition_count()));
    ecc_out_.assign(partition_count(), std::vector<RecordMail>(partition_count()));
    scratch_.resize(static_cast<std::size_t>(cfg_.threads));
    partials_.resize(partition_count());
    pool_ = std::make_unique<WorkerPool>(cfg_.threads);
    setup_seconds_ = elapsed(begin);
  }

  // Runs the remaining configured days and returns one entry per day.
  std::vector<DayStats> run() {
    std::vector<DayStats> out;
    out.reserve(static_cast<std::size_t>(cfg_.days));
    while (day_ < cfg_.days) out.push_back(run_day());
    return out;
  }

  // Advances the simulation by one day.
  DayStats run_day() {
    const auto day_begin = Clock::now();
    ++day_;
    const int weekday = (day_ - 1) % kDaysPerWeek;

    DayStats stats;
    stats.day = day_;

    auto t0 = Clock::now();
    run_snapshot_phase();
    stats.psc_seconds = elapsed(t0);

    t0 = Clock::now();
    run_exposure_phase(weekday);
    stats.ecc_seconds = elapsed(t0);

    t0 = Clock::now();
    run_update_phase();
    reduce_day(stats);
    evaluate_interventions();
    stats.psu_seconds = elapsed(t0);

    loop_seconds_ += elapsed(day_begin);
    return stats;
  }

  int day() const { return day_; }
  const PartitionMap& partition_map() const { return pmap_; }
  int partition_count() const { return pmap_.num_partitions; }
  double setup_seconds() const { return setup_seconds_; }
  double loop_seconds() const { return loop_seconds_; }

  std::span<const StateIndex> health_states() const { return state_; }
  std::span<const std::int64_t> state_counts() const { return counts_; }
  std::int64_t cumulative_infections() const { return cumulative_infections_; }

  HealthStatus status_of(PersonIndex person) const {
    const auto p = static_cast<std::size_t>(person);
    return HealthStatus{state_[p], days_left_[p], next_state_[p]};
  }

  double contact_probability_at(LocationIndex location) const {
    return contact_[static_cast<std::size_t>(location)];
  }

  // People of person-partition `i` who visit any location of location
  // partition `j` during the week. Derived view for inspection and tests.
  std::vector<PersonIndex> visitor_set(int i, int j) const {
    std::vector<PersonIndex> out;
    for (const PersonIndex p : cache_people_[static_cast<std::size_t>(j)])
      if (pmap_.person_to_partition[static_cast<std::size_t>(p)] == i)
        out.push_back(p);
    return out;
  }

  const std::vector<InfectionEvent>& infection_log() const { return infection_log_; }
  const std::vector<ExposureRecord>& exposure_log() const { return exposure_log_; }
  std::span<const InterventionState> intervention_states() const {
    return intervention_states_;
  }
  std::span<const double> beta_susceptibility() const { return beta_sus_; }
  std::span<const double> beta_infectivity() const { return beta_inf_; }

 private:
  using Clock = std::chrono::steady_clock;
  using SnapshotMail = std::vector<std::pair<std::int32_t, VisitorSnapshot>>;
  using RecordMail = std::vector<ExposureRecord>;

  static double elapsed(Clock::time_point since) {
    return std::chrono::duration<double>(Clock::now() - since).count();
  }

  // Per-partition accumulators, reduced by the control thread after each
  // phase; one cache-line-ish struct per partition, written only by its
  // owning task.
  struct Partials {
    std::int64_t snapshot_updates = 0;
    std::int64_t candidates = 0;
    std::int64_t evaluated = 0;
    std::int64_t skipped = 0;
    std::int64_t records_received = 0;
    std::int64_t contact_infections = 0;
    std::int64_t seed_infections = 0;
    std::vector<std::int64_t> counts;
    std::vector<InfectionEvent> events;
    char padding[64];
  };

  struct WorkerScratch {
    SweepScratch sweep;
    std::vector<DayVisit> day_visits;
    std::vector<ExposureRecord> records;
  };

  void build_partitions() {
    pmap_ = build_partition_map(pop_, cfg_.partitions);
    const auto m = static_cast<std::size_t>(pmap_.num_partitions);
    partition_people_.assign(m, {});
    partition_locations_.assign(m, {});
    for (std::size_t p = 0; p < pop_.people.size(); ++p)
      partition_people_[static_cast<std::size_t>(pmap_.person_to_partition[p])]
          .push_back(static_cast<PersonIndex>(p));
    for (std::size_t l = 0; l < pop_.locations.size(); ++l)
      partition_locations_[static_cast<std::size_t>(pmap_.location_to_partition[l])]
          .push_back(static_cast<LocationIndex>(l));
  }

  // Precomputes, from the weekly schedule: the visitor list (and snapshot
  // cache slots) of every location partition, the per-person send plan, and
  // the cache slot of every visit.
  void build_visitor_index() {
    const auto m = static_cast<std::size_t>(pmap_.num_partitions);
    std::vector<std::pair<std::int32_t, PersonIndex>> pairs;  // (location partition, person)
    pairs.reserve(pop_.visits.size());
    for (const Visit& visit : pop_.visits)
      pairs.emplace_back(
          pmap_.location_to_partition[static_cast<std::size_t>(visit.location)],
          visit.person);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    cache_people_.assign(m, {});
    std::unordered_map<std::uint64_t, std::int32_t> slot_of;
    slot_of.reserve(pairs.size() * 2);
    for (const auto& [j, person] : pairs) {
      const auto slot =
          static_cast<std::int32_t>(cache_people_[static_cast<std::size_t>(j)].size());
      cache_people_[static_cast<std::size_t>(j)].push_back(person);
      slot_of.emplace((static_cast<std::uint64_t>(j) << 32) |
                          static_cast<std::uint32_t>(person),
                      slot);
    }
    caches_.resize(m);
    for (std::size_t j = 0; j < m; ++j)
      caches_[j].resize(cache_people_[j].size());

    // Send plan: for each person, the (partition, slot) pairs to publish to,
    // grouped per person via a (person, partition) re-sort.
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      return std::pair(a.second, a.first) < std::pair(b.second, b.first);
    });
    send_offsets_.assign(pop_.people.size() + 1, 0);
    send_entries_.clear();
    send_entries_.reserve(pairs.size());
    for (const auto& [j, person] : pairs) {
      const std::uint64_t key = (static_cast<std::uint64_t>(j) << 32) |
                                static_cast<std::uint32_t>(person);
      send_entries_.emplace_back(j, slot_of.at(key));
      ++send_offsets_[static_cast<std::size_t>(person) + 1];
    }
    for (std::size_t p = 1; p <= pop_.people.size(); ++p)
      send_offsets_[p] += send_offsets_[p - 1];

    visit_slot_.resize(pop_.visits.size());
    for (std::size_t v = 0; v < pop_.visits.size(); ++v) {
      const Visit& visit = pop_.visits[v];
      const std::int32_t j =
          pmap_.location_to_partition[static_cast<std::size_t>(visit.location)];
      const std::uint64_t key = (static_cast<std::uint64_t>(j) << 32) |
                                static_cast<std::uint32_t>(visit.person);
      visit_slot_[v] = slot_of.at(key);
    }
  }

  void init_people() {
    const std::size_t n = pop_.people.size();
    state_.resize(n);
    days_left_.assign(n, 0);
    next_state_.assign(n, -1);
    beta_sus_.resize(n);
    beta_inf_.resize(n);
    last_sent_.assign(n, VisitorSnapshot{});  // state -1 forces a day-1 send
    mark_.assign(n, 0);
    counts_.assign(model_.states.size(), 0);
    for (std::size_t p = 0; p < n; ++p) {
      state_[p] = model_.entry_state(pop_, static_cast<PersonIndex>(p));
      beta_sus_[p] = pop_.people[p].beta_susceptibility;
      beta_inf_[p] = pop_.people[p].beta_infectivity;
      ++counts_[static_cast<std::size_t>(state_[p])];
    }
  }

  void init_locations() {
    contact_.resize(pop_.locations.size());
    for (std::size_t l = 0; l < pop_.locations.size(); ++l) {
      contact_[l] = cfg_.contact.probability(
          static_cast<double>(pop_.locations[l].max_occupancy));
      if (!(contact_[l] >= 0.0 && contact_[l] <= 1.0))
        throw ValidationError("location " + std::to_string(pop_.locations[l].id) +
                              ": contact probability outside [0, 1]");
    }
  }

  VisitorSnapshot make_snapshot(PersonIndex person) const {
    const auto p = static_cast<std::size_t>(person);
    const DiseaseState& state = model_.states[static_cast<std::size_t>(state_[p])];
    VisitorSnapshot snapshot;
    snapshot.state = state_[p];
    snapshot.susceptible = state.susceptibility > 0.0;
    snapshot.infectious = state.infectivity > 0.0;
    snapshot.sus_weight = beta_sus_[p] * state.susceptibility;
    snapshot.inf_weight = beta_inf_[p] * state.infectivity;
    return snapshot;
  }

  void run_snapshot_phase() {
    const int m = partition_count();
    pool_->run(m, [&](int i, int) {
      Partials& partial = partials_[static_cast<std::size_t>(i)];
      partial.snapshot_updates = 0;
      auto& outboxes = psc_out_[static_cast<std::size_t>(i)];
      for (const PersonIndex person :
           partition_people_[static_cast<std::size_t>(i)]) {
        const auto p = static_cast<std::size_t>(person);
        const VisitorSnapshot snapshot = make_snapshot(person);
        if (cfg_.delta_updates && snapshot == last_sent_[p]) continue;
        for (std::size_t e = send_offsets_[p]; e < send_offsets_[p + 1]; ++e) {
          const auto& [j, slot] = send_entries_[e];
          outboxes[static_cast<std::size_t>(j)].emplace_back(slot, snapshot);
          ++partial.snapshot_updates;
        }
        last_sent_[p] = snapshot;
      }
    });
    pool_->run(m, [&](int j, int) {
      auto& cache = caches_[static_cast<std::size_t>(j)];
      for (int i = 0; i < m; ++i) {
        SnapshotMail& mail = psc_out_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        for (const auto& [slot, snapshot] : mail)
          cache[static_cast<std::size_t>(slot)] = snapshot;
        mail.clear();
      }
    });
  }

  // True if the visit must be dropped today under some effective
  // suppression spec. Irreversible suppressions stay effective after their
  // trigger window closes.
  bool suppressed(const Visit& visit, VisitIndex index) const {
    for (const auto& [spec, state] : active_suppressions_) {
      const std::size_t entity = spec->target == TargetKind::kLocation
                                     ? static_cast<std::size_t>(visit.location)
                                     : static_cast<std::size_t>(visit.person);
      if (!state->mask[entity]) continue;
      if (visit_suppressed(*spec, cfg_.seed, day_, index)) return true;
    }
    return false;
  }

  void run_exposure_phase(int weekday) {
    const int m = partition_count();
    pool_->run(m, [&](int j, int worker) {
      Partials& partial = partials_[static_cast<std::size_t>(j)];
      partial.candidates = 0;
      partial.evaluated = 0;
      partial.skipped = 0;
      WorkerScratch& scratch = scratch_[static_cast<std::size_t>(worker)];
      auto& outboxes = ecc_out_[static_cast<std::size_t>(j)];
      const auto& cache = caches_[static_cast<std::size_t>(j)];
      for (const LocationIndex location :
           partition_locations_[static_cast<std::size_t>(j)]) {
        const auto visit_ids = pop_.visits_at(location, weekday);
        if (visit_ids.empty()) continue;
        scratch.day_visits.clear();
        for (const VisitIndex v : visit_ids) {
          const Visit& visit = pop_.visits[static_cast<std::size_t>(v)];
          if (!active_suppressions_.empty() && suppressed(visit, v)) continue;
          scratch.day_visits.push_back(
              {v, visit.person, visit.start, visit.end,
               &cache[static_cast<std::size_t>(visit_slot_[static_cast<std::size_t>(v)])]});
        }
        if (scratch.day_visits.empty()) continue;
        if (cfg_.short_circuit && !has_infectious_visitor(scratch.day_visits)) {
          ++partial.skipped;
          continue;
        }
        ++partial.evaluated;
        const SweepResult result = compute_exposures(
            std::span<const DayVisit>(scratch.day_visits),
            contact_[static_cast<std::size_t>(location)], cfg_.tau, cfg_.seed,
            day_, location,
            [&](const ExposureRecord& record) {
              const auto target_partition = static_cast<std::size_t>(
                  pmap_.person_to_partition[static_cast<std::size_t>(record.target)]);
              outboxes[target_partition].push_back(record);
            },
            scratch.sweep);
        partial.candidates += result.candidate_pairs;
      }
    });
    if (cfg_.record_exposures)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
          for (const ExposureRecord& record :
               ecc_out_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
            exposure_log_.push_back(record);
  }

  // Control-plane seed selection: sequential keyed draws with redraws for
  // people who are no longer susceptible, capped at 1000 attempts per
  // requested seed and by the number of remaining susceptibles.
  void draw_seeds() {
    seeded_.clear();
    const SeedingSchedule& schedule = cfg_.seeding;
    if (schedule.per_day <= 0 || day_ < schedule.day_from || day_ > schedule.day_to)
      return;
    std::int64_t susceptible_now = 0;
    for (std::size_t s = 0; s < counts_.size(); ++s)
      if (model_.states[s].susceptibility > 0.0) susceptible_now += counts_[s];
    const std::int64_t want =
        std::min<std::int64_t>(schedule.per_day, susceptible_now);
    const std::int64_t attempt_cap =
        static_cast<std::int64_t>(schedule.per_day) * 1000;
    for (std::int64_t attempt = 0;
         static_cast<std::int64_t>(seeded_.size()) < want && attempt < attempt_cap;
         ++attempt) {
      const std::uint64_t word =
          rng::draw_block(cfg_.seed, rng::Site::kSeeding,
                          static_cast<std::uint64_t>(day_),
                          static_cast<std::uint64_t>(attempt))[0];
      const auto person = static_cast<PersonIndex>(
          rng::to_below(word, pop_.people.size()));
      const auto p = static_cast<std::size_t>(person);
      if (!model_.is_susceptible(state_[p]) || mark_[p] != 0) continue;
      mark_[p] = 1;
      seeded_.push_back(person);
    }
  }

  void enter_exposed(PersonIndex person) {
    const auto p = static_cast<std::size_t>(person);
    state_[p] = model_.exposed_state;
    schedule_transition(person, model_.exposed_state);
  }

  void schedule_transition(PersonIndex person, StateIndex state) {
    const auto p = static_cast<std::size_t>(person);
    if (model_.is_terminal(state)) {
      days_left_[p] = 0;
      next_state_[p] = -1;
      return;
    }
    rng::KeyedStream stream(cfg_.seed, rng::Site::kTransition,
                            static_cast<std::uint64_t>(day_),
                            static_cast<std::uint64_t>(person));
    const auto [next, dwell] = model_.sample_transition(state, stream);
    days_left_[p] = dwell;
    next_state_[p] = next;
  }

  void run_update_phase() {
    draw_seeds();
    const int m = partition_count();
    pool_->run(m, [&](int i, int worker) {
      Partials& partial = partials_[static_cast<std::size_t>(i)];
      partial.records_received = 0;
      partial.contact_infections = 0;
      partial.seed_infections = 0;
      partial.counts.assign(model_.states.size(), 0);
      partial.events.clear();
      WorkerScratch& scratch = scratch_[static_cast<std::size_t>(worker)];

      // Gather and order this partition's incoming exposure records.
      scratch.records.clear();
      for (int j = 0; j < m; ++j) {
        RecordMail& mail = ecc_out_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        scratch.records.insert(scratch.records.end(), mail.begin(), mail.end());
        mail.clear();
      }
      partial.records_received = static_cast<std::int64_t>(scratch.records.size());
      std::sort(scratch.records.begin(), scratch.records.end(),
                exposure_order_by_target);

      // Infection decisions, one keyed draw per exposed target.
      for (std::size_t begin = 0; begin < scratch.records.size();) {
        std::size_t end = begin;
        const PersonIndex target = scratch.records[begin].target;
        double total = 0.0;
        while (end < scratch.records.size() &&
               scratch.records[end].target == target) {
          total += scratch.records[end].propensity;
          ++end;
        }
        const auto p = static_cast<std::size_t>(target);
        if (model_.is_susceptible(state_[p]) && mark_[p] == 0 &&
            rng::draw_unit(cfg_.seed, rng::Site::kInfection,
                           static_cast<std::uint64_t>(day_),
                           static_cast<std::uint64_t>(target)) <
                infection_probability(total))
          mark_[p] = 2;
        begin = end;
      }

      // Apply seeds and infections, then advance countdowns; one pass over
      // the partition's people in index order.
      for (const PersonIndex person :
           partition_people_[static_cast<std::size_t>(i)]) {
        const auto p = static_cast<std::size_t>(person);
        if (mark_[p] == 1) {
          enter_exposed(person);
          ++partial.seed_infections;
          if (cfg_.record_infections) partial.events.push_back({day_, person, true});
        } else if (mark_[p] == 2) {
          enter_exposed(person);
          ++partial.contact_infections;
          if (cfg_.record_infections) partial.events.push_back({day_, person, false});
        } else if (days_left_[p] > 0 && --days_left_[p] == 0) {
          const StateIndex next = next_state_[p];
          state_[p] = next;
          schedule_transition(person, next);
        }
        mark_[p] = 0;
        ++partial.counts[static_cast<std::size_t>(state_[p])];
      }
    });
  }

  void reduce_day(DayStats& stats) {
    std::fill(counts_.begin(), counts_.end(), 0);
    for (const Partials& partial : partials_) {
      for (std::size_t s = 0; s < counts_.size(); ++s)
        counts_[s] += partial.counts[s];
      stats.seed_infections += partial.seed_infections;
      stats.new_infections += partial.seed_infections + partial.contact_infections;
      stats.exposure_records += partial.records_received;
      stats.traversed_edges += partial.candidates;
      stats.locations_evaluated += partial.evaluated;
      stats.locations_skipped += partial.skipped;
      stats.snapshot_updates += partial.snapshot_updates;
      if (cfg_.record_infections)
        infection_log_.insert(infection_log_.end(), partial.events.begin(),
                              partial.events.end());
    }
    stats.state_counts = counts_;
    cumulative_infections_ += stats.new_infections;

    std::int64_t total = 0;
    for (const std::int64_t count : counts_) total += count;
    if (total != static_cast<std::int64_t>(pop_.people.size()))
      throw std::logic_error("state counts no longer sum to the population size");
  }

  void evaluate_interventions() {
    if (cfg_.interventions.empty()) return;
    std::int64_t infectious_now = 0;
    for (std::size_t s = 0; s < counts_.size(); ++s)
      if (model_.states[s].infectivity > 0.0) infectious_now += counts_[s];

    InterventionContext ctx;
    ctx.population = &pop_;
    ctx.disease = &model_;
    ctx.beta_susceptibility = beta_sus_;
    ctx.beta_infectivity = beta_inf_;
    ctx.health = state_;

    const std::vector<bool> desired = evaluate_triggers(
        cfg_.interventions, intervention_states_, day_, infectious_now);
    for (std::size_t k = 0; k < cfg_.interventions.size(); ++k) {
      const InterventionSpec& spec = cfg_.interventions[k];
      InterventionState& state = intervention_states_[k];
      if (desired[k] && !state.active) {
        // An irreversible intervention applies at most once; its effect is already
        // in place if it ever fired before.
        if (!spec.reversible && state.ever_applied) continue;
        apply_action(spec, ctx, state);
      } else if (!desired[k] && state.active) {
        if (spec.reversible)
          revert_action(spec, ctx, state);
        else
          state.active = false;  // effect persists
      }
    }

    active_suppressions_.clear();
    for (std::size_t k = 0; k < cfg_.interventions.size(); ++k) {
      const InterventionSpec& spec = cfg_.interventions[k];
      const InterventionState& state = intervention_states_[k];
      const bool effective =
          state.active || (!spec.reversible && state.ever_applied);
      if (spec.action == ActionKind::kSuppressVisits && effective &&
          !state.mask.empty())
        active_suppressions_.emplace_back(&spec, &state);
    }
  }

  const Population& pop_;
  const DiseaseModel& model_;
  RunConfig cfg_;

  PartitionMap pmap_;
  std::vector<std::vector<PersonIndex>> partition_people_;
  std::vector<std::vector<LocationIndex>> partition_locations_;

  // Visitor bookkeeping (see build_visitor_index).
  std::vector<std::vector<PersonIndex>> cache_people_;        // per location partition
  std::vector<std::vector<VisitorSnapshot>> caches_;          // parallel to cache_people_
  std::vector<std::size_t> send_offsets_;                     // per person, into send_entries_
  std::vector<std::pair<std::int32_t, std::int32_t>> send_entries_;  // (partition, slot)
  std::vector<std::int32_t> visit_slot_;                      // per visit

  // Person state (indexed by person).
  std::vector<StateIndex> state_;
  std::vector<int> days_left_;
  std::vector<StateIndex> next_state_;
  std::vector<double> beta_sus_;
  std::vector<double> beta_inf_;
  std::vector<VisitorSnapshot> last_sent_;
  std::vector<std::uint8_t> mark_;  // per-day: 1 seeded, 2 contact-infected

  std::vector<double> contact_;      // per location
  std::vector<std::int64_t> counts_;  // per disease state
  std::int64_t cumulative_infections_ = 0;

  std::vector<std::vector<SnapshotMail>> psc_out_;  // [from person part][to location part]
  std::vector<std::vector<RecordMail>> ecc_out_;    // [from location part][to person part]
  std::vector<Partials> partials_;
  std::vector<WorkerScratch> scratch_;
  std::unique_ptr<WorkerPool> pool_;

  std::vector<InterventionState> intervention_states_;
  std::vector<std::pair<const InterventionSpec*, const InterventionState*>>
      active_suppressions_;
  std::vector<PersonIndex> seeded_;

  std::vector<InfectionEvent> infection_log_;
  std::vector<ExposureRecord> exposure_log_;

  int day_ = 0;
  double setup_seconds_ = 0.0;
  double loop_seconds_ = 0.0;
};

}  // namespace episim
