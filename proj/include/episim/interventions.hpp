#pragma once

// Interventions: (trigger, selector, action) triples evaluated at the end of
// every simulated day against the current infectious count; changes take
// effect the following day.
//
// File format (see data/interventions/ for examples):
//
//   intervention school_closure {
//     threshold_on 100            # activate at >= 100 infectious...
//     threshold_off 90            # ...deactivate below 90 (defaults to on)
//     day_from 1                  # optional active-day window, inclusive
//     day_to 200
//     target location             # or: person
//     select is_school == 1       # AND of attribute comparisons
//     action suppress_visits 1.0  # or: scale_susceptibility F | scale_infectivity F
//     reversible true
//   }
//
// Person selectors may also test the current health state with
// `select health STATE`. The selector is evaluated once, when the trigger
// fires; the affected set stays frozen until deactivation.
//
// suppress_visits drops each affected location's (or person's) visits
// independently with the given fraction, re-drawn per day, keyed by
// (day, intervention name, visit), so a closed-and-reopened location resumes its
// exact schedule. scale_* multiplies the person's transmission weight and
// records the prior value; deactivating restores those bits. Irreversible
// interventions keep their effect once applied; asking them to revert is a contract
// violation.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "episim/config_text.hpp"
#include "episim/disease.hpp"
#include "episim/population.hpp"
#include "episim/rng.hpp"
#include "episim/types.hpp"

namespace episim {

enum class ActionKind { kSuppressVisits, kScaleSusceptibility, kScaleInfectivity };
enum class TargetKind { kPerson, kLocation };

struct SelectorTerm {
  std::string attribute;  // "age", "health", or a named attribute
  CompareOp op = CompareOp::kEq;
  double value = 0.0;
  std::string health_state;  // used instead of value when attribute == "health"
};

struct InterventionTrigger {
  std::optional<std::int64_t> threshold_on;
  std::optional<std::int64_t> threshold_off;  // defaults to threshold_on
  std::optional<int> day_from;                // inclusive
  std::optional<int> day_to;                  // inclusive
};

struct InterventionSpec {
  std::string name;
  InterventionTrigger trigger;
  TargetKind target = TargetKind::kPerson;
  std::vector<SelectorTerm> selector;  // conjunction; empty selects everything
  ActionKind action = ActionKind::kSuppressVisits;
  double amount = 0.0;  // suppression fraction or scale factor
  bool reversible = true;

  std::uint64_t name_hash() const { return rng::fnv1a64(name); }
};

// Mutable runtime record per intervention. `latched` is the hysteresis flag of the
// threshold trigger; `affected`/`saved` hold the frozen selection and the
// pre-action values needed to undo it; `mask` answers "is this entity
// affected" in O(1) during visit filtering.
struct InterventionState {
  bool active = false;
  bool latched = false;
  bool ever_applied = false;
  std::vector<std::int32_t> affected;
  std::vector<double> saved;
  std::vector<std::uint8_t> mask;
};

// What actions operate on: the immutable population plus the engine's
// mutable per-person transmission weights and current health states.
struct InterventionContext {
  const Population* population = nullptr;
  const DiseaseModel* disease = nullptr;
  std::span<double> beta_susceptibility;  // by person index
  std::span<double> beta_infectivity;
  std::span<const StateIndex> health;  // may be empty when no health terms are used
};

// Trigger evaluation for one intervention at the end of `day`, updating
// the hysteresis latch in `state`. With a threshold, it wants to be active
// from the day the count reaches threshold_on until it drops below
// threshold_off; the day window applies on top.
inline bool trigger_desires_active(const InterventionSpec& spec,
                                   InterventionState& state, int day,
                                   std::int64_t infectious_count) {
  const InterventionTrigger& trigger = spec.trigger;
  bool threshold_ok = true;
  if (trigger.threshold_on) {
    const std::int64_t off = trigger.threshold_off.value_or(*trigger.threshold_on);
    if (!state.latched && infectious_count >= *trigger.threshold_on)
      state.latched = true;
    else if (state.latched && infectious_count < off)
      state.latched = false;
    threshold_ok = state.latched;
  }
  const bool in_window = (!trigger.day_from || day >= *trigger.day_from) &&
                         (!trigger.day_to || day <= *trigger.day_to);
  return threshold_ok && in_window;
}

// Evaluates every trigger and returns the desired active flags, updating
// latches in place. Runs on the control thread only.
inline std::vector<bool> evaluate_triggers(std::span<const InterventionSpec> specs,
                                           std::span<InterventionState> states,
                                           int day, std::int64_t infectious_count) {
  std::vector<bool> desired(specs.size(), false);
  for (std::size_t i = 0; i < specs.size(); ++i)
    desired[i] = trigger_desires_active(specs[i], states[i], day, infectious_count);
  return desired;
}

// Entities matching the intervention's selector, in index order.
inline std::vector<std::int32_t> select_entities(const InterventionSpec& spec,
                                                 const InterventionContext& ctx) {
  const Population& pop = *ctx.population;
  std::vector<std::int32_t> selected;
  const std::int32_t count = spec.target == TargetKind::kPerson
                                 ? static_cast<std::int32_t>(pop.people.size())
                                 : static_cast<std::int32_t>(pop.locations.size());
  for (std::int32_t i = 0; i < count; ++i) {
    bool match = true;
    for (const SelectorTerm& term : spec.selector) {
      if (term.attribute == "health") {
        if (spec.target != TargetKind::kPerson || ctx.health.empty() ||
            ctx.disease == nullptr) {
          match = false;
          break;
        }
        const StateIndex wanted = ctx.disease->state_index(term.health_state);
        const bool equal = ctx.health[static_cast<std::size_t>(i)] == wanted;
        match = term.op == CompareOp::kNe ? !equal : equal;
      } else {
        const auto value =
            spec.target == TargetKind::kPerson
                ? person_attribute_value(pop, i, term.attribute)
                : location_attribute_value(pop, i, term.attribute);
        match = value && compare(term.op, *value, term.value);
      }
      if (!match) break;
    }
    if (match) selected.push_back(i);
  }
  return selected;
}

// Applies the intervention's action to the current selection, freezing it in
// `state`. Scale actions record the prior weight per affected person so the
// exact bits can be restored on revert.
inline void apply_action(const InterventionSpec& spec, const InterventionContext& ctx,
                         InterventionState& state) {
  state.affected = select_entities(spec, ctx);
  state.saved.clear();
  const std::size_t universe = spec.target == TargetKind::kPerson
                                   ? ctx.population->people.size()
                                   : ctx.population->locations.size();
  state.mask.assign(universe, 0);
  for (const std::int32_t i : state.affected) state.mask[static_cast<std::size_t>(i)] = 1;

  if (spec.action == ActionKind::kScaleSusceptibility) {
    for (const std::int32_t i : state.affected) {
      state.saved.push_back(ctx.beta_susceptibility[static_cast<std::size_t>(i)]);
      ctx.beta_susceptibility[static_cast<std::size_t>(i)] *= spec.amount;
    }
  } else if (spec.action == ActionKind::kScaleInfectivity) {
    for (const std::int32_t i : state.affected) {
      state.saved.push_back(ctx.beta_infectivity[static_cast<std::size_t>(i)]);
      ctx.beta_infectivity[static_cast<std::size_t>(i)] *= spec.amount;
    }
  }
  // Suppression needs no mutation here: visits are filtered per day while
  // the intervention is active.
  state.active = true;
  state.ever_applied = true;
}

// Undoes a reversible intervention: restores saved weights bit-for-bit and clears
// the frozen selection. Reverting with nothing applied is a no-op; reverting
// an irreversible intervention is a programming error.
inline void revert_action(const InterventionSpec& spec, const InterventionContext& ctx,
                          InterventionState& state) {
  if (!spec.reversible)
    throw std::logic_error("intervention '" + spec.name + "' is irreversible");
  if (spec.action == ActionKind::kScaleSusceptibility) {
    for (std::size_t k = 0; k < state.affected.size(); ++k)
      ctx.beta_susceptibility[static_cast<std::size_t>(state.affected[k])] =
          state.saved[k];
  } else if (spec.action == ActionKind::kScaleInfectivity) {
    for (std::size_t k = 0; k < state.affected.size(); ++k)
      ctx.beta_infectivity[static_cast<std::size_t>(state.affected[k])] =
          state.saved[k];
  }
  state.affected.clear();
  state.saved.clear();
  state.mask.clear();
  state.active = false;
}

// Per-day suppression test for one visit under one active intervention. Keying by
// (day, intervention name, visit) makes the filter independent of evaluation order
// and lets a reactivated intervention reproduce its earlier decisions exactly.
inline bool visit_suppressed(const InterventionSpec& spec, std::uint64_t seed,
                             int day, VisitIndex visit) {
  if (spec.amount >= 1.0) return true;
  if (spec.amount <= 0.0) return false;
  return rng::draw_unit(seed, rng::Site::kSuppression,
                        static_cast<std::uint64_t>(day), spec.name_hash(),
                        static_cast<std::uint64_t>(visit)) < spec.amount;
}

inline std::vector<InterventionSpec> parse_interventions(const ConfigFile& file) {
  std::vector<InterventionSpec> specs;
  for (const ConfigLine& line : file.toplevel)
    file.fail(line.line, "expected 'intervention NAME { ... }' blocks only");
  for (const ConfigBlock& block : file.blocks) {
    if (block.kind != "intervention")
      file.fail(block.line, "unknown block '" + block.kind + "'");
    if (block.name.empty())
      file.fail(block.line, "intervention block needs a name");
    InterventionSpec spec;
    spec.name = block.name;
    for (const InterventionSpec& other : specs)
      if (other.name == spec.name)
        file.fail(block.line, "duplicate intervention '" + spec.name + "'");
    bool saw_target = false, saw_action = false;
    for (const ConfigLine& line : block.lines) {
      const auto& tokens = line.tokens;
      const std::string& key = tokens[0];
      if (key == "threshold_on" && tokens.size() == 2) {
        spec.trigger.threshold_on = file.integer(line, tokens[1]);
      } else if (key == "threshold_off" && tokens.size() == 2) {
        spec.trigger.threshold_off = file.integer(line, tokens[1]);
      } else if (key == "day_from" && tokens.size() == 2) {
        spec.trigger.day_from = static_cast<int>(file.integer(line, tokens[1]));
      } else if (key == "day_to" && tokens.size() == 2) {
        spec.trigger.day_to = static_cast<int>(file.integer(line, tokens[1]));
      } else if (key == "target" && tokens.size() == 2) {
        if (tokens[1] == "person") spec.target = TargetKind::kPerson;
        else if (tokens[1] == "location") spec.target = TargetKind::kLocation;
        else file.fail(line.line, "target must be 'person' or 'location'");
        saw_target = true;
      } else if (key == "select" && tokens.size() >= 2) {
        if (tokens.size() == 2 && tokens[1] == "all") continue;  // explicit no-op
        SelectorTerm term;
        if (tokens[1] == "health" && tokens.size() == 3) {
          term.attribute = "health";
          term.op = CompareOp::kEq;
          term.health_state = tokens[2];
        } else if (tokens.size() == 4) {
          term.attribute = tokens[1];
          const auto op = parse_compare_op(tokens[2]);
          if (!op) file.fail(line.line, "unknown comparison '" + tokens[2] + "'");
          term.op = *op;
          term.value = file.number(line, tokens[3]);
        } else {
          file.fail(line.line,
                    "select must be 'select ATTR OP VALUE', 'select health STATE', "
                    "or 'select all'");
        }
        spec.selector.push_back(std::move(term));
      } else if (key == "action" && tokens.size() == 3) {
        if (tokens[1] == "suppress_visits") spec.action = ActionKind::kSuppressVisits;
        else if (tokens[1] == "scale_susceptibility")
          spec.action = ActionKind::kScaleSusceptibility;
        else if (tokens[1] == "scale_infectivity")
          spec.action = ActionKind::kScaleInfectivity;
        else file.fail(line.line, "unknown action '" + tokens[1] + "'");
        spec.amount = file.number(line, tokens[2]);
        saw_action = true;
      } else if (key == "reversible" && tokens.size() == 2) {
        if (tokens[1] == "true") spec.reversible = true;
        else if (tokens[1] == "false") spec.reversible = false;
        else file.fail(line.line, "reversible must be 'true' or 'false'");
      } else {
        file.fail(line.line, "unknown intervention setting '" + key + "'");
      }
    }
    if (!saw_target) file.fail(block.line, "intervention needs a 'target' line");
    if (!saw_action) file.fail(block.line, "intervention needs an 'action' line");
    if (spec.action == ActionKind::kSuppressVisits &&
        !(spec.amount >= 0.0 && spec.amount <= 1.0))
      file.fail(block.line, "suppression fraction must be in [0, 1]");
    if (spec.action != ActionKind::kSuppressVisits) {
      if (spec.target != TargetKind::kPerson)
        file.fail(block.line, "scale actions apply to persons only");
      if (!(spec.amount >= 0.0))
        file.fail(block.line, "scale factor must be >= 0");
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

inline std::vector<InterventionSpec> load_interventions(const std::string& path) {
  return parse_interventions(parse_config_file(path));
}

}  // namespace episim
