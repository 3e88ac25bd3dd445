#pragma once

// Disease progression as a finite state machine. Each state carries a
// susceptibility multiplier sus(x) and an infectivity multiplier inf(x);
// outgoing edges carry a branch probability and a dwell-time distribution in
// whole days. People enter the model through attribute-based entry rules and
// move to `exposed_state` when infected.
//
// File format (see data/disease/ for examples):
//
//   name sir                      # optional
//   exposed_state I
//   state S {
//     susceptibility 1
//   }
//   state I {
//     infectivity 1
//     transition R 1.0 fixed 5    # or: uniform LO HI | discrete d w d w ...
//   }
//   state R {
//   }
//   entry {
//     age < 18 -> S               # evaluated top to bottom
//     default -> S                # last rule must be the catch-all
//   }
//
// One setting per line; a block opener's `{` ends its line and `}` stands
// alone.
//
// Dwell times are at least one day, so a person makes at most one transition
// per day; the countdown starts the day after the state is entered.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "episim/config_text.hpp"
#include "episim/population.hpp"
#include "episim/rng.hpp"
#include "episim/types.hpp"

namespace episim {

struct DwellDistribution {
  enum class Kind { kFixed, kUniform, kDiscrete };

  Kind kind = Kind::kFixed;
  int fixed_days = 1;
  int uniform_lo = 1, uniform_hi = 1;           // inclusive
  std::vector<std::pair<int, double>> discrete;  // (days, weight)

  int sample(rng::KeyedStream& stream) const {
    switch (kind) {
      case Kind::kFixed:
        return fixed_days;
      case Kind::kUniform:
        return uniform_lo +
               static_cast<int>(stream.next_below(
                   static_cast<std::uint64_t>(uniform_hi - uniform_lo + 1)));
      case Kind::kDiscrete: {
        const double u = stream.next_unit();
        double cumulative = 0.0;
        for (const auto& [days, weight] : discrete) {
          cumulative += weight;
          if (u < cumulative) return days;
        }
        return discrete.back().first;  // guard against rounding at u ~ 1
      }
    }
    return fixed_days;
  }
};

struct Transition {
  StateIndex next = -1;
  double probability = 0.0;
  DwellDistribution dwell;
};

struct DiseaseState {
  std::string name;
  double susceptibility = 0.0;
  double infectivity = 0.0;
  std::vector<Transition> transitions;  // empty for terminal states
};

struct EntryRule {
  bool is_default = false;
  std::string attribute;  // "age" or a named person attribute
  CompareOp op = CompareOp::kEq;
  double value = 0.0;
  StateIndex state = -1;
};

struct DiseaseModel {
  std::string name;
  std::vector<DiseaseState> states;
  std::vector<EntryRule> entry_rules;  // last rule is the catch-all
  StateIndex exposed_state = -1;

  StateIndex state_index(std::string_view state_name) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i].name == state_name) return static_cast<StateIndex>(i);
    return -1;
  }

  bool is_susceptible(StateIndex state) const {
    return states[static_cast<std::size_t>(state)].susceptibility > 0.0;
  }

  bool is_infectious(StateIndex state) const {
    return states[static_cast<std::size_t>(state)].infectivity > 0.0;
  }

  bool is_terminal(StateIndex state) const {
    return states[static_cast<std::size_t>(state)].transitions.empty();
  }

  // Initial state for a person: first entry rule whose predicate matches.
  // A missing attribute never matches; the final catch-all always does.
  StateIndex entry_state(const Population& pop, PersonIndex person) const {
    for (const EntryRule& rule : entry_rules) {
      if (rule.is_default) return rule.state;
      const auto value = person_attribute_value(pop, person, rule.attribute);
      if (value && compare(rule.op, *value, rule.value)) return rule.state;
    }
    throw std::logic_error("disease model has no catch-all entry rule");
  }

  // Draws (next state, dwell days) for a state being entered or left.
  // Word 0 of the stream picks the branch, later words feed the dwell draw.
  std::pair<StateIndex, int> sample_transition(StateIndex state,
                                               rng::KeyedStream& stream) const {
    const DiseaseState& from = states[static_cast<std::size_t>(state)];
    if (from.transitions.empty())
      throw std::logic_error("sample_transition: state '" + from.name +
                             "' is terminal");
    const double u = stream.next_unit();
    double cumulative = 0.0;
    const Transition* chosen = &from.transitions.back();
    for (const Transition& transition : from.transitions) {
      cumulative += transition.probability;
      if (u < cumulative) {
        chosen = &transition;
        break;
      }
    }
    return {chosen->next, chosen->dwell.sample(stream)};
  }

  void validate() const {
    if (states.empty()) throw ValidationError("disease model: no states");
    for (std::size_t i = 0; i < states.size(); ++i) {
      const DiseaseState& state = states[i];
      if (state.name.empty())
        throw ValidationError("disease model: state without a name");
      for (std::size_t j = 0; j < i; ++j)
        if (states[j].name == state.name)
          throw ValidationError("disease model: duplicate state '" + state.name + "'");
      if (!(state.susceptibility >= 0.0) || !std::isfinite(state.susceptibility) ||
          !(state.infectivity >= 0.0) || !std::isfinite(state.infectivity))
        throw ValidationError("state '" + state.name +
                              "': multipliers must be finite and >= 0");
      if (state.susceptibility > 0.0 && state.infectivity > 0.0)
        throw ValidationError("state '" + state.name +
                              "': a state cannot be both susceptible and infectious");
      double total = 0.0;
      for (const Transition& transition : state.transitions) {
        if (transition.next < 0 ||
            transition.next >= static_cast<StateIndex>(states.size()))
          throw ValidationError("state '" + state.name +
                                "': transition to unknown state");
        if (!(transition.probability >= 0.0 && transition.probability <= 1.0))
          throw ValidationError("state '" + state.name +
                                "': branch probability must be in [0, 1]");
        validate_dwell(state.name, transition.dwell);
        total += transition.probability;
      }
      if (!state.transitions.empty() && std::abs(total - 1.0) > 1e-9)
        throw ValidationError("state '" + state.name +
                              "': branch probabilities sum to " +
                              std::to_string(total) + ", expected 1");
    }
    if (exposed_state < 0 || exposed_state >= static_cast<StateIndex>(states.size()))
      throw ValidationError("disease model: exposed_state is not a known state");
    if (entry_rules.empty())
      throw ValidationError("disease model: no entry rules");
    for (const EntryRule& rule : entry_rules)
      if (rule.state < 0 || rule.state >= static_cast<StateIndex>(states.size()))
        throw ValidationError("disease model: entry rule names unknown state");
    if (!entry_rules.back().is_default)
      throw ValidationError("disease model: last entry rule must be 'default'");
    for (std::size_t i = 0; i + 1 < entry_rules.size(); ++i)
      if (entry_rules[i].is_default)
        throw ValidationError("disease model: 'default' entry rule must be last");
  }

 private:
  static void validate_dwell(const std::string& state_name,
                             const DwellDistribution& dwell) {
    const std::string prefix = "state '" + state_name + "': dwell ";
    switch (dwell.kind) {
      case DwellDistribution::Kind::kFixed:
        if (dwell.fixed_days < 1)
          throw ValidationError(prefix + "must be at least one day");
        break;
      case DwellDistribution::Kind::kUniform:
        if (dwell.uniform_lo < 1 || dwell.uniform_hi < dwell.uniform_lo)
          throw ValidationError(prefix + "range must satisfy 1 <= lo <= hi");
        break;
      case DwellDistribution::Kind::kDiscrete: {
        if (dwell.discrete.empty())
          throw ValidationError(prefix + "needs at least one (days, weight) pair");
        double total = 0.0;
        for (const auto& [days, weight] : dwell.discrete) {
          if (days < 1) throw ValidationError(prefix + "must be at least one day");
          if (!(weight >= 0.0)) throw ValidationError(prefix + "weights must be >= 0");
          total += weight;
        }
        if (std::abs(total - 1.0) > 1e-9)
          throw ValidationError(prefix + "weights sum to " + std::to_string(total) +
                                ", expected 1");
        break;
      }
    }
  }
};

namespace detail {

inline DwellDistribution parse_dwell(const ConfigFile& file, const ConfigLine& line,
                                     std::size_t from_token) {
  DwellDistribution dwell;
  const auto& tokens = line.tokens;
  if (from_token >= tokens.size())
    file.fail(line.line, "transition is missing a dwell distribution");
  const std::string& kind = tokens[from_token];
  const std::size_t argc = tokens.size() - from_token - 1;
  if (kind == "fixed") {
    if (argc != 1) file.fail(line.line, "'fixed' takes one argument: days");
    dwell.kind = DwellDistribution::Kind::kFixed;
    dwell.fixed_days = static_cast<int>(file.integer(line, tokens[from_token + 1]));
  } else if (kind == "uniform") {
    if (argc != 2) file.fail(line.line, "'uniform' takes two arguments: lo hi");
    dwell.kind = DwellDistribution::Kind::kUniform;
    dwell.uniform_lo = static_cast<int>(file.integer(line, tokens[from_token + 1]));
    dwell.uniform_hi = static_cast<int>(file.integer(line, tokens[from_token + 2]));
  } else if (kind == "discrete") {
    if (argc == 0 || argc % 2 != 0)
      file.fail(line.line, "'discrete' takes (days, weight) pairs");
    dwell.kind = DwellDistribution::Kind::kDiscrete;
    for (std::size_t i = from_token + 1; i < tokens.size(); i += 2)
      dwell.discrete.emplace_back(static_cast<int>(file.integer(line, tokens[i])),
                                  file.number(line, tokens[i + 1]));
  } else {
    file.fail(line.line, "unknown dwell distribution '" + kind +
                             "' (expected fixed, uniform, or discrete)");
  }
  return dwell;
}

}  // namespace detail

inline DiseaseModel parse_disease_model(const ConfigFile& file) {
  DiseaseModel model;
  std::string exposed_name;
  int exposed_line = 0;

  for (const ConfigLine& line : file.toplevel) {
    const std::string& key = line.tokens[0];
    if (key == "name" && line.tokens.size() == 2) {
      model.name = line.tokens[1];
    } else if (key == "exposed_state" && line.tokens.size() == 2) {
      exposed_name = line.tokens[1];
      exposed_line = line.line;
    } else {
      file.fail(line.line, "unknown setting '" + key + "'");
    }
  }

  // First pass: declare states so transitions can refer forward.
  for (const ConfigBlock& block : file.blocks) {
    if (block.kind == "state") {
      if (block.name.empty()) file.fail(block.line, "state block needs a name");
      DiseaseState state;
      state.name = block.name;
      model.states.push_back(std::move(state));
    } else if (block.kind != "entry") {
      file.fail(block.line, "unknown block '" + block.kind + "'");
    }
  }

  std::size_t state_cursor = 0;
  bool saw_entry = false;
  for (const ConfigBlock& block : file.blocks) {
    if (block.kind == "state") {
      DiseaseState& state = model.states[state_cursor++];
      for (const ConfigLine& line : block.lines) {
        const std::string& key = line.tokens[0];
        if (key == "susceptibility" && line.tokens.size() == 2) {
          state.susceptibility = file.number(line, line.tokens[1]);
        } else if (key == "infectivity" && line.tokens.size() == 2) {
          state.infectivity = file.number(line, line.tokens[1]);
        } else if (key == "transition" && line.tokens.size() >= 3) {
          Transition transition;
          transition.next = model.state_index(line.tokens[1]);
          if (transition.next < 0)
            file.fail(line.line, "transition to unknown state '" + line.tokens[1] + "'");
          transition.probability = file.number(line, line.tokens[2]);
          transition.dwell = detail::parse_dwell(file, line, 3);
          state.transitions.push_back(std::move(transition));
        } else {
          file.fail(line.line, "unknown state setting '" + key + "'");
        }
      }
    } else {  // entry block
      if (saw_entry) file.fail(block.line, "only one entry block is allowed");
      saw_entry = true;
      for (const ConfigLine& line : block.lines) {
        EntryRule rule;
        const auto& tokens = line.tokens;
        // "default -> STATE" or "ATTR OP VALUE -> STATE"
        if (tokens.size() == 3 && tokens[0] == "default" && tokens[1] == "->") {
          rule.is_default = true;
          rule.state = model.state_index(tokens[2]);
        } else if (tokens.size() == 5 && tokens[3] == "->") {
          rule.attribute = tokens[0];
          const auto op = parse_compare_op(tokens[1]);
          if (!op) file.fail(line.line, "unknown comparison '" + tokens[1] + "'");
          rule.op = *op;
          rule.value = file.number(line, tokens[2]);
          rule.state = model.state_index(tokens[4]);
        } else {
          file.fail(line.line,
                    "entry rule must be 'ATTR OP VALUE -> STATE' or 'default -> STATE'");
        }
        if (rule.state < 0) file.fail(line.line, "entry rule names unknown state");
        model.entry_rules.push_back(std::move(rule));
      }
    }
  }

  if (exposed_name.empty())
    throw ValidationError(file.path + ": missing 'exposed_state' setting");
  model.exposed_state = model.state_index(exposed_name);
  if (model.exposed_state < 0)
    file.fail(exposed_line, "exposed_state '" + exposed_name + "' is not a known state");

  model.validate();
  return model;
}

inline DiseaseModel load_disease_model(const std::string& path) {
  return parse_disease_model(parse_config_file(path));
}

}  // namespace episim
