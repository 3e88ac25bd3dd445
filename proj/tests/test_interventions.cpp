#include <cmath>
#include <string>
#include <vector>

#include <catch_amalgamated.hpp>

#include "episim/interventions.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using episim::ActionKind;
using episim::InterventionContext;
using episim::InterventionSpec;
using episim::InterventionState;
using episim::Population;
using episim::TargetKind;

namespace {

std::string data_path(const std::string& relative) {
  return std::string(EPISIM_DATA_DIR) + "/" + relative;
}

std::vector<InterventionSpec> from_text(const std::string& text) {
  return episim::parse_interventions(episim::parse_config_text(text, "inline"));
}

// Five people (ages 10..74, alternating worker flag) in two locations, the
// second location flagged as a school.
Population small_population() {
  Population pop;
  pop.locations.resize(2);
  pop.location_attribute_names.push_back("is_school");
  pop.locations[0].attributes = {0.0};
  pop.locations[1].attributes = {1.0};
  pop.person_attribute_names.push_back("worker");
  pop.people.resize(5);
  for (std::size_t i = 0; i < 5; ++i) {
    pop.people[i].id = static_cast<std::int64_t>(i);
    pop.people[i].age = 10 + static_cast<int>(i) * 16;  // 10, 26, 42, 58, 74
    pop.people[i].home_location = 0;
    pop.people[i].attributes = {static_cast<double>(i % 2)};
  }
  return pop;
}

struct ContextFixture {
  Population pop = small_population();
  std::vector<double> beta_sus = {1.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<double> beta_inf = {1.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<episim::StateIndex> health = {0, 0, 1, 0, 2};

  InterventionContext context() {
    InterventionContext ctx;
    ctx.population = &pop;
    ctx.beta_susceptibility = beta_sus;
    ctx.beta_infectivity = beta_inf;
    ctx.health = health;
    return ctx;
  }
};

}  // namespace

TEST_CASE("sample intervention files parse", "[interventions]") {
  SECTION("school closure") {
    const auto specs =
        episim::load_interventions(data_path("interventions/school_closure.ivn"));
    REQUIRE(specs.size() == 1);
    const InterventionSpec& spec = specs.front();
    CHECK(spec.name == "school_closure");
    CHECK(spec.trigger.threshold_on == 100);
    CHECK(spec.trigger.threshold_off == 90);
    CHECK_FALSE(spec.trigger.day_from.has_value());
    CHECK(spec.target == TargetKind::kLocation);
    REQUIRE(spec.selector.size() == 1);
    CHECK(spec.selector.front().attribute == "is_school");
    CHECK(spec.action == ActionKind::kSuppressVisits);
    CHECK(spec.amount == 1.0);
    CHECK(spec.reversible);
  }

  SECTION("vaccination") {
    const auto specs =
        episim::load_interventions(data_path("interventions/vaccination.ivn"));
    REQUIRE(specs.size() == 1);
    const InterventionSpec& spec = specs.front();
    CHECK(spec.name == "vaccination");
    CHECK_FALSE(spec.trigger.threshold_on.has_value());
    CHECK(spec.trigger.day_from == 5);
    CHECK(spec.target == TargetKind::kPerson);
    CHECK(spec.action == ActionKind::kScaleSusceptibility);
    CHECK(spec.amount == 0.1);
    CHECK_FALSE(spec.reversible);
  }
}

TEST_CASE("threshold triggers latch with hysteresis", "[interventions]") {
  const auto specs = from_text(R"(
    intervention closures {
      threshold_on 100
      threshold_off 90
      target location
      action suppress_visits 1.0
    }
  )");
  REQUIRE(specs.size() == 1);
  InterventionState state;

  const std::int64_t counts[] = {50, 100, 95, 89, 100};
  const bool expected[] = {false, true, true, false, true};
  for (int day = 0; day < 5; ++day) {
    INFO("day " << day << ", infectious " << counts[day]);
    CHECK(episim::trigger_desires_active(specs[0], state, day, counts[day]) ==
          expected[day]);
  }

  SECTION("threshold_off defaults to threshold_on") {
    const auto simple = from_text(R"(
      intervention simple {
        threshold_on 10
        target location
        action suppress_visits 1.0
      }
    )");
    InterventionState latch;
    CHECK(episim::trigger_desires_active(simple[0], latch, 0, 10));
    CHECK(episim::trigger_desires_active(simple[0], latch, 1, 10));
    CHECK_FALSE(episim::trigger_desires_active(simple[0], latch, 2, 9));
  }
}

TEST_CASE("day windows bound the active period", "[interventions]") {
  const auto specs = from_text(R"(
    intervention window_only {
      day_from 3
      day_to 5
      target person
      action scale_infectivity 0.5
    }
    intervention with_threshold {
      threshold_on 10
      day_from 4
      target person
      action scale_infectivity 0.5
    }
  )");
  REQUIRE(specs.size() == 2);
  std::vector<InterventionState> states(2);

  SECTION("window alone") {
    for (int day = 0; day < 8; ++day) {
      const bool expected = day >= 3 && day <= 5;
      CHECK(episim::trigger_desires_active(specs[0], states[0], day, 0) == expected);
    }
  }

  SECTION("threshold and window must both hold") {
    // Infectious count crosses the threshold on day 2, before the window.
    CHECK_FALSE(episim::trigger_desires_active(specs[1], states[1], 2, 50));
    CHECK(episim::trigger_desires_active(specs[1], states[1], 4, 50));
    // The latch carries across days inside the window.
    CHECK(episim::trigger_desires_active(specs[1], states[1], 5, 20));
    CHECK_FALSE(episim::trigger_desires_active(specs[1], states[1], 6, 5));
  }

  SECTION("evaluate_triggers covers every spec") {
    const auto desired = episim::evaluate_triggers(specs, states, 4, 50);
    REQUIRE(desired.size() == 2);
    CHECK(desired[0]);
    CHECK(desired[1]);
  }
}

TEST_CASE("selectors pick entities by attribute, age, and health",
          "[interventions]") {
  ContextFixture fixture;
  const auto ctx = fixture.context();

  const auto selected = [&](const std::string& block_body) {
    const auto specs = from_text("intervention probe {\n" + block_body +
                                 "\naction suppress_visits 1.0\n}\n");
    return episim::select_entities(specs.front(), ctx);
  };

  SECTION("age comparison") {
    CHECK(selected("target person\nselect age >= 58") ==
          std::vector<std::int32_t>{3, 4});
    CHECK(selected("target person\nselect age < 27") ==
          std::vector<std::int32_t>{0, 1});
  }

  SECTION("named attribute") {
    CHECK(selected("target person\nselect worker == 1") ==
          std::vector<std::int32_t>{1, 3});
  }

  SECTION("conjunction of terms") {
    CHECK(selected("target person\nselect worker == 1\nselect age > 30") ==
          std::vector<std::int32_t>{3});
  }

  SECTION("empty selector matches everyone") {
    CHECK(selected("target person") ==
          std::vector<std::int32_t>{0, 1, 2, 3, 4});
    CHECK(selected("target person\nselect all") ==
          std::vector<std::int32_t>{0, 1, 2, 3, 4});
  }

  SECTION("missing attribute matches nobody") {
    CHECK(selected("target person\nselect income > 0").empty());
  }

  SECTION("location attributes") {
    CHECK(selected("target location\nselect is_school == 1") ==
          std::vector<std::int32_t>{1});
    CHECK(selected("target location\nselect is_school != 1") ==
          std::vector<std::int32_t>{0});
  }

  SECTION("health state") {
    // health = {0, 0, 1, 0, 2}; state 1 is "I" in a model where index 1 = I.
    const auto model = episim::parse_disease_model(episim::parse_config_text(R"(
      exposed_state I
      state S {
        susceptibility 1
      }
      state I {
        infectivity 1
        transition R 1.0 fixed 2
      }
      state R {
      }
      entry {
        default -> S
      }
    )"));
    InterventionContext with_disease = ctx;
    with_disease.disease = &model;
    auto specs = from_text(
        "intervention probe {\ntarget person\nselect health I\n"
        "action suppress_visits 1.0\n}\n");
    CHECK(episim::select_entities(specs.front(), with_disease) ==
          std::vector<std::int32_t>{2});

    // Health terms require person targets and a disease model.
    specs = from_text(
        "intervention probe {\ntarget location\nselect health I\n"
        "action suppress_visits 1.0\n}\n");
    CHECK(episim::select_entities(specs.front(), with_disease).empty());
    specs = from_text(
        "intervention probe {\ntarget person\nselect health I\n"
        "action suppress_visits 1.0\n}\n");
    CHECK(episim::select_entities(specs.front(), ctx).empty());
  }

  SECTION("selection does not mutate the context") {
    const auto before_sus = fixture.beta_sus;
    const auto before_people = fixture.pop.people;
    (void)selected("target person\nselect age >= 58");
    CHECK(fixture.beta_sus == before_sus);
    CHECK(fixture.pop.people == before_people);
  }
}

TEST_CASE("scale actions apply and revert bit for bit", "[interventions]") {
  ContextFixture fixture;
  // Values with no short binary expansion, to make bit restoration count.
  fixture.beta_sus = {1.0 / 3.0, 0.1, 0.7, 1.0 / 7.0, 2.0 / 3.0};
  const auto original = fixture.beta_sus;
  auto ctx = fixture.context();

  const auto specs = from_text(R"(
    intervention protect_seniors {
      target person
      select age >= 58
      action scale_susceptibility 0.35
      reversible true
    }
  )");
  InterventionState state;

  episim::apply_action(specs.front(), ctx, state);
  CHECK(state.active);
  CHECK(state.ever_applied);
  CHECK(state.affected == std::vector<std::int32_t>{3, 4});
  REQUIRE(state.mask.size() == 5);
  CHECK(state.mask[3] == 1);
  CHECK(state.mask[0] == 0);
  CHECK(fixture.beta_sus[3] == original[3] * 0.35);
  CHECK(fixture.beta_sus[4] == original[4] * 0.35);
  CHECK(fixture.beta_sus[0] == original[0]);

  episim::revert_action(specs.front(), ctx, state);
  CHECK_FALSE(state.active);
  CHECK(state.ever_applied);  // history survives the revert
  CHECK(state.affected.empty());
  for (std::size_t i = 0; i < original.size(); ++i) {
    INFO("person " << i);
    CHECK(fixture.beta_sus[i] == original[i]);  // exact, not approximate
  }

  SECTION("infectivity scaling works the same way") {
    const auto inf_specs = from_text(R"(
      intervention dampen {
        target person
        action scale_infectivity 0.25
        reversible true
      }
    )");
    const auto before = fixture.beta_inf;
    InterventionState inf_state;
    episim::apply_action(inf_specs.front(), ctx, inf_state);
    for (std::size_t i = 0; i < before.size(); ++i)
      CHECK(fixture.beta_inf[i] == before[i] * 0.25);
    episim::revert_action(inf_specs.front(), ctx, inf_state);
    CHECK(fixture.beta_inf == before);
  }

  SECTION("the frozen selection ignores later attribute changes") {
    episim::apply_action(specs.front(), ctx, state);
    const auto frozen = state.affected;
    fixture.pop.people[0].age = 99;  // would match if re-selected
    CHECK(state.affected == frozen);
    episim::revert_action(specs.front(), ctx, state);
  }
}

TEST_CASE("irreversible specs refuse to revert", "[interventions]") {
  ContextFixture fixture;
  auto ctx = fixture.context();
  const auto specs =
      episim::load_interventions(data_path("interventions/vaccination.ivn"));
  InterventionState state;

  episim::apply_action(specs.front(), ctx, state);
  CHECK(fixture.beta_sus[4] == 0.1);  // age 74 matches
  CHECK_THROWS_MATCHES(
      episim::revert_action(specs.front(), ctx, state), std::logic_error,
      Catch::Matchers::MessageMatches(ContainsSubstring("irreversible")));
}

TEST_CASE("suppression draws are keyed and reproducible", "[interventions]") {
  const auto specs = from_text(R"(
    intervention half {
      target location
      action suppress_visits 0.5
    }
    intervention total {
      target location
      action suppress_visits 1.0
    }
    intervention none {
      target location
      action suppress_visits 0.0
    }
  )");
  const std::uint64_t seed = 31;

  SECTION("extremes short-circuit") {
    for (episim::VisitIndex v = 0; v < 50; ++v) {
      CHECK(episim::visit_suppressed(specs[1], seed, 3, v));
      CHECK_FALSE(episim::visit_suppressed(specs[2], seed, 3, v));
    }
  }

  SECTION("half rate hits about half the visits, deterministically") {
    int suppressed = 0;
    constexpr int kVisits = 20000;
    for (episim::VisitIndex v = 0; v < kVisits; ++v) {
      const bool first = episim::visit_suppressed(specs[0], seed, 3, v);
      const bool again = episim::visit_suppressed(specs[0], seed, 3, v);
      REQUIRE(first == again);
      if (first) ++suppressed;
    }
    CHECK_THAT(static_cast<double>(suppressed) / kVisits, WithinAbs(0.5, 0.02));
  }

  SECTION("day, name, and visit all key the draw") {
    int differ_by_day = 0, differ_by_name = 0, differ_by_visit = 0;
    for (episim::VisitIndex v = 0; v < 1000; ++v) {
      const bool base = episim::visit_suppressed(specs[0], seed, 3, v);
      differ_by_day += base != episim::visit_suppressed(specs[0], seed, 4, v);
      differ_by_name += base != episim::visit_suppressed(
                                    from_text(R"(
          intervention other {
            target location
            action suppress_visits 0.5
          }
        )")[0],
                                    seed, 3, v);
      differ_by_visit += base != episim::visit_suppressed(specs[0], seed, 3, v + 5000);
    }
    CHECK(differ_by_day > 300);
    CHECK(differ_by_name > 300);
    CHECK(differ_by_visit > 300);
  }
}

TEST_CASE("intervention files are validated", "[interventions]") {
  SECTION("scale actions need person targets") {
    CHECK_THROWS_MATCHES(from_text(R"(
        intervention bad {
          target location
          action scale_susceptibility 0.5
        }
      )"),
                         episim::ParseError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("persons only")));
  }

  SECTION("suppression fraction range") {
    CHECK_THROWS_AS(from_text(R"(
        intervention bad {
          target location
          action suppress_visits 1.5
        }
      )"),
                    episim::ParseError);
  }

  SECTION("negative scale factor") {
    CHECK_THROWS_AS(from_text(R"(
        intervention bad {
          target person
          action scale_infectivity -2
        }
      )"),
                    episim::ParseError);
  }

  SECTION("duplicate names") {
    CHECK_THROWS_MATCHES(from_text(R"(
        intervention twin {
          target person
          action suppress_visits 1.0
        }
        intervention twin {
          target person
          action suppress_visits 1.0
        }
      )"),
                         episim::ParseError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("duplicate")));
  }

  SECTION("missing target or action") {
    CHECK_THROWS_MATCHES(from_text(R"(
        intervention bad {
          action suppress_visits 1.0
        }
      )"),
                         episim::ParseError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("'target'")));
    CHECK_THROWS_MATCHES(from_text(R"(
        intervention bad {
          target person
        }
      )"),
                         episim::ParseError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("'action'")));
  }

  SECTION("unknown action or comparison") {
    CHECK_THROWS_AS(from_text(R"(
        intervention bad {
          target person
          action quarantine 1.0
        }
      )"),
                    episim::ParseError);
    CHECK_THROWS_AS(from_text(R"(
        intervention bad {
          target person
          select age ~ 30
          action suppress_visits 1.0
        }
      )"),
                    episim::ParseError);
  }

  SECTION("unnamed block") {
    CHECK_THROWS_MATCHES(from_text("intervention {\ntarget person\n}\n"),
                         episim::ParseError,
                         Catch::Matchers::MessageMatches(
                             ContainsSubstring("needs a name")));
  }

  SECTION("stray top-level line") {
    CHECK_THROWS_AS(from_text("target person\n"), episim::ParseError);
  }

  SECTION("reversible must be boolean") {
    CHECK_THROWS_AS(from_text(R"(
        intervention bad {
          target person
          action suppress_visits 1.0
          reversible maybe
        }
      )"),
                    episim::ParseError);
  }
}
