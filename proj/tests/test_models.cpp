#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <catch_amalgamated.hpp>

#include "episim/models.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using episim::ContactModel;
using episim::ExposureRecord;

TEST_CASE("contact probability follows the saturating form", "[models]") {
  ContactModel model;  // A=5, B=40, alpha=1000

  SECTION("matches direct evaluation at representative occupancies") {
    for (const double n : {3.0, 10.0, 50.0, 417.0, 1000.0, 25000.0, 100000.0}) {
      const double direct =
          std::min(1.0, (5.0 + 35.0 * (1.0 - std::exp(-n / 1000.0))) / (n - 1.0));
      CHECK_THAT(model.probability(n), WithinRel(direct, 1e-12));
    }
  }

  SECTION("frozen values") {
    CHECK_THAT(model.probability(1000.0), WithinAbs(0.027151370929929447, 1e-15));
    CHECK_THAT(model.probability(50.0), WithinAbs(0.13687694168316347, 1e-15));
    // Saturation is total at n = 1e5, so the value is essentially B/(n-1).
    CHECK_THAT(model.probability(100000.0), WithinAbs(0.00040000400004000042, 1e-17));
    CHECK_THAT(model.probability(100000.0), WithinRel(40.0 / 99999.0, 1e-9));
  }

  SECTION("cap activates at small crowds") {
    // Raw value at n=2 is (5 + 35(1-e^{-0.002}))/1 > 5, so the cap binds.
    CHECK(model.probability(2.0) == 1.0);
    CHECK(model.probability(5.0) == 1.0);
  }

  SECTION("degenerate crowds of fewer than two people") {
    CHECK(model.probability(0.0) == 1.0);
    CHECK(model.probability(1.0) == 1.0);
    CHECK(model.probability(1.999) == 1.0);
  }

  SECTION("never increases with occupancy") {
    double previous = model.probability(2.0);
    for (int n = 3; n <= 100000; ++n) {
      const double current = model.probability(static_cast<double>(n));
      CHECK(current <= previous + 1e-15);
      if (current > previous + 1e-15) break;  // one report is enough
      previous = current;
    }
  }

  SECTION("legacy product numerator") {
    ContactModel legacy = model;
    legacy.product_numerator = true;
    CHECK_THAT(legacy.probability(1000.0), WithinAbs(0.11073182962462222, 1e-15));
    const double direct =
        std::min(1.0, 5.0 * 35.0 * (1.0 - std::exp(-1.0)) / 999.0);
    CHECK_THAT(legacy.probability(1000.0), WithinRel(direct, 1e-12));
  }

  SECTION("global mode ignores occupancy") {
    ContactModel global;
    global.kind = ContactModel::Kind::kGlobal;
    global.global_probability = 0.37;
    CHECK(global.probability(0.0) == 0.37);
    CHECK(global.probability(2.0) == 0.37);
    CHECK(global.probability(1e6) == 0.37);
  }
}

TEST_CASE("contact model validation", "[models]") {
  ContactModel model;
  CHECK_NOTHROW(model.validate());

  SECTION("ceiling below floor") {
    model.max_contacts = 4.0;
    CHECK_THROWS_AS(model.validate(), episim::ValidationError);
  }
  SECTION("negative floor") {
    model.min_contacts = -1.0;
    CHECK_THROWS_AS(model.validate(), episim::ValidationError);
  }
  SECTION("non-positive alpha") {
    model.alpha = 0.0;
    CHECK_THROWS_AS(model.validate(), episim::ValidationError);
  }
  SECTION("global probability out of range") {
    model.kind = ContactModel::Kind::kGlobal;
    model.global_probability = 1.5;
    CHECK_THROWS_AS(model.validate(), episim::ValidationError);
    model.global_probability = -0.1;
    CHECK_THROWS_AS(model.validate(), episim::ValidationError);
    model.global_probability = 1.0;
    CHECK_NOTHROW(model.validate());
  }
}

TEST_CASE("propensity arithmetic", "[models]") {
  SECTION("half-hour contact at default transmissibility") {
    CHECK(episim::propensity(1800.0, 0.05, 1.0, 1.0, 1.0, 1.0) == 90.0);
  }

  SECTION("factors compose as one product") {
    const double rho = episim::propensity(620.0, 0.05, 1.1, 0.9, 1.3, 0.7);
    CHECK_THAT(rho, WithinRel(620.0 * 0.05 * (1.1 * 0.9) * (1.3 * 0.7), 1e-12));
  }

  SECTION("linear in duration") {
    const double once = episim::propensity(777.0, 0.03, 1.2, 1.0, 0.8, 1.0);
    const double twice = episim::propensity(1554.0, 0.03, 1.2, 1.0, 0.8, 1.0);
    CHECK_THAT(twice, WithinRel(2.0 * once, 1e-12));
  }

  SECTION("zero factor annihilates") {
    CHECK(episim::propensity(1800.0, 0.05, 0.0, 1.0, 1.0, 1.0) == 0.0);
    CHECK(episim::propensity(1800.0, 0.05, 1.0, 1.0, 1.0, 0.0) == 0.0);
    CHECK(episim::propensity(0.0, 0.05, 1.0, 1.0, 1.0, 1.0) == 0.0);
  }
}

TEST_CASE("infection probability", "[models]") {
  CHECK(episim::infection_probability(0.0) == 0.0);
  CHECK_THAT(episim::infection_probability(std::log(2.0)), WithinRel(0.5, 1e-12));
  // e^{-180} is far below double precision, so the probability saturates.
  CHECK_THAT(episim::infection_probability(180.0), WithinRel(1.0, 1e-12));
  CHECK(episim::infection_probability(180.0) == 1.0);
  // Monotone in the total pressure.
  CHECK(episim::infection_probability(0.5) < episim::infection_probability(1.0));
}

namespace {

ExposureRecord make_record(episim::PersonIndex target, episim::PersonIndex source,
                           episim::LocationIndex location, episim::Seconds start,
                           double duration, double rho) {
  ExposureRecord record;
  record.target = target;
  record.source = source;
  record.location = location;
  record.overlap_start = start;
  record.duration = duration;
  record.propensity = rho;
  return record;
}

}  // namespace

TEST_CASE("total propensity is independent of record order", "[models]") {
  // Propensities chosen so naive left-to-right summation is order sensitive.
  std::vector<ExposureRecord> records;
  std::mt19937 gen(12345);
  std::uniform_real_distribution<double> magnitude(-8.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    records.push_back(make_record(7, i % 6, i % 4, 3600 * i, 600.0 + i,
                                  std::pow(10.0, magnitude(gen))));
  }

  const double reference = episim::total_propensity(records);
  for (int shuffle = 0; shuffle < 1000; ++shuffle) {
    std::shuffle(records.begin(), records.end(), gen);
    const double total = episim::total_propensity(records);
    REQUIRE(total == reference);  // bitwise, not approximately
  }
}

TEST_CASE("total propensity basics", "[models]") {
  SECTION("no records, no pressure") {
    CHECK(episim::total_propensity({}) == 0.0);
  }
  SECTION("single record") {
    CHECK(episim::total_propensity({make_record(1, 2, 3, 100, 50.0, 0.25)}) == 0.25);
  }
  SECTION("mixed targets are a contract violation") {
    std::vector<ExposureRecord> records = {make_record(1, 2, 3, 0, 10.0, 0.1),
                                           make_record(2, 1, 3, 0, 10.0, 0.1)};
    CHECK_THROWS_AS(episim::total_propensity(records), std::logic_error);
  }
}

TEST_CASE("exposure record ordering", "[models]") {
  const auto a = make_record(5, 1, 9, 100, 60.0, 0.5);
  const auto b = make_record(5, 2, 0, 0, 60.0, 0.5);
  const auto c = make_record(5, 1, 9, 200, 60.0, 0.5);
  const auto d = make_record(5, 1, 2, 100, 60.0, 0.5);

  SECTION("source dominates") {
    CHECK(episim::exposure_order(a, b));
    CHECK_FALSE(episim::exposure_order(b, a));
  }
  SECTION("then overlap start") {
    CHECK(episim::exposure_order(a, c));
  }
  SECTION("then location") {
    CHECK(episim::exposure_order(d, a));
  }
  SECTION("grouping by target comes first") {
    const auto other_target = make_record(4, 9, 9, 900, 60.0, 0.5);
    CHECK(episim::exposure_order_by_target(other_target, a));
    CHECK_FALSE(episim::exposure_order_by_target(a, other_target));
    CHECK(episim::exposure_order_by_target(a, c));
  }
  SECTION("equality is field-wise") {
    auto copy = a;
    CHECK(copy == a);
    copy.duration += 1.0;
    CHECK_FALSE(copy == a);
  }
}
