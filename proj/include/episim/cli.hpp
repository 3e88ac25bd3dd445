#pragma once

// Command-line front end. Wires the modules together:
//
//   episim --synthetic 100x100,10000 --disease data/disease/sir.disease
//          --days 120 --seed 7 --partitions 16 --threads 4 --out results/
//
// Populations come either from --people/--locations/--visits CSV files or
// from --synthetic (WxH,people[,visits_per_day,hops] or a named preset).
// Outputs: curve.csv per replicate (curve_000.csv... when --replicates > 1),
// bench.json with --bench, an optional partition summary, and an optional
// per-infection event log.
//
// Exit codes: 0 on success, 2 for unusable input (flags or files), 1 for
// runtime failures.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "episim/cli_parse.hpp"
#include "episim/disease.hpp"
#include "episim/engine.hpp"
#include "episim/interventions.hpp"
#include "episim/population.hpp"
#include "episim/report.hpp"
#include "episim/types.hpp"

namespace episim::cli {

struct Options {
  std::string people_path, locations_path, visits_path;
  std::string synthetic_spec;
  double visit_duration = 1800.0;
  std::string disease_path;
  std::string interventions_path;
  int days = 0;
  std::uint64_t seed = 1;
  int partitions = 0;  // 0 = min(16, location count)
  int threads = 0;     // 0 = hardware concurrency
  std::string contact_spec = "minmax:5,40,1000";
  bool contact_product_numerator = false;
  double tau = 0.05;
  std::string seeding_spec = "2,1,10";
  std::string out_dir = ".";
  int replicates = 1;
  bool bench = false;
  std::string partition_report_path;
  std::string events_path;
  bool no_short_circuit = false;
  bool full_broadcast = false;
};

inline int run(const std::vector<std::string>& args) {
  Options opt;
  CLI::App app{"Agent-based epidemic simulator over person-location visit networks"};
  app.add_option("--people", opt.people_path, "people CSV");
  app.add_option("--locations", opt.locations_path, "locations CSV");
  app.add_option("--visits", opt.visits_path, "weekly visits CSV");
  app.add_option("--synthetic", opt.synthetic_spec,
                 "synthetic population: WxH,people[,visits_per_day,hops] or "
                 "1x-scaled | 2x-scaled | 4x-scaled");
  app.add_option("--visit-duration", opt.visit_duration,
                 "mean synthetic visit duration in seconds (default 1800)");
  app.add_option("--disease", opt.disease_path, "disease model file")->required();
  app.add_option("--interventions", opt.interventions_path, "intervention file");
  app.add_option("--days", opt.days, "days to simulate")->required();
  app.add_option("--seed", opt.seed, "random seed (default 1)");
  app.add_option("--partitions", opt.partitions,
                 "partition count (default min(16, locations))");
  app.add_option("--threads", opt.threads,
                 "worker threads (default: hardware concurrency)");
  app.add_option("--contact-model", opt.contact_spec,
                 "minmax:A,B,alpha or global:p (default minmax:5,40,1000)");
  app.add_flag("--contact-product-numerator", opt.contact_product_numerator,
               "use the legacy product form of the min-max contact numerator");
  app.add_option("--tau", opt.tau, "transmissibility per contact-second (default 0.05)");
  app.add_option("--seeding", opt.seeding_spec,
                 "count,day_from,day_to (default 2,1,10)");
  app.add_option("--out", opt.out_dir, "output directory (default .)");
  app.add_option("--replicates", opt.replicates,
                 "replicate count; replicate k uses seed+k (default 1)");
  app.add_flag("--bench", opt.bench, "write bench.json with timing and throughput");
  app.add_option("--partition-report", opt.partition_report_path,
                 "write a partition summary CSV to this path");
  app.add_option("--events", opt.events_path,
                 "write per-infection events CSV to this path");
  app.add_flag("--no-short-circuit", opt.no_short_circuit,
               "evaluate every location, even without infectious visitors");
  app.add_flag("--full-broadcast", opt.full_broadcast,
               "re-send every health snapshot daily instead of only changes");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const bool synthetic = !opt.synthetic_spec.empty();
    const bool from_files = !opt.people_path.empty() || !opt.locations_path.empty() ||
                            !opt.visits_path.empty();
    if (synthetic == from_files)
      throw ValidationError(
          "provide either --synthetic or all of --people/--locations/--visits");
    if (from_files && (opt.people_path.empty() || opt.locations_path.empty() ||
                       opt.visits_path.empty()))
      throw ValidationError(
          "loading a population needs --people, --locations, and --visits");
    if (opt.replicates < 1) throw ValidationError("--replicates must be >= 1");
    if (opt.days < 0) throw ValidationError("--days must be >= 0");

    const DiseaseModel model = load_disease_model(opt.disease_path);
    std::vector<InterventionSpec> interventions;
    if (!opt.interventions_path.empty())
      interventions = load_interventions(opt.interventions_path);

    Population pop;
    if (synthetic) {
      SyntheticConfig config = parse_synthetic_spec(opt.synthetic_spec);
      config.visit_duration_mean = opt.visit_duration;
      config.seed = opt.seed;
      pop = generate_synthetic(config);
    } else {
      pop = load_population(opt.people_path, opt.locations_path, opt.visits_path);
    }

    RunConfig cfg;
    cfg.days = opt.days;
    cfg.partitions = opt.partitions > 0
                         ? opt.partitions
                         : static_cast<int>(std::min<std::size_t>(
                               16, std::max<std::size_t>(1, pop.locations.size())));
    cfg.threads = opt.threads > 0
                      ? opt.threads
                      : std::max(1u, std::thread::hardware_concurrency());
    cfg.tau = opt.tau;
    cfg.contact = parse_contact_spec(opt.contact_spec);
    cfg.contact.product_numerator = opt.contact_product_numerator;
    cfg.seeding = parse_seeding_spec(opt.seeding_spec);
    cfg.interventions = interventions;
    cfg.short_circuit = !opt.no_short_circuit;
    cfg.delta_updates = !opt.full_broadcast;
    cfg.record_infections = !opt.events_path.empty();
    cfg.validate();

    // The contact model reads each location's peak occupancy; synthetic
    // populations and files with zeroed max_occupancy get it computed here.
    bool occupancy_missing = true;
    for (const Location& location : pop.locations)
      if (location.max_occupancy > 0) {
        occupancy_missing = false;
        break;
      }
    if (synthetic || occupancy_missing) compute_max_occupancy(pop);

    std::filesystem::create_directories(opt.out_dir);
    const auto out_path = [&](const std::string& name) {
      return (std::filesystem::path(opt.out_dir) / name).string();
    };

    std::vector<BenchmarkReport> reports;
    std::ofstream events;
    if (!opt.events_path.empty()) {
      events.open(opt.events_path);
      if (!events)
        throw std::runtime_error(opt.events_path + ": cannot open for writing");
      events << "replicate,day,person,origin\n";
    }

    for (int r = 0; r < opt.replicates; ++r) {
      cfg.seed = opt.seed + static_cast<std::uint64_t>(r);
      Simulation sim(pop, model, cfg);
      const std::vector<DayStats> days = sim.run();

      std::string curve_name = "curve.csv";
      if (opt.replicates > 1) {
        char buffer[32];
        std::snprintf(buffer, sizeof(buffer), "curve_%03d.csv", r);
        curve_name = buffer;
      }
      write_curve(days, model, static_cast<std::int64_t>(pop.people.size()),
                  out_path(curve_name));

      if (opt.bench)
        reports.push_back(summarize_run(pop, days, sim, cfg.threads));
      if (!opt.events_path.empty())
        for (const InfectionEvent& event : sim.infection_log())
          events << r << ',' << event.day << ','
                 << pop.people[static_cast<std::size_t>(event.person)].id << ','
                 << (event.seeded ? "seed" : "contact") << '\n';
      if (!opt.partition_report_path.empty() && r == 0)
        write_partition_report(pop, sim.partition_map(), opt.partition_report_path);
    }
    if (opt.bench) write_reports(reports, out_path("bench.json"));
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace episim::cli
