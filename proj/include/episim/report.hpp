#pragma once

// Output writers: the daily epidemic curve (CSV), the benchmark report
// (JSON), and the partition summary (CSV). The curve writer re-checks the
// bookkeeping invariants — state counts summing to the population and a
// non-decreasing cumulative infection count — and refuses to write a curve
// that violates them.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "episim/disease.hpp"
#include "episim/engine.hpp"
#include "episim/types.hpp"

namespace episim {

inline void write_curve(const std::vector<DayStats>& days,
                        const DiseaseModel& model, std::int64_t population_size,
                        const std::string& path) {
  std::int64_t cumulative = 0;
  for (const DayStats& day : days) {
    std::int64_t total = 0;
    for (const std::int64_t count : day.state_counts) {
      if (count < 0) throw std::logic_error("curve: negative state count");
      total += count;
    }
    if (total != population_size)
      throw std::logic_error("curve: day " + std::to_string(day.day) +
                             " state counts sum to " + std::to_string(total) +
                             ", expected " + std::to_string(population_size));
    if (day.new_infections < 0)
      throw std::logic_error("curve: cumulative infections would decrease on day " +
                             std::to_string(day.day));
    cumulative += day.new_infections;
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "day";
  for (const DiseaseState& state : model.states) out << ',' << state.name;
  out << ",new_infections,cumulative_infections\n";
  cumulative = 0;
  for (const DayStats& day : days) {
    cumulative += day.new_infections;
    out << day.day;
    for (const std::int64_t count : day.state_counts) out << ',' << count;
    out << ',' << day.new_infections << ',' << cumulative << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

struct BenchmarkReport {
  std::int64_t people = 0;
  std::int64_t locations = 0;
  std::int64_t visits = 0;
  int days = 0;
  int threads = 0;
  int partitions = 0;
  double setup_seconds = 0.0;
  double loop_seconds = 0.0;  // simulation loop only, excludes setup and I/O
  double psc_seconds = 0.0;
  double ecc_seconds = 0.0;
  double psu_seconds = 0.0;
  std::int64_t traversed_edges = 0;
  std::int64_t total_infections = 0;

  double mean_seconds_per_day() const {
    return days > 0 ? loop_seconds / days : 0.0;
  }
  // Traversed (susceptible-infectious) interaction edges per second of
  // simulation-loop wall time: the throughput measure reported by --bench.
  double edges_per_second() const {
    return loop_seconds > 0.0 ? static_cast<double>(traversed_edges) / loop_seconds
                              : 0.0;
  }
};

inline BenchmarkReport summarize_run(const Population& pop,
                                     const std::vector<DayStats>& days,
                                     const Simulation& sim, int threads) {
  BenchmarkReport report;
  report.people = static_cast<std::int64_t>(pop.people.size());
  report.locations = static_cast<std::int64_t>(pop.locations.size());
  report.visits = static_cast<std::int64_t>(pop.visits.size());
  report.days = static_cast<int>(days.size());
  report.threads = threads;
  report.partitions = sim.partition_count();
  report.setup_seconds = sim.setup_seconds();
  report.loop_seconds = sim.loop_seconds();
  for (const DayStats& day : days) {
    report.psc_seconds += day.psc_seconds;
    report.ecc_seconds += day.ecc_seconds;
    report.psu_seconds += day.psu_seconds;
    report.traversed_edges += day.traversed_edges;
    report.total_infections += day.new_infections;
  }
  return report;
}

inline nlohmann::json report_to_json(const BenchmarkReport& report) {
  return nlohmann::json{
      {"people", report.people},
      {"locations", report.locations},
      {"visits", report.visits},
      {"days", report.days},
      {"threads", report.threads},
      {"partitions", report.partitions},
      {"setup_seconds", report.setup_seconds},
      {"loop_seconds", report.loop_seconds},
      {"mean_seconds_per_day", report.mean_seconds_per_day()},
      {"phase_seconds",
       {{"snapshot", report.psc_seconds},
        {"exposure", report.ecc_seconds},
        {"update", report.psu_seconds}}},
      {"traversed_edges", report.traversed_edges},
      {"edges_per_second", report.edges_per_second()},
      {"total_infections", report.total_infections},
  };
}

inline void write_reports(const std::vector<BenchmarkReport>& reports,
                          const std::string& path) {
  nlohmann::json body;
  body["runs"] = nlohmann::json::array();
  for (const BenchmarkReport& report : reports)
    body["runs"].push_back(report_to_json(report));
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << body.dump(2) << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

inline void write_partition_report(const Population& pop, const PartitionMap& map,
                                   const std::string& path) {
  std::vector<std::int64_t> location_counts(
      static_cast<std::size_t>(map.num_partitions), 0);
  std::vector<std::int64_t> people_counts(
      static_cast<std::size_t>(map.num_partitions), 0);
  for (const std::int32_t partition : map.location_to_partition)
    ++location_counts[static_cast<std::size_t>(partition)];
  for (const std::int32_t partition : map.person_to_partition)
    ++people_counts[static_cast<std::size_t>(partition)];
  (void)pop;

  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "partition,locations,people,weekly_visits\n";
  for (int k = 0; k < map.num_partitions; ++k)
    out << k << ',' << location_counts[static_cast<std::size_t>(k)] << ','
        << people_counts[static_cast<std::size_t>(k)] << ','
        << map.partition_loads[static_cast<std::size_t>(k)] << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace episim
