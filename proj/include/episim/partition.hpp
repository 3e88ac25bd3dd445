#pragma once

// Static partitioning of locations and people.
//
// Locations are sorted by their spatial key (census tuple or grid cell) so
// each partition covers a contiguous stretch of geography, then packed into
// `m` partitions by cumulative weekly visit load. Outliers whose individual
// load exceeds the even-share target get a partition to themselves: targets
// are recomputed over the remainder until no new outlier appears (capped at
// m - 1 dedicated partitions so at least one partition is left for the
// rest). The remaining locations fill the leftover partitions by cumulative
// load, so every non-dedicated partition holds a contiguous run of the
// sorted non-outlier locations and stays at or below target + one location.
//
// People follow their home location's partition.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "episim/population.hpp"
#include "episim/types.hpp"

namespace episim {

struct PartitionMap {
  int num_partitions = 0;
  std::vector<std::int32_t> location_to_partition;  // by location index
  std::vector<std::int32_t> person_to_partition;    // by person index
  std::vector<std::int64_t> partition_loads;        // weekly visits per partition
};

// Maps each location to a partition in [0, num_partitions). `loads[i]` is
// the weekly visit count of location i; `locations` supplies the spatial
// sort key. Partition indices are assigned in sorted-location order, so the
// first location (spatially) always lands in partition 0.
inline std::vector<std::int32_t> assign_locations(
    std::span<const Location> locations, std::span<const std::int64_t> loads,
    int num_partitions) {
  const std::size_t count = locations.size();
  if (loads.size() != count)
    throw std::logic_error("assign_locations: loads/locations size mismatch");
  if (num_partitions < 1)
    throw ValidationError("partition count must be at least 1");
  if (static_cast<std::size_t>(num_partitions) > count)
    throw ValidationError("partition count " + std::to_string(num_partitions) +
                          " exceeds location count " + std::to_string(count));

  std::vector<std::int32_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    const Location& la = locations[static_cast<std::size_t>(a)];
    const Location& lb = locations[static_cast<std::size_t>(b)];
    if (la.geo != lb.geo) return la.geo < lb.geo;
    return a < b;  // stable fallback for identical keys
  });

  std::vector<std::int32_t> result(count, -1);
  const std::int64_t total =
      std::accumulate(loads.begin(), loads.end(), std::int64_t{0});
  if (total == 0) {
    // No load signal: spread the sorted locations round-robin.
    for (std::size_t i = 0; i < count; ++i)
      result[static_cast<std::size_t>(order[i])] =
          static_cast<std::int32_t>(i % static_cast<std::size_t>(num_partitions));
    return result;
  }

  // Iteratively peel off locations too heavy for an even share.
  std::vector<bool> dedicated(count, false);
  int dedicated_count = 0;
  std::int64_t remaining_load = total;
  int remaining_partitions = num_partitions;
  std::vector<std::int32_t> candidates;
  while (dedicated_count < num_partitions - 1) {
    const double target =
        static_cast<double>(remaining_load) / remaining_partitions;
    candidates.clear();
    for (std::size_t i = 0; i < count; ++i)
      if (!dedicated[i] && static_cast<double>(loads[i]) > target)
        candidates.push_back(static_cast<std::int32_t>(i));
    if (candidates.empty()) break;
    // Heaviest first, so the cap keeps the worst offenders isolated.
    std::sort(candidates.begin(), candidates.end(),
              [&](std::int32_t a, std::int32_t b) {
                const std::int64_t la = loads[static_cast<std::size_t>(a)];
                const std::int64_t lb = loads[static_cast<std::size_t>(b)];
                if (la != lb) return la > lb;
                return a < b;
              });
    for (const std::int32_t i : candidates) {
      if (dedicated_count >= num_partitions - 1) break;
      dedicated[static_cast<std::size_t>(i)] = true;
      ++dedicated_count;
      remaining_load -= loads[static_cast<std::size_t>(i)];
      --remaining_partitions;
    }
  }

  // Bucket the rest by cumulative load against the final target, then number
  // all buckets (dedicated ones included) by first appearance in sorted
  // order so partition ids follow geography.
  const double target =
      static_cast<double>(remaining_load) / remaining_partitions;
  std::vector<std::int32_t> bucket(count, -1);
  std::int64_t cumulative = 0;
  for (const std::int32_t i : order) {
    if (dedicated[static_cast<std::size_t>(i)]) continue;
    std::int32_t b = 0;
    if (target > 0.0)
      b = static_cast<std::int32_t>(static_cast<double>(cumulative) / target);
    bucket[static_cast<std::size_t>(i)] =
        std::min(b, remaining_partitions - 1);
    cumulative += loads[static_cast<std::size_t>(i)];
  }

  std::int32_t next_partition = 0;
  std::vector<std::int32_t> bucket_to_partition(
      static_cast<std::size_t>(remaining_partitions), -1);
  for (const std::int32_t i : order) {
    if (dedicated[static_cast<std::size_t>(i)]) {
      result[static_cast<std::size_t>(i)] = next_partition++;
      continue;
    }
    std::int32_t& mapped =
        bucket_to_partition[static_cast<std::size_t>(bucket[static_cast<std::size_t>(i)])];
    if (mapped < 0) mapped = next_partition++;
    result[static_cast<std::size_t>(i)] = mapped;
  }
  return result;
}

// People live where their home is assigned. Reports the offending person if
// the location map has no entry for their home.
inline std::vector<std::int32_t> assign_people(
    std::span<const Person> people,
    std::span<const std::int32_t> location_to_partition) {
  std::vector<std::int32_t> result(people.size(), -1);
  for (std::size_t i = 0; i < people.size(); ++i) {
    const LocationIndex home = people[i].home_location;
    if (home < 0 ||
        static_cast<std::size_t>(home) >= location_to_partition.size() ||
        location_to_partition[static_cast<std::size_t>(home)] < 0)
      throw ValidationError("person " + std::to_string(people[i].id) +
                            ": home location is not mapped to a partition");
    result[i] = location_to_partition[static_cast<std::size_t>(home)];
  }
  return result;
}

inline PartitionMap build_partition_map(const Population& pop, int num_partitions) {
  PartitionMap map;
  map.num_partitions = num_partitions;
  const std::vector<std::int64_t> loads = pop.weekly_visit_loads();
  map.location_to_partition = assign_locations(pop.locations, loads, num_partitions);
  map.person_to_partition = assign_people(pop.people, map.location_to_partition);
  map.partition_loads.assign(static_cast<std::size_t>(num_partitions), 0);
  for (std::size_t i = 0; i < loads.size(); ++i)
    map.partition_loads[static_cast<std::size_t>(map.location_to_partition[i])] +=
        loads[i];
  return map;
}

}  // namespace episim
