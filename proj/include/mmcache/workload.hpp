#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmcache/catalog.hpp"
#include "mmcache/rng.hpp"

namespace mmcache::workload {

struct Request {
  std::int64_t slot = 0;
  int node_id = 0;
  std::int64_t content_id = 0;
  int arrival_order = 0;  // global FCFS position within the slot
};

struct PhaseEntry {
  std::int64_t start_slot = 0;
  double rate = 0;  // requests / slot / node
};

struct ShiftEntry {
  std::int64_t slot = 0;
  std::uint64_t permutation_seed = 0;
};

struct ReleaseEntry {
  std::int64_t slot = 0;
  catalog::ModalityClass cls = catalog::ModalityClass::video_1080p_30fps;
};

struct WorkloadProfile {
  double slot_length_s = 1.0;
  std::int64_t horizon_slots = 480;
  std::vector<PhaseEntry> phases = {{0, 2.0}, {120, 12.0}, {240, 4.0}, {360, 10.0}};
  double zipf_exponent = 0.8;
  std::vector<ShiftEntry> shifts;      // sorted by slot
  std::vector<ReleaseEntry> releases;  // sorted by slot
};

// Piecewise-constant rate of the phase containing `slot`.
double arrival_rate(const WorkloadProfile& profile, std::int64_t slot);

const ShiftEntry* shift_at(const WorkloadProfile& profile, std::int64_t slot);
int releases_at(const WorkloadProfile& profile, std::int64_t slot);

// Zipf popularity with a mutable rank-to-content assignment. Rank r (0-based)
// carries probability (r+1)^-s / H.
class PopularityState {
 public:
  PopularityState(const catalog::Catalog& cat, double exponent, std::uint64_t seed);

  std::int64_t sample(Rng& rng) const;
  // Permutes the rank assignment; the probability ladder itself is untouched.
  void apply_shift(std::uint64_t permutation_seed);
  // New contents enter at a uniformly drawn rank in the top third.
  void insert_released(std::int64_t content_id, Rng& rng);

  const std::vector<std::int64_t>& ranked_ids() const { return ranked_ids_; }
  double rank_probability(std::size_t rank) const;

 private:
  void rebuild_cdf();

  double exponent_ = 0;
  std::vector<std::int64_t> ranked_ids_;
  std::vector<double> cdf_;
};

// One node's arrivals for one slot; count ~ Poisson(rate), contents ~ Zipf.
// arrival_order runs from first_order.
std::vector<Request> sample_requests(const WorkloadProfile& profile, const PopularityState& pop, int node_id,
                                     std::int64_t slot, Rng& rng, int first_order = 0);

std::int64_t total_requests(const std::vector<Request>& trace);

void write_trace_csv(const std::vector<Request>& trace, const std::string& path);
std::vector<Request> read_trace_csv(const std::string& path);

// Drives one episode's workload: applies scheduled shifts and releases, then
// samples every node's arrivals in node order with a global FCFS numbering.
class WorkloadState {
 public:
  WorkloadState(const WorkloadProfile& profile, const catalog::CatalogSpec& release_sizes, catalog::Catalog& cat,
                std::uint64_t seed);

  std::vector<Request> step(std::int64_t slot, int node_count);

  const PopularityState& popularity() const { return pop_; }
  // ids released during the current episode so far
  const std::vector<std::int64_t>& released_ids() const { return released_ids_; }

 private:
  const WorkloadProfile& profile_;
  catalog::CatalogSpec release_sizes_;
  catalog::Catalog& cat_;
  PopularityState pop_;
  Rng rng_;
  std::vector<std::int64_t> released_ids_;
};

}  // namespace mmcache::workload
