#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mmcache::metrics {

struct EventRecord {
  std::int64_t slot = 0;
  int node_id = 0;
  std::int64_t content_id = 0;
  bool hit = false;
  int hops = 1;
  std::int64_t bytes = 0;  // full content size the request asks for
  bool satisfied = false;
};

struct MetricsSnapshot {
  double avg_hops = 0;
  double hit_ratio = 0;
  double reduced_load_ratio = 0;  // bytes served from cache / bytes requested
  double unsatisfied_ratio = 0;
  std::int64_t total_requests = 0;
};

class MetricsAccumulator {
 public:
  void record(const EventRecord& e);

  std::int64_t total_requests() const { return totals_.requests; }
  std::int64_t hits() const { return totals_.hits; }
  std::int64_t satisfied() const { return totals_.requests - totals_.unsatisfied; }
  std::int64_t unsatisfied() const { return totals_.unsatisfied; }

  // Totals-over-totals ratios.
  MetricsSnapshot snapshot() const;

  // Per-window snapshots over [0, horizon); request-free windows come back
  // empty rather than as 0/0.
  std::vector<std::pair<std::int64_t, std::optional<MetricsSnapshot>>> window_series(
      std::int64_t window_slots, std::int64_t horizon_slots) const;

  // The alternative reading that sums one fraction per (node, content) cell.
  struct LiteralSums {
    double hops_sum = 0;
    double hit_fraction_sum = 0;
    double reduced_load_sum = 0;
    double unsatisfied_sum = 0;
    std::int64_t cells = 0;
  };
  LiteralSums literal_sums() const;

 private:
  struct Counters {
    std::int64_t requests = 0;
    std::int64_t hits = 0;
    std::int64_t hops = 0;
    std::int64_t unsatisfied = 0;
    std::int64_t bytes_requested = 0;
    std::int64_t bytes_from_cache = 0;
  };
  static MetricsSnapshot to_snapshot(const Counters& c);

  Counters totals_;
  std::map<std::int64_t, Counters> per_slot_;
  std::map<std::pair<int, std::int64_t>, Counters> per_cell_;
};

struct ResultRow {
  std::string scheme;
  std::uint64_t seed = 0;
  std::int64_t cache_size_bytes = 0;
  std::int64_t window_index = -1;  // -1 marks the cumulative row
  std::optional<MetricsSnapshot> snap;
};

// Canonical emission: sorted by (scheme, cache_size, seed, window_index), LF
// endings, '.' decimals; re-emitting the same rows is byte-identical.
void write_results_csv(std::vector<ResultRow> rows, const std::string& path);

}  // namespace mmcache::metrics
