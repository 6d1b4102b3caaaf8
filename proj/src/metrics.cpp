#include "mmcache/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "mmcache/csv.hpp"

namespace mmcache::metrics {

void MetricsAccumulator::record(const EventRecord& e) {
  if (e.hops < 1 || e.bytes <= 0) throw std::invalid_argument("record: malformed event");
  const auto apply = [&](Counters& c) {
    c.requests += 1;
    c.hits += e.hit ? 1 : 0;
    c.hops += e.hops;
    c.unsatisfied += e.satisfied ? 0 : 1;
    c.bytes_requested += e.bytes;
    c.bytes_from_cache += e.hit ? e.bytes : 0;
  };
  apply(totals_);
  apply(per_slot_[e.slot]);
  apply(per_cell_[{e.node_id, e.content_id}]);
}

MetricsSnapshot MetricsAccumulator::to_snapshot(const Counters& c) {
  if (c.requests <= 0) throw std::logic_error("snapshot of an empty accumulator");
  MetricsSnapshot s;
  s.total_requests = c.requests;
  s.avg_hops = static_cast<double>(c.hops) / static_cast<double>(c.requests);
  s.hit_ratio = static_cast<double>(c.hits) / static_cast<double>(c.requests);
  s.reduced_load_ratio =
      c.bytes_requested > 0 ? static_cast<double>(c.bytes_from_cache) / static_cast<double>(c.bytes_requested) : 0.0;
  s.unsatisfied_ratio = static_cast<double>(c.unsatisfied) / static_cast<double>(c.requests);
  return s;
}

MetricsSnapshot MetricsAccumulator::snapshot() const { return to_snapshot(totals_); }

std::vector<std::pair<std::int64_t, std::optional<MetricsSnapshot>>> MetricsAccumulator::window_series(
    std::int64_t window_slots, std::int64_t horizon_slots) const {
  if (window_slots < 1) throw std::invalid_argument("window_series: window must be >= 1");
  if (horizon_slots < 0) throw std::invalid_argument("window_series: negative horizon");
  const std::int64_t windows = (horizon_slots + window_slots - 1) / window_slots;
  std::vector<std::pair<std::int64_t, std::optional<MetricsSnapshot>>> out;
  out.reserve(static_cast<std::size_t>(windows));

  auto it = per_slot_.begin();
  for (std::int64_t w = 0; w < windows; ++w) {
    const std::int64_t end_slot = (w + 1) * window_slots;
    Counters agg;
    while (it != per_slot_.end() && it->first < end_slot) {
      const Counters& c = it->second;
      agg.requests += c.requests;
      agg.hits += c.hits;
      agg.hops += c.hops;
      agg.unsatisfied += c.unsatisfied;
      agg.bytes_requested += c.bytes_requested;
      agg.bytes_from_cache += c.bytes_from_cache;
      ++it;
    }
    if (agg.requests > 0)
      out.emplace_back(w, to_snapshot(agg));
    else
      out.emplace_back(w, std::nullopt);
  }
  return out;
}

MetricsAccumulator::LiteralSums MetricsAccumulator::literal_sums() const {
  LiteralSums sums;
  for (const auto& [_, c] : per_cell_) {
    if (c.requests <= 0) continue;
    const double req = static_cast<double>(c.requests);
    sums.hops_sum += static_cast<double>(c.hops) / req;
    sums.hit_fraction_sum += static_cast<double>(c.hits) / req;
    sums.reduced_load_sum +=
        c.bytes_requested > 0 ? static_cast<double>(c.bytes_from_cache) / static_cast<double>(c.bytes_requested) : 0.0;
    sums.unsatisfied_sum += static_cast<double>(c.unsatisfied) / req;
    sums.cells += 1;
  }
  return sums;
}

void write_results_csv(std::vector<ResultRow> rows, const std::string& path) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    if (a.cache_size_bytes != b.cache_size_bytes) return a.cache_size_bytes < b.cache_size_bytes;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.window_index < b.window_index;
  });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "scheme,seed,cache_size_bytes,window_index,avg_hops,hit_ratio,reduced_load_ratio,unsatisfied_ratio,"
         "total_requests\n";
  for (const auto& r : rows) {
    out << r.scheme << ',' << r.seed << ',' << r.cache_size_bytes << ',' << r.window_index << ',';
    if (r.snap) {
      out << fmt_double(r.snap->avg_hops) << ',' << fmt_double(r.snap->hit_ratio) << ','
          << fmt_double(r.snap->reduced_load_ratio) << ',' << fmt_double(r.snap->unsatisfied_ratio) << ','
          << r.snap->total_requests << '\n';
    } else {
      out << ",,,,0\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mmcache::metrics
