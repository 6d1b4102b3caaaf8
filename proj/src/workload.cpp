#include "mmcache/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "mmcache/csv.hpp"

namespace mmcache::workload {

double arrival_rate(const WorkloadProfile& profile, std::int64_t slot) {
  if (slot < 0 || slot >= profile.horizon_slots)
    throw std::out_of_range("arrival_rate: slot outside horizon");
  if (profile.phases.empty() || profile.phases.front().start_slot != 0)
    throw std::invalid_argument("arrival_rate: phase schedule must start at slot 0");
  double rate = profile.phases.front().rate;
  for (const auto& phase : profile.phases) {
    if (phase.start_slot > slot) break;
    rate = phase.rate;
  }
  return rate;
}

const ShiftEntry* shift_at(const WorkloadProfile& profile, std::int64_t slot) {
  for (const auto& s : profile.shifts)
    if (s.slot == slot) return &s;
  return nullptr;
}

int releases_at(const WorkloadProfile& profile, std::int64_t slot) {
  int n = 0;
  for (const auto& r : profile.releases)
    if (r.slot == slot) ++n;
  return n;
}

PopularityState::PopularityState(const catalog::Catalog& cat, double exponent, std::uint64_t seed)
    : exponent_(exponent) {
  if (exponent < 0) throw std::invalid_argument("zipf exponent must be >= 0");
  ranked_ids_.reserve(cat.contents.size());
  for (const auto& c : cat.contents) ranked_ids_.push_back(c.id);
  Rng rng(derive_seed(seed, 0x21BFULL));
  rng.shuffle(ranked_ids_);
  rebuild_cdf();
}

void PopularityState::rebuild_cdf() {
  cdf_.assign(ranked_ids_.size(), 0.0);
  double total = 0;
  for (std::size_t r = 0; r < ranked_ids_.size(); ++r) {
    total += std::pow(static_cast<double>(r + 1), -exponent_);
    cdf_[r] = total;
  }
  for (auto& v : cdf_) v /= total;
  if (!cdf_.empty()) cdf_.back() = 1.0;
}

std::int64_t PopularityState::sample(Rng& rng) const {
  if (ranked_ids_.empty()) throw std::logic_error("cannot sample from an empty catalog");
  const double u = rng.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t rank = static_cast<std::size_t>(it - cdf_.begin());
  return ranked_ids_[std::min(rank, ranked_ids_.size() - 1)];
}

void PopularityState::apply_shift(std::uint64_t permutation_seed) {
  Rng rng(derive_seed(permutation_seed, 0x5F1BULL));
  rng.shuffle(ranked_ids_);
}

void PopularityState::insert_released(std::int64_t content_id, Rng& rng) {
  const std::size_t n = ranked_ids_.size();
  const std::size_t top = std::max<std::size_t>(n / 3, 1);
  const std::size_t rank =
      n == 0 ? 0 : static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(top) - 1));
  ranked_ids_.insert(ranked_ids_.begin() + static_cast<std::ptrdiff_t>(std::min(rank, n)), content_id);
  rebuild_cdf();
}

double PopularityState::rank_probability(std::size_t rank) const {
  if (rank >= cdf_.size()) throw std::out_of_range("rank out of range");
  return rank == 0 ? cdf_[0] : cdf_[rank] - cdf_[rank - 1];
}

std::vector<Request> sample_requests(const WorkloadProfile& profile, const PopularityState& pop, int node_id,
                                     std::int64_t slot, Rng& rng, int first_order) {
  const double rate = arrival_rate(profile, slot);
  std::vector<Request> out;
  if (rate <= 0) return out;
  if (pop.ranked_ids().empty())
    throw std::logic_error("sample_requests: non-zero rate over an empty catalog");
  const int count = rng.poisson(rate);
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(Request{slot, node_id, pop.sample(rng), first_order + i});
  return out;
}

std::int64_t total_requests(const std::vector<Request>& trace) {
  return static_cast<std::int64_t>(trace.size());
}

void write_trace_csv(const std::vector<Request>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "slot,node_id,content_id,arrival_order\n";
  for (const auto& r : trace)
    out << r.slot << ',' << r.node_id << ',' << r.content_id << ',' << r.arrival_order << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Request> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "slot,node_id,content_id,arrival_order")
    throw std::runtime_error("bad trace header in " + path);
  std::vector<Request> trace;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw std::runtime_error("bad trace row: '" + line + "'");
    trace.push_back(Request{parse_i64(f[0]), static_cast<int>(parse_i64(f[1])), parse_i64(f[2]),
                            static_cast<int>(parse_i64(f[3]))});
  }
  return trace;
}

WorkloadState::WorkloadState(const WorkloadProfile& profile, const catalog::CatalogSpec& release_sizes,
                             catalog::Catalog& cat, std::uint64_t seed)
    : profile_(profile),
      release_sizes_(release_sizes),
      cat_(cat),
      pop_(cat, profile.zipf_exponent, derive_seed(seed, 0x7A9CULL)),
      rng_(derive_seed(seed, 0x3D4EULL)) {}

std::vector<Request> WorkloadState::step(std::int64_t slot, int node_count) {
  if (const ShiftEntry* s = shift_at(profile_, slot)) pop_.apply_shift(s->permutation_seed);
  for (const auto& rel : profile_.releases) {
    if (rel.slot != slot) continue;
    std::int64_t lo = 0, hi = 0;
    switch (catalog::modality_of(rel.cls)) {
      case catalog::Modality::video:
        lo = release_sizes_.video_size_min_bytes, hi = release_sizes_.video_size_max_bytes;
        break;
      case catalog::Modality::audio:
        lo = release_sizes_.audio_size_min_bytes, hi = release_sizes_.audio_size_max_bytes;
        break;
      case catalog::Modality::haptic:
        lo = release_sizes_.haptic_size_min_bytes, hi = release_sizes_.haptic_size_max_bytes;
        break;
    }
    const auto& c = catalog::release_content(cat_, rel.cls, rng_.uniform_int(lo, hi));
    pop_.insert_released(c.id, rng_);
    released_ids_.push_back(c.id);
  }

  std::vector<Request> out;
  for (int node = 0; node < node_count; ++node) {
    auto reqs = sample_requests(profile_, pop_, node, slot, rng_, static_cast<int>(out.size()));
    out.insert(out.end(), reqs.begin(), reqs.end());
  }
  return out;
}

}  // namespace mmcache::workload
