#include "mmcache/importance.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace mmcache::importance {

namespace {

double clamp01(double v) { return v < 0 ? 0 : (v > 1 ? 1 : v); }

}  // namespace

int state_dim(const NormConfig& norm) { return norm.include_modality ? 7 : 4; }

drl::Vec encode_state(const Observation& obs, const NormConfig& norm) {
  const double bw = clamp01(obs.available_access_bw_bps / norm.max_access_bw_bps);
  const double share = obs.node_total_requests > 0
                           ? static_cast<double>(obs.content_request_count) /
                                 static_cast<double>(obs.node_total_requests)
                           : 0.0;
  const double load = clamp01(static_cast<double>(obs.node_total_requests) / norm.max_window_requests);
  const double size = clamp01(static_cast<double>(obs.content_size_bytes) / norm.max_content_size_bytes);

  drl::Vec out;
  out.reserve(static_cast<std::size_t>(state_dim(norm)));
  out.push_back(bw);
  out.push_back(clamp01(share));
  out.push_back(load);
  if (norm.include_modality) {
    out.push_back(obs.modality == catalog::Modality::video ? 1.0 : 0.0);
    out.push_back(obs.modality == catalog::Modality::audio ? 1.0 : 0.0);
    out.push_back(obs.modality == catalog::Modality::haptic ? 1.0 : 0.0);
  }
  out.push_back(size);
  return out;
}

ImportanceScore evaluate(const drl::QNetwork& net, const Observation& obs, const NormConfig& norm, double eps,
                         Rng& rng, std::int64_t slot) {
  const drl::Vec state = encode_state(obs, norm);
  return ImportanceScore{obs.content_id, obs.node_id, drl::select_action(net, state, eps, rng), slot};
}

double modality_code(catalog::Modality m) {
  switch (m) {
    case catalog::Modality::video: return 0.3;
    case catalog::Modality::audio: return 0.5;
    case catalog::Modality::haptic: return 1.0;
  }
  return 0.3;
}

double static_importance(const ImportanceWeights& w, const Observation& obs, const NormConfig& norm) {
  const drl::Vec s = encode_state(obs, NormConfig{norm.max_access_bw_bps, norm.max_content_size_bytes,
                                                  norm.max_window_requests, false});
  const double bw = s[0], share = s[1], size = s[3];
  return w.w1 * bw + w.w2 * share + w.w3 * modality_code(obs.modality) + w.w4 * (1.0 - size);
}

double immediate_reward(double ratio, const RewardConfig& cfg) {
  if (ratio < 0 || ratio > 1) throw std::invalid_argument("immediate_reward: ratio outside [0,1]");
  if (ratio <= cfg.th1) return cfg.r1;
  if (ratio <= cfg.th2) return cfg.r2;
  if (ratio <= cfg.th3) return -cfg.r2;
  return -cfg.r1;
}

double unsatisfied_ratio(const RewardState& s) {
  std::int64_t total = 0;
  for (std::int64_t t : s.episode_request_totals) total += t;
  if (total <= 0) throw std::logic_error("unsatisfied_ratio: no requests recorded");
  return static_cast<double>(s.unsatisfied_count) / static_cast<double>(total);
}

double accumulate_reward(RewardState& s, double immediate) {
  s.accumulated += immediate;
  return s.accumulated;
}

bool should_trigger(const TriggerConfig& cfg, std::int64_t slot, const SlotEvents& events) {
  const bool periodic = cfg.period_slots > 0 && slot % cfg.period_slots == 0;
  return periodic || events.any();
}

SlotEvents detect_events(const workload::WorkloadProfile& profile, std::int64_t slot, double rate_jump_factor) {
  SlotEvents ev;
  ev.release = workload::releases_at(profile, slot) > 0;
  ev.shift = workload::shift_at(profile, slot) != nullptr;
  if (slot > 0) {
    const double prev = workload::arrival_rate(profile, slot - 1);
    const double cur = workload::arrival_rate(profile, slot);
    const double lo = std::min(prev, cur), hi = std::max(prev, cur);
    ev.rate_jump = lo > 0 ? hi >= rate_jump_factor * lo : hi > 0;
  }
  return ev;
}

RequestWindow::RequestWindow(std::int64_t window_slots) : window_slots_(window_slots) {
  if (window_slots <= 0) throw std::invalid_argument("RequestWindow: window must be positive");
}

void RequestWindow::advance(std::int64_t slot) {
  while (!events_.empty() && events_.front().first < slot - window_slots_) {
    const auto [_, content] = events_.front();
    events_.pop_front();
    auto it = counts_.find(content);
    if (--(it->second) == 0) counts_.erase(it);
    --total_;
  }
}

void RequestWindow::record(std::int64_t slot, std::int64_t content_id) {
  events_.emplace_back(slot, content_id);
  ++counts_[content_id];
  ++total_;
}

std::int64_t RequestWindow::content_count(std::int64_t content_id) const {
  const auto it = counts_.find(content_id);
  return it == counts_.end() ? 0 : it->second;
}

double RequestWindow::mean_count_per_content() const {
  if (counts_.empty()) return 0;
  return static_cast<double>(total_) / static_cast<double>(counts_.size());
}

SatisfactionWindow::SatisfactionWindow(std::int64_t window_slots) : window_slots_(window_slots) {
  if (window_slots <= 0) throw std::invalid_argument("SatisfactionWindow: window must be positive");
}

void SatisfactionWindow::advance(std::int64_t slot) {
  while (!events_.empty() && events_.front().first < slot - window_slots_) {
    if (!events_.front().second) --unsatisfied_;
    --total_;
    events_.pop_front();
  }
}

void SatisfactionWindow::record(std::int64_t slot, bool satisfied) {
  events_.emplace_back(slot, satisfied);
  ++total_;
  if (!satisfied) ++unsatisfied_;
}

double SatisfactionWindow::unsatisfied_ratio() const {
  if (total_ == 0) return 0;
  return static_cast<double>(unsatisfied_) / static_cast<double>(total_);
}

Observation observe(const catalog::Catalog& cat, const RequestWindow& window, int node_id, std::int64_t content_id,
                    double available_access_bw_bps) {
  if (node_id < 0) throw std::out_of_range("observe: unknown node");
  const catalog::Content& c = cat.by_id(content_id);  // throws on unknown content
  Observation obs;
  obs.node_id = node_id;
  obs.content_id = content_id;
  obs.available_access_bw_bps = available_access_bw_bps;
  obs.content_request_count = window.content_count(content_id);
  obs.node_total_requests = window.total();
  obs.modality = c.modality;
  obs.content_size_bytes = c.size_bytes;
  return obs;
}

void write_scores_csv(const std::vector<ImportanceScore>& scores, const std::string& path) {
  std::vector<ImportanceScore> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), [](const ImportanceScore& a, const ImportanceScore& b) {
    if (a.issued_at != b.issued_at) return a.issued_at < b.issued_at;
    if (a.node_id != b.node_id) return a.node_id < b.node_id;
    return a.content_id < b.content_id;
  });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "slot,node_id,content_id,score\n";
  for (const auto& s : sorted)
    out << s.issued_at << ',' << s.node_id << ',' << s.content_id << ',' << s.value << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mmcache::importance
