#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "mmcache/catalog.hpp"
#include "mmcache/drl.hpp"
#include "mmcache/workload.hpp"

namespace mmcache::importance {

// What the observer collects for one (node, content) pair.
struct Observation {
  int node_id = 0;
  std::int64_t content_id = 0;
  double available_access_bw_bps = 0;
  std::int64_t content_request_count = 0;  // this content at this node, windowed
  std::int64_t node_total_requests = 0;    // all contents at this node, windowed
  catalog::Modality modality = catalog::Modality::video;
  std::int64_t content_size_bytes = 0;
};

struct NormConfig {
  double max_access_bw_bps = 1e9;
  double max_content_size_bytes = 500e6;
  double max_window_requests = 720;  // peak rate x observer window
  bool include_modality = true;      // false drops the one-hot (ablation)
};

int state_dim(const NormConfig& norm);

// ID-free encoding: [bw, share, load, (one-hot modality,) size], all in [0,1].
drl::Vec encode_state(const Observation& obs, const NormConfig& norm);

struct ImportanceScore {
  std::int64_t content_id = 0;
  int node_id = 0;
  int value = 0;
  std::int64_t issued_at = 0;
};

// Scores the observation with the net and re-attaches the stripped ids.
ImportanceScore evaluate(const drl::QNetwork& net, const Observation& obs, const NormConfig& norm, double eps,
                         Rng& rng, std::int64_t slot);

struct ImportanceWeights {
  double w1 = 0.25;  // available bandwidth
  double w2 = 0.25;  // local popularity share
  double w3 = 0.25;  // modality criticality
  double w4 = 0.25;  // smallness
};

double modality_code(catalog::Modality m);

// Fixed-weight scorer: w1*bw + w2*share + w3*modality_code + w4*(1 - size).
double static_importance(const ImportanceWeights& w, const Observation& obs, const NormConfig& norm);

struct RewardConfig {
  double r1 = 10;
  double r2 = 5;
  double th1 = 0.05;
  double th2 = 0.10;
  double th3 = 0.20;
};

// Four right-closed bands over the unsatisfied ratio.
double immediate_reward(double ratio, const RewardConfig& cfg);

struct RewardState {
  std::int64_t unsatisfied_count = 0;
  std::vector<std::int64_t> episode_request_totals;
  double accumulated = 0;
};

double unsatisfied_ratio(const RewardState& s);
double accumulate_reward(RewardState& s, double immediate);

struct TriggerConfig {
  std::int64_t period_slots = 60;
  double rate_jump_factor = 2.0;
};

struct SlotEvents {
  bool release = false;
  bool shift = false;
  bool rate_jump = false;
  bool any() const { return release || shift || rate_jump; }
};

bool should_trigger(const TriggerConfig& cfg, std::int64_t slot, const SlotEvents& events);

// Events are derived from the schedule itself, not from noisy counts, so a
// stationary window can never fire a spurious trigger.
SlotEvents detect_events(const workload::WorkloadProfile& profile, std::int64_t slot, double rate_jump_factor);

// Per-node sliding request counter over the last `window_slots` slots.
class RequestWindow {
 public:
  explicit RequestWindow(std::int64_t window_slots);

  // Drops slots older than `slot - window_slots`; call at each slot start.
  void advance(std::int64_t slot);
  void record(std::int64_t slot, std::int64_t content_id);

  std::int64_t content_count(std::int64_t content_id) const;
  std::int64_t total() const { return total_; }
  std::int64_t distinct_contents() const { return static_cast<std::int64_t>(counts_.size()); }
  double mean_count_per_content() const;

 private:
  std::int64_t window_slots_ = 0;
  std::int64_t total_ = 0;
  std::map<std::int64_t, std::int64_t> counts_;
  std::deque<std::pair<std::int64_t, std::int64_t>> events_;  // (slot, content)
};

// Per-node sliding QoS outcome counter.
class SatisfactionWindow {
 public:
  explicit SatisfactionWindow(std::int64_t window_slots);

  void advance(std::int64_t slot);
  void record(std::int64_t slot, bool satisfied);

  std::int64_t total() const { return total_; }
  std::int64_t unsatisfied() const { return unsatisfied_; }
  double unsatisfied_ratio() const;  // 0 when the window is empty

 private:
  std::int64_t window_slots_ = 0;
  std::int64_t total_ = 0;
  std::int64_t unsatisfied_ = 0;
  std::deque<std::pair<std::int64_t, bool>> events_;
};

// Observer read: assembles the (node, content) observation from the window
// and the node's current free access bandwidth.
Observation observe(const catalog::Catalog& cat, const RequestWindow& window, int node_id, std::int64_t content_id,
                    double available_access_bw_bps);

void write_scores_csv(const std::vector<ImportanceScore>& scores, const std::string& path);

}  // namespace mmcache::importance
