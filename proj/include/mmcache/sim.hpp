#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmcache/cache.hpp"
#include "mmcache/catalog.hpp"
#include "mmcache/config.hpp"
#include "mmcache/drl.hpp"
#include "mmcache/importance.hpp"
#include "mmcache/metrics.hpp"
#include "mmcache/netmodel.hpp"
#include "mmcache/workload.hpp"

namespace mmcache::sim {

enum class Scheme {
  d3qn,        // dueling double-Q importance agent, full state
  no_modality, // same agent without the modality one-hot
  ddqn,        // single-head double-Q importance agent
  static_eq4,  // fixed-weight importance scorer
  lce_lru,     // admit everything, evict least recently used
  lru,         // plain LRU cache
  dpwcs_lru,   // windowed-popularity admission, LRU eviction
  cpdqn_lru,   // per-content binary DQN admission, LRU eviction
};

const std::vector<Scheme>& all_schemes();
const std::string& scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

// Importance-table schemes score contents on triggers and admit via the
// importance-ordered policy; the rest decide per miss.
bool uses_importance_agent(Scheme s);  // d3qn, no_modality, ddqn
bool uses_score_table(Scheme s);       // the above plus static_eq4
bool is_trainable(Scheme s);           // agents plus cpdqn_lru

struct DrlSettings {
  int hidden = 64;
  int n_actions = 10;
  double learning_rate = 0.0005;
  double gamma = 0.99;
  double grad_clip_norm = 10.0;
  drl::EpsilonSchedule eps;
  std::size_t replay_capacity = 50'000;
  std::size_t batch_size = 64;
  std::size_t train_start_size = 1'000;
  int sync_period_steps = 500;
  int max_episodes = 3'000;
  int early_stop_window = 100;    // episodes in the reward moving average
  int early_stop_patience = 300;  // stop after this many episodes without improvement
  double early_stop_min_improvement = 0.01;
};

struct ExperimentConfig {
  catalog::CatalogSpec catalog_spec;
  workload::WorkloadProfile profile;
  net::TopologyConfig topology;
  std::int64_t cache_size_bytes = 200'000'000;
  std::vector<std::int64_t> sweep_cache_sizes = {100'000'000, 200'000'000, 400'000'000, 800'000'000};
  std::vector<std::string> sweep_schemes;
  std::vector<std::uint64_t> eval_seeds = {1, 2, 3, 4, 5};
  std::uint64_t train_seed = 1;
  DrlSettings drl;
  importance::RewardConfig reward;
  importance::TriggerConfig trigger;
  importance::NormConfig norm;
  importance::ImportanceWeights static_weights;
  std::int64_t observer_window_slots = 60;
  std::int64_t metrics_window_slots = 60;
  std::string output_dir = "out";

  // 50 contents on 2 nodes with the idle/peak/idle/peak day and a mid-run
  // popularity shift; every learning hyperparameter at its reference value.
  static ExperimentConfig desk_defaults();
  // 500 contents on 6 nodes at rates sized for ~24.4k requests per run.
  static ExperimentConfig full_scale();

  void apply(const Config& file);
  static ExperimentConfig from_config(const Config& file, bool full_scale_base);
};

enum class AgentMode { none, train, frozen };

// Learning state carried across episodes for one (scheme, configuration).
struct Trainer {
  Trainer(const ExperimentConfig& cfg, Scheme scheme);

  Scheme scheme;
  drl::QNetwork online;
  drl::QNetwork target;
  drl::ReplayBuffer buffer;
  drl::TrainConfig train_cfg;
  std::size_t batch_size;
  std::size_t train_start_size;
  int sync_period_steps;
  int steps_done = 0;
  Rng sample_rng;
};

struct EpisodeStats {
  metrics::MetricsSnapshot cumulative;
  std::vector<std::pair<std::int64_t, std::optional<metrics::MetricsSnapshot>>> windows;
  double episode_reward = 0;
  double mean_loss = 0;
  int train_steps = 0;
};

// One full pass over the horizon: sample arrivals, serve them against the
// caches and links, apply the scheme's admission policy, and (in train mode)
// learn. Fully deterministic in (cfg, scheme, episode_seed). Throws on a
// capacity violation or a non-finite training loss.
EpisodeStats run_episode(const ExperimentConfig& cfg, Scheme scheme, std::uint64_t episode_seed, AgentMode mode,
                         Trainer* trainer, double eps,
                         const std::vector<workload::Request>* replay_trace = nullptr);

}  // namespace mmcache::sim
