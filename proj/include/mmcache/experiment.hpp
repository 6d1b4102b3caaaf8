#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmcache/metrics.hpp"
#include "mmcache/sim.hpp"

namespace mmcache::sim {

struct CurvePoint {
  int episode = 0;
  double eps = 0;
  double mean_loss = 0;
  double episode_reward = 0;
  double unsatisfied_ratio = 0;
};

struct TrainOutcome {
  int episodes_run = 0;
  int best_episode = 0;
  double best_unsatisfied_ratio = 0;
  std::vector<CurvePoint> curve;
};

// Runs up to drl.max_episodes training episodes, keeps the parameters of the
// best episode by unsatisfied ratio (restored into the trainer on return),
// and stops early once the reward moving average stalls.
TrainOutcome train_agent(const ExperimentConfig& cfg, Scheme scheme, Trainer& trainer);

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path);

// Frozen-policy runs over cfg.eval_seeds; one cumulative row (window -1) plus
// the window series per seed.
std::vector<metrics::ResultRow> evaluate_scheme(const ExperimentConfig& cfg, Scheme scheme, Trainer* trainer);

struct AggregateRow {
  std::string scheme;
  std::int64_t cache_size_bytes = 0;
  int seeds = 0;
  double avg_hops_mean = 0, avg_hops_std = 0;
  double hit_ratio_mean = 0, hit_ratio_std = 0;
  double reduced_load_ratio_mean = 0, reduced_load_ratio_std = 0;
  double unsatisfied_ratio_mean = 0, unsatisfied_ratio_std = 0;
  double total_requests_mean = 0;
};

struct SweepOutcome {
  std::vector<metrics::ResultRow> rows;
  std::vector<AggregateRow> aggregates;
};

// Full scheme x cache-size x seed cross product; learning schemes are trained
// once per (scheme, size) cell and evaluated frozen.
SweepOutcome sweep(const ExperimentConfig& cfg);

void write_aggregates_csv(const std::vector<AggregateRow>& rows, const std::string& path);

}  // namespace mmcache::sim
