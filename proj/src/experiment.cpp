#include "mmcache/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "mmcache/csv.hpp"

namespace mmcache::sim {

TrainOutcome train_agent(const ExperimentConfig& cfg, Scheme scheme, Trainer& trainer) {
  if (!is_trainable(scheme)) throw std::invalid_argument("train_agent: scheme has no agent: " + scheme_name(scheme));

  TrainOutcome out;
  drl::Vec best_params = trainer.online.params();
  double best_unsat = std::numeric_limits<double>::infinity();

  std::vector<double> rewards;
  double best_ma = -std::numeric_limits<double>::infinity();
  int last_improvement = 0;
  bool have_ma = false;

  for (int e = 1; e <= cfg.drl.max_episodes; ++e) {
    const double eps = drl::epsilon(cfg.drl.eps, e);
    const std::uint64_t episode_seed = derive_seed(cfg.train_seed, static_cast<std::uint64_t>(e));
    const EpisodeStats stats = run_episode(cfg, scheme, episode_seed, AgentMode::train, &trainer, eps);

    const double unsat = stats.cumulative.unsatisfied_ratio;
    out.curve.push_back(CurvePoint{e, eps, stats.mean_loss, stats.episode_reward, unsat});
    out.episodes_run = e;
    if (unsat < best_unsat) {
      best_unsat = unsat;
      out.best_episode = e;
      best_params = trainer.online.params();
    }

    rewards.push_back(stats.episode_reward);
    if (static_cast<int>(rewards.size()) >= cfg.drl.early_stop_window) {
      double ma = 0;
      for (int i = 0; i < cfg.drl.early_stop_window; ++i) ma += rewards[rewards.size() - 1 - i];
      ma /= cfg.drl.early_stop_window;
      const double floor = cfg.drl.early_stop_min_improvement * std::max(std::fabs(best_ma), 1.0);
      if (!have_ma || ma > best_ma + floor) {
        best_ma = std::max(best_ma, ma);
        last_improvement = e;
        have_ma = true;
      } else if (e - last_improvement >= cfg.drl.early_stop_patience) {
        break;
      }
    }
  }

  out.best_unsatisfied_ratio = best_unsat;
  trainer.online.set_params(best_params);
  drl::sync_target(trainer.online, trainer.target);
  return out;
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "episode,epsilon,mean_loss,episode_reward,unsatisfied_ratio\n";
  for (const auto& p : curve) {
    out << p.episode << ',' << fmt_double(p.eps) << ',' << fmt_double(p.mean_loss) << ','
        << fmt_double(p.episode_reward) << ',' << fmt_double(p.unsatisfied_ratio) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<metrics::ResultRow> evaluate_scheme(const ExperimentConfig& cfg, Scheme scheme, Trainer* trainer) {
  const AgentMode mode = (uses_importance_agent(scheme) || scheme == Scheme::cpdqn_lru) ? AgentMode::frozen
                                                                                        : AgentMode::none;
  std::vector<metrics::ResultRow> rows;
  for (std::uint64_t seed : cfg.eval_seeds) {
    const EpisodeStats stats = run_episode(cfg, scheme, seed, mode, trainer, 0.0);
    metrics::ResultRow cum;
    cum.scheme = scheme_name(scheme);
    cum.seed = seed;
    cum.cache_size_bytes = cfg.cache_size_bytes;
    cum.window_index = -1;
    if (stats.cumulative.total_requests > 0) cum.snap = stats.cumulative;
    rows.push_back(cum);
    for (const auto& [w, snap] : stats.windows) {
      metrics::ResultRow row = cum;
      row.window_index = w;
      row.snap = snap;
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& std_dev) {
  mean = 0;
  std_dev = 0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

SweepOutcome sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep_schemes.empty() || cfg.sweep_cache_sizes.empty())
    throw std::invalid_argument("sweep: need at least one scheme and one cache size");

  SweepOutcome out;
  for (const std::string& name : cfg.sweep_schemes) {
    const Scheme scheme = parse_scheme(name);
    for (std::int64_t size : cfg.sweep_cache_sizes) {
      ExperimentConfig cell = cfg;
      cell.cache_size_bytes = size;

      std::vector<metrics::ResultRow> rows;
      if (is_trainable(scheme)) {
        Trainer trainer(cell, scheme);
        train_agent(cell, scheme, trainer);
        rows = evaluate_scheme(cell, scheme, &trainer);
      } else {
        rows = evaluate_scheme(cell, scheme, nullptr);
      }

      AggregateRow agg;
      agg.scheme = name;
      agg.cache_size_bytes = size;
      std::vector<double> hops, hit, load, unsat, totals;
      for (const auto& r : rows) {
        if (r.window_index != -1 || !r.snap) continue;
        hops.push_back(r.snap->avg_hops);
        hit.push_back(r.snap->hit_ratio);
        load.push_back(r.snap->reduced_load_ratio);
        unsat.push_back(r.snap->unsatisfied_ratio);
        totals.push_back(static_cast<double>(r.snap->total_requests));
      }
      agg.seeds = static_cast<int>(hops.size());
      mean_std(hops, agg.avg_hops_mean, agg.avg_hops_std);
      mean_std(hit, agg.hit_ratio_mean, agg.hit_ratio_std);
      mean_std(load, agg.reduced_load_ratio_mean, agg.reduced_load_ratio_std);
      mean_std(unsat, agg.unsatisfied_ratio_mean, agg.unsatisfied_ratio_std);
      double dummy = 0;
      mean_std(totals, agg.total_requests_mean, dummy);

      out.rows.insert(out.rows.end(), rows.begin(), rows.end());
      out.aggregates.push_back(agg);
    }
  }

  std::sort(out.aggregates.begin(), out.aggregates.end(), [](const AggregateRow& a, const AggregateRow& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    return a.cache_size_bytes < b.cache_size_bytes;
  });
  return out;
}

void write_aggregates_csv(const std::vector<AggregateRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "scheme,cache_size_bytes,seeds,avg_hops_mean,avg_hops_std,hit_ratio_mean,hit_ratio_std,"
         "reduced_load_ratio_mean,reduced_load_ratio_std,unsatisfied_ratio_mean,unsatisfied_ratio_std,"
         "total_requests_mean\n";
  for (const auto& r : rows) {
    out << r.scheme << ',' << r.cache_size_bytes << ',' << r.seeds << ',' << fmt_double(r.avg_hops_mean) << ','
        << fmt_double(r.avg_hops_std) << ',' << fmt_double(r.hit_ratio_mean) << ',' << fmt_double(r.hit_ratio_std)
        << ',' << fmt_double(r.reduced_load_ratio_mean) << ',' << fmt_double(r.reduced_load_ratio_std) << ','
        << fmt_double(r.unsatisfied_ratio_mean) << ',' << fmt_double(r.unsatisfied_ratio_std) << ','
        << fmt_double(r.total_requests_mean) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace mmcache::sim
