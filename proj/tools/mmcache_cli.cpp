#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmcache/experiment.hpp"
#include "mmcache/sim.hpp"

namespace {

using namespace mmcache;

struct CommonOpts {
  std::string config_path;
  std::string scheme = "d3qn";
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool full_scale = false;
};

sim::ExperimentConfig load_config(const CommonOpts& o) {
  Config file;
  if (!o.config_path.empty()) file = Config::from_file(o.config_path);
  sim::ExperimentConfig cfg = sim::ExperimentConfig::from_config(file, o.full_scale);
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  return cfg;
}

void ensure_out_dir(const sim::ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
}

std::string checkpoint_path(const sim::ExperimentConfig& cfg, const std::string& scheme) {
  return cfg.output_dir + "/" + scheme + ".ckpt";
}

void print_snapshot(const std::string& label, const metrics::MetricsSnapshot& s) {
  std::cout << label << ": requests=" << s.total_requests << " hit_ratio=" << s.hit_ratio
            << " avg_hops=" << s.avg_hops << " reduced_load_ratio=" << s.reduced_load_ratio
            << " unsatisfied_ratio=" << s.unsatisfied_ratio << "\n";
}

int cmd_train(const CommonOpts& o) {
  sim::ExperimentConfig cfg = load_config(o);
  if (o.seed_given) cfg.train_seed = o.seed;
  const sim::Scheme scheme = sim::parse_scheme(o.scheme);
  if (!sim::is_trainable(scheme)) {
    std::cerr << "scheme '" << o.scheme << "' has no learning agent to train\n";
    return 2;
  }
  ensure_out_dir(cfg);

  sim::Trainer trainer(cfg, scheme);
  const sim::TrainOutcome outcome = sim::train_agent(cfg, scheme, trainer);
  trainer.online.save(checkpoint_path(cfg, o.scheme));
  sim::write_curve_csv(outcome.curve, cfg.output_dir + "/curve_" + o.scheme + ".csv");

  std::cout << "trained " << o.scheme << " for " << outcome.episodes_run << " episodes; best episode "
            << outcome.best_episode << " (unsatisfied_ratio=" << outcome.best_unsatisfied_ratio << ")\n"
            << "checkpoint: " << checkpoint_path(cfg, o.scheme) << "\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& o, const std::string& checkpoint) {
  sim::ExperimentConfig cfg = load_config(o);
  if (o.seed_given) cfg.eval_seeds = {o.seed};
  const sim::Scheme scheme = sim::parse_scheme(o.scheme);
  ensure_out_dir(cfg);

  std::vector<metrics::ResultRow> rows;
  if (sim::is_trainable(scheme)) {
    const std::string path = checkpoint.empty() ? checkpoint_path(cfg, o.scheme) : checkpoint;
    sim::Trainer trainer(cfg, scheme);
    const drl::QNetwork net = drl::QNetwork::load(path);
    if (net.input_dim() != trainer.online.input_dim() || net.n_actions() != trainer.online.n_actions() ||
        net.dueling() != trainer.online.dueling()) {
      std::cerr << "checkpoint '" << path << "' does not match scheme '" << o.scheme << "'\n";
      return 2;
    }
    trainer.online = net;
    sim::Trainer* tp = &trainer;
    drl::sync_target(trainer.online, trainer.target);
    rows = sim::evaluate_scheme(cfg, scheme, tp);
  } else {
    rows = sim::evaluate_scheme(cfg, scheme, nullptr);
  }

  const std::string out_path = cfg.output_dir + "/results_" + o.scheme + ".csv";
  metrics::write_results_csv(rows, out_path);

  for (const auto& r : rows)
    if (r.window_index == -1 && r.snap) print_snapshot(o.scheme + " seed " + std::to_string(r.seed), *r.snap);
  std::cout << "results: " << out_path << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& o) {
  sim::ExperimentConfig cfg = load_config(o);
  if (o.seed_given) cfg.train_seed = o.seed;
  ensure_out_dir(cfg);

  const sim::SweepOutcome outcome = sim::sweep(cfg);
  metrics::write_results_csv(outcome.rows, cfg.output_dir + "/results.csv");
  sim::write_aggregates_csv(outcome.aggregates, cfg.output_dir + "/aggregates.csv");
  std::cout << "sweep complete: " << outcome.rows.size() << " rows over " << outcome.aggregates.size()
            << " cells\nresults: " << cfg.output_dir << "/results.csv\naggregates: " << cfg.output_dir
            << "/aggregates.csv\n";
  return 0;
}

int cmd_replay(const CommonOpts& o, const std::string& trace_path, const std::string& checkpoint) {
  sim::ExperimentConfig cfg = load_config(o);
  const sim::Scheme scheme = sim::parse_scheme(o.scheme);
  const std::vector<workload::Request> trace = workload::read_trace_csv(trace_path);

  sim::EpisodeStats stats;
  if (sim::is_trainable(scheme)) {
    if (checkpoint.empty()) {
      std::cerr << "replaying scheme '" << o.scheme << "' requires --checkpoint\n";
      return 2;
    }
    sim::Trainer trainer(cfg, scheme);
    trainer.online = drl::QNetwork::load(checkpoint);
    drl::sync_target(trainer.online, trainer.target);
    stats = sim::run_episode(cfg, scheme, 0, sim::AgentMode::frozen, &trainer, 0.0, &trace);
  } else {
    stats = sim::run_episode(cfg, scheme, 0, sim::AgentMode::none, nullptr, 0.0, &trace);
  }

  print_snapshot(o.scheme + " replay", stats.cumulative);
  return 0;
}

int cmd_selftest(const CommonOpts& o) {
  int failures = 0;
  const auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "ok" : "FAIL") << " " << name << "\n";
    if (!ok) ++failures;
  };

  // The dueling head must keep the action-mean of Q equal to V.
  {
    Rng rng(7);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
      drl::QNetwork net(7, 16, 10, true, rng.next_u64());
      drl::Vec state(7);
      for (auto& v : state) v = rng.uniform();
      const auto parts = net.forward_parts(state);
      double mean = 0;
      for (double q : parts.q) mean += q;
      mean /= static_cast<double>(parts.q.size());
      worst = std::max(worst, std::fabs(mean - parts.value));
    }
    check("dueling mean-Q equals V", worst < 1e-9);
  }

  // The exploration schedule holds its start value through warmup and never
  // drops below its floor.
  {
    drl::EpsilonSchedule s;
    bool ok = true;
    for (int e = 1; e <= s.warmup_episodes; ++e) ok = ok && drl::epsilon(s, e) == s.eps_start;
    ok = ok && drl::epsilon(s, s.warmup_episodes + 5000) == s.eps_end;
    check("epsilon schedule bounds", ok);
  }

  // A short run must respect cache capacity and be reproducible.
  {
    sim::ExperimentConfig cfg = sim::ExperimentConfig::desk_defaults();
    cfg.catalog_spec.count = 20;
    cfg.profile.horizon_slots = 120;
    cfg.profile.shifts.clear();
    cfg.topology.node_count = 1;
    cfg.cache_size_bytes = 50'000'000;
    bool ok = true;
    try {
      const auto a = sim::run_episode(cfg, sim::Scheme::lce_lru, 11, sim::AgentMode::none, nullptr, 0.0);
      const auto b = sim::run_episode(cfg, sim::Scheme::lce_lru, 11, sim::AgentMode::none, nullptr, 0.0);
      ok = a.cumulative.total_requests == b.cumulative.total_requests &&
           a.cumulative.hit_ratio == b.cumulative.hit_ratio &&
           a.cumulative.unsatisfied_ratio == b.cumulative.unsatisfied_ratio;
    } catch (const std::exception& ex) {
      std::cerr << "  " << ex.what() << "\n";
      ok = false;
    }
    check("episode determinism and capacity audit", ok);
  }

  (void)o;
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator of multi-modal content delivery over an edge-caching network"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string trace_path, checkpoint;

  const auto add_common = [&](CLI::App* sub, bool with_scheme) {
    sub->add_option("--config", opts.config_path, "configuration file");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "seed override")->each([&](const std::string&) { opts.seed_given = true; });
    sub->add_flag("--full-scale", opts.full_scale, "use the 500-content, 6-node configuration");
    if (with_scheme) sub->add_option("--scheme", opts.scheme, "caching scheme");
  };

  CLI::App* train = app.add_subcommand("train", "train a learning scheme and write its checkpoint");
  add_common(train, true);
  CLI::App* evaluate = app.add_subcommand("evaluate", "run frozen evaluation episodes");
  add_common(evaluate, true);
  evaluate->add_option("--checkpoint", checkpoint, "parameter checkpoint to evaluate");
  CLI::App* sweep = app.add_subcommand("sweep", "scheme x cache-size x seed cross product");
  add_common(sweep, false);
  CLI::App* replay = app.add_subcommand("replay", "serve a fixed request trace");
  add_common(replay, true);
  replay->add_option("--trace", trace_path, "request trace CSV")->required();
  replay->add_option("--checkpoint", checkpoint, "parameter checkpoint for learning schemes");
  CLI::App* selftest = app.add_subcommand("selftest", "fast internal consistency checks");
  add_common(selftest, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(train)) return cmd_train(opts);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(opts, checkpoint);
    if (app.got_subcommand(sweep)) return cmd_sweep(opts);
    if (app.got_subcommand(replay)) return cmd_replay(opts, trace_path, checkpoint);
    if (app.got_subcommand(selftest)) return cmd_selftest(opts);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
