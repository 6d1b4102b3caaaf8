#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "mmcache/experiment.hpp"
#include "mmcache/sim.hpp"

using namespace mmcache;
using namespace mmcache::sim;

namespace {

// Small, fast configuration shared by the integration cases.
ExperimentConfig tiny_config() {
  ExperimentConfig cfg = ExperimentConfig::desk_defaults();
  cfg.catalog_spec.count = 20;
  cfg.profile.horizon_slots = 120;
  cfg.profile.phases = {{0, 3.0}};
  cfg.profile.shifts.clear();
  cfg.topology.node_count = 2;
  cfg.cache_size_bytes = 100'000'000;
  cfg.drl.train_start_size = 100;
  cfg.drl.batch_size = 16;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("scheme names round-trip") {
    for (const Scheme s : all_schemes()) CHECK(parse_scheme(scheme_name(s)) == s);
    CHECK_THROWS(parse_scheme("fifo"));
    CHECK(all_schemes().size() == 8);

    CHECK(uses_importance_agent(Scheme::d3qn));
    CHECK(uses_importance_agent(Scheme::no_modality));
    CHECK(uses_importance_agent(Scheme::ddqn));
    CHECK_FALSE(uses_importance_agent(Scheme::static_eq4));
    CHECK(uses_score_table(Scheme::static_eq4));
    CHECK_FALSE(uses_score_table(Scheme::lru));
    CHECK(is_trainable(Scheme::cpdqn_lru));
    CHECK_FALSE(is_trainable(Scheme::lce_lru));
  }

  TEST_CASE("defaults describe the two reference setups") {
    const ExperimentConfig desk = ExperimentConfig::desk_defaults();
    CHECK(desk.catalog_spec.count == 50);
    CHECK(desk.topology.node_count == 2);
    CHECK(desk.profile.horizon_slots == 480);
    CHECK(desk.profile.phases.size() == 4);
    CHECK(desk.profile.shifts.size() == 1);
    CHECK(desk.eval_seeds.size() == 5);

    const ExperimentConfig full = ExperimentConfig::full_scale();
    CHECK(full.catalog_spec.count == 500);
    CHECK(full.topology.node_count == 6);
    // expected request volume approximates the reference trace:
    // 6 nodes * (120*2.5 + 120*14.4 + 120*5 + 120*12) = 24408
    double expected = 0;
    for (std::size_t i = 0; i < full.profile.phases.size(); ++i) {
      const auto& ph = full.profile.phases[i];
      const std::int64_t end =
          i + 1 < full.profile.phases.size() ? full.profile.phases[i + 1].start_slot : full.profile.horizon_slots;
      expected += ph.rate * static_cast<double>(end - ph.start_slot);
    }
    expected *= full.topology.node_count;
    CHECK(expected == 24408.0);
  }

  TEST_CASE("config files override the defaults") {
    const Config file = Config::from_string(
        "catalog.count = 30\n"
        "workload.phases = 0:1.5, 60:6\n"
        "workload.horizon_slots = 90\n"
        "workload.shifts = 45:77\n"
        "workload.releases = 50:audio_mp3, 55:haptic_low_fidelity\n"
        "topology.node_count = 3\n"
        "cache.size_bytes = 5e7\n"
        "sweep.cache_sizes = 1e7, 2e7\n"
        "sweep.schemes = lru, d3qn\n"
        "run.eval_seeds = 4, 5\n"
        "drl.max_episodes = 12\n"
        "trigger.period_slots = 30\n"
        "static.w2 = 0.4\n");
    const ExperimentConfig cfg = ExperimentConfig::from_config(file, false);
    CHECK(cfg.catalog_spec.count == 30);
    REQUIRE(cfg.profile.phases.size() == 2);
    CHECK(cfg.profile.phases[1].start_slot == 60);
    CHECK(cfg.profile.phases[1].rate == 6.0);
    CHECK(cfg.profile.horizon_slots == 90);
    REQUIRE(cfg.profile.shifts.size() == 1);
    CHECK(cfg.profile.shifts[0].permutation_seed == 77);
    REQUIRE(cfg.profile.releases.size() == 2);
    CHECK(cfg.profile.releases[1].cls == catalog::ModalityClass::haptic_low_fidelity);
    CHECK(cfg.topology.node_count == 3);
    CHECK(cfg.cache_size_bytes == 50'000'000);
    CHECK(cfg.sweep_cache_sizes == std::vector<std::int64_t>{10'000'000, 20'000'000});
    CHECK(cfg.sweep_schemes == std::vector<std::string>{"lru", "d3qn"});
    CHECK(cfg.eval_seeds == std::vector<std::uint64_t>{4, 5});
    CHECK(cfg.drl.max_episodes == 12);
    CHECK(cfg.trigger.period_slots == 30);
    CHECK(cfg.static_weights.w2 == 0.4);
    CHECK(cfg.static_weights.w1 == 0.25);

    CHECK_THROWS(ExperimentConfig::from_config(Config::from_string("workload.phases = nonsense\n"), false));
    // typos must fail loudly instead of silently running defaults
    CHECK_THROWS(ExperimentConfig::from_config(Config::from_string("drl.warmup_episodes = 3\n"), false));
  }

  TEST_CASE("trainer shapes follow the scheme") {
    const ExperimentConfig cfg = tiny_config();
    const Trainer d3(cfg, Scheme::d3qn);
    CHECK(d3.online.input_dim() == 7);
    CHECK(d3.online.n_actions() == 10);
    CHECK(d3.online.dueling());
    CHECK(d3.train_cfg.rule == drl::TargetRule::double_q);
    CHECK(d3.online.params() == d3.target.params());

    const Trainer slim(cfg, Scheme::no_modality);
    CHECK(slim.online.input_dim() == 4);
    CHECK(slim.online.dueling());

    const Trainer dd(cfg, Scheme::ddqn);
    CHECK(dd.online.input_dim() == 7);
    CHECK_FALSE(dd.online.dueling());

    const Trainer cp(cfg, Scheme::cpdqn_lru);
    CHECK(cp.online.input_dim() == 22);  // 20 contents + load + free share
    CHECK(cp.online.n_actions() == 2);
    CHECK(cp.train_cfg.rule == drl::TargetRule::vanilla_max);

    CHECK_THROWS(Trainer(cfg, Scheme::lru));
  }

  TEST_CASE("episodes are deterministic in their seed") {
    const ExperimentConfig cfg = tiny_config();
    const auto a = run_episode(cfg, Scheme::lce_lru, 5, AgentMode::none, nullptr, 0.0);
    const auto b = run_episode(cfg, Scheme::lce_lru, 5, AgentMode::none, nullptr, 0.0);
    CHECK(a.cumulative.total_requests == b.cumulative.total_requests);
    CHECK(a.cumulative.hit_ratio == b.cumulative.hit_ratio);
    CHECK(a.cumulative.avg_hops == b.cumulative.avg_hops);
    CHECK(a.cumulative.unsatisfied_ratio == b.cumulative.unsatisfied_ratio);
    CHECK(a.cumulative.total_requests > 0);

    const auto c = run_episode(cfg, Scheme::lce_lru, 6, AgentMode::none, nullptr, 0.0);
    CHECK(a.cumulative.total_requests != c.cumulative.total_requests);

    Trainer t1(cfg, Scheme::d3qn), t2(cfg, Scheme::d3qn);
    const auto fa = run_episode(cfg, Scheme::d3qn, 5, AgentMode::frozen, &t1, 0.0);
    const auto fb = run_episode(cfg, Scheme::d3qn, 5, AgentMode::frozen, &t2, 0.0);
    CHECK(fa.cumulative.hit_ratio == fb.cumulative.hit_ratio);
  }

  TEST_CASE("a zero-byte cache forces every request to the origin") {
    ExperimentConfig cfg = tiny_config();
    cfg.cache_size_bytes = 0;
    for (const Scheme s : {Scheme::lce_lru, Scheme::static_eq4, Scheme::dpwcs_lru}) {
      const auto st = run_episode(cfg, s, 2, AgentMode::none, nullptr, 0.0);
      CAPTURE(scheme_name(s));
      CHECK(st.cumulative.hit_ratio == 0.0);
      CHECK(st.cumulative.avg_hops == 5.0);
      CHECK(st.cumulative.reduced_load_ratio == 0.0);
    }
  }

  TEST_CASE("mode and trainer must agree") {
    const ExperimentConfig cfg = tiny_config();
    CHECK_THROWS(run_episode(cfg, Scheme::d3qn, 1, AgentMode::none, nullptr, 0.0));
    CHECK_THROWS(run_episode(cfg, Scheme::d3qn, 1, AgentMode::train, nullptr, 0.1));
    CHECK_THROWS(run_episode(cfg, Scheme::lru, 1, AgentMode::train, nullptr, 0.1));
    Trainer t(cfg, Scheme::d3qn);
    CHECK_THROWS(run_episode(cfg, Scheme::ddqn, 1, AgentMode::train, &t, 0.1));  // shape mismatch
  }

  TEST_CASE("training mode fills the replay buffer and steps the optimizer") {
    const ExperimentConfig cfg = tiny_config();
    Trainer trainer(cfg, Scheme::d3qn);
    const auto e1 = run_episode(cfg, Scheme::d3qn, 1, AgentMode::train, &trainer, 0.5);
    CHECK(trainer.buffer.size() > 0);
    const auto e2 = run_episode(cfg, Scheme::d3qn, 2, AgentMode::train, &trainer, 0.5);
    CHECK(e2.train_steps > 0);
    CHECK(trainer.steps_done == e1.train_steps + e2.train_steps);
    CHECK(std::isfinite(e2.mean_loss));
    CHECK(std::isfinite(e2.episode_reward));
  }

  TEST_CASE("replay mode serves exactly the given trace") {
    ExperimentConfig cfg = tiny_config();
    cfg.cache_size_bytes = 1'000'000'000;  // everything fits; repeats must hit
    std::vector<workload::Request> trace;
    for (int i = 0; i < 10; ++i) trace.push_back({i, i % 2, (i % 3) + 1, i});
    const auto st = run_episode(cfg, Scheme::lru, 0, AgentMode::none, nullptr, 0.0, &trace);
    CHECK(st.cumulative.total_requests == 10);
    CHECK(st.cumulative.hit_ratio > 0.0);  // repeats of ids 1..3 hit after first touch

    std::vector<workload::Request> bad = trace;
    bad.push_back({cfg.profile.horizon_slots, 0, 1, 10});
    CHECK_THROWS(run_episode(cfg, Scheme::lru, 0, AgentMode::none, nullptr, 0.0, &bad));
  }

  TEST_CASE("window series covers the horizon") {
    const ExperimentConfig cfg = tiny_config();
    const auto st = run_episode(cfg, Scheme::lru, 3, AgentMode::none, nullptr, 0.0);
    REQUIRE(st.windows.size() == 2);  // 120 slots / 60
    std::int64_t sum = 0;
    for (const auto& [idx, snap] : st.windows)
      if (snap) sum += snap->total_requests;
    CHECK(sum == st.cumulative.total_requests);
  }
}

TEST_SUITE("experiment") {
  TEST_CASE("short training runs keep the best parameters and log a curve") {
    ExperimentConfig cfg = tiny_config();
    cfg.drl.max_episodes = 4;
    cfg.drl.eps.warmup_episodes = 2;
    Trainer trainer(cfg, Scheme::d3qn);
    const TrainOutcome out = train_agent(cfg, Scheme::d3qn, trainer);
    CHECK(out.episodes_run == 4);
    REQUIRE(out.curve.size() == 4);
    CHECK(out.best_episode >= 1);
    CHECK(out.best_episode <= 4);
    CHECK(out.curve[0].episode == 1);
    CHECK(out.curve[0].eps == 0.99);
    CHECK(out.best_unsatisfied_ratio <= 1.0);
    CHECK(trainer.online.params() == trainer.target.params());  // synced on restore

    const std::string path = "test_curve.csv";
    write_curve_csv(out.curve, path);
    const std::string text = slurp(path);
    CHECK(text.find("episode,epsilon,mean_loss,episode_reward,unsatisfied_ratio\n") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    std::remove(path.c_str());
  }

  TEST_CASE("evaluation emits one cumulative row plus the windows per seed") {
    ExperimentConfig cfg = tiny_config();
    cfg.eval_seeds = {4, 9};
    const auto rows = evaluate_scheme(cfg, Scheme::lce_lru, nullptr);
    REQUIRE(rows.size() == 2 * 3);  // cumulative + two windows, two seeds
    int cumulative = 0;
    for (const auto& r : rows) {
      CHECK(r.scheme == "lce_lru");
      CHECK(r.cache_size_bytes == cfg.cache_size_bytes);
      if (r.window_index == -1) {
        ++cumulative;
        REQUIRE(r.snap.has_value());
        CHECK(r.snap->total_requests > 0);
      }
    }
    CHECK(cumulative == 2);
  }

  TEST_CASE("sweeps aggregate seed statistics per scheme and size") {
    ExperimentConfig cfg = tiny_config();
    cfg.eval_seeds = {1, 2, 3};
    cfg.sweep_schemes = {"lru", "lce_lru"};
    cfg.sweep_cache_sizes = {50'000'000, 100'000'000};
    const SweepOutcome out = sweep(cfg);
    REQUIRE(out.aggregates.size() == 4);
    CHECK(out.rows.size() == 4 * 3 * 3);  // cells x seeds x (cumulative + 2 windows)

    // aggregates must reproduce the mean of the matching cumulative rows
    for (const auto& agg : out.aggregates) {
      CHECK(agg.seeds == 3);
      double mean = 0;
      int n = 0;
      for (const auto& r : out.rows)
        if (r.scheme == agg.scheme && r.cache_size_bytes == agg.cache_size_bytes && r.window_index == -1) {
          mean += r.snap->hit_ratio;
          ++n;
        }
      REQUIRE(n == 3);
      mean /= 3;
      CHECK(agg.hit_ratio_mean == doctest::Approx(mean).epsilon(1e-12));
    }

    // aggregates come out sorted for stable emission
    for (std::size_t i = 1; i < out.aggregates.size(); ++i) {
      const auto &a = out.aggregates[i - 1], &b = out.aggregates[i];
      CHECK((a.scheme < b.scheme || (a.scheme == b.scheme && a.cache_size_bytes < b.cache_size_bytes)));
      CHECK(b.hit_ratio_mean > 0.0);
    }
  }
}
