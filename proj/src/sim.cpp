#include "mmcache/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mmcache/csv.hpp"

namespace mmcache::sim {

namespace {

const std::array<std::string, 8> kSchemeNames = {"d3qn",    "no_modality", "ddqn", "static_eq4",
                                                 "lce_lru", "lru",         "dpwcs_lru", "cpdqn_lru"};

std::vector<std::pair<std::string, std::string>> parse_pair_list(const std::string& raw, const std::string& key) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string cur;
  const auto flush = [&] {
    if (cur.empty()) return;
    const std::size_t colon = cur.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("config key '" + key + "': expected slot:value pairs");
    out.emplace_back(cur.substr(0, colon), cur.substr(colon + 1));
    cur.clear();
  };
  for (char c : raw) {
    if (c == ',')
      flush();
    else if (c != ' ' && c != '\t')
      cur += c;
  }
  flush();
  return out;
}

}  // namespace

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> v = {Scheme::d3qn,    Scheme::no_modality, Scheme::ddqn,      Scheme::static_eq4,
                                        Scheme::lce_lru, Scheme::lru,         Scheme::dpwcs_lru, Scheme::cpdqn_lru};
  return v;
}

const std::string& scheme_name(Scheme s) { return kSchemeNames[static_cast<std::size_t>(s)]; }

Scheme parse_scheme(const std::string& name) {
  for (std::size_t i = 0; i < kSchemeNames.size(); ++i)
    if (kSchemeNames[i] == name) return static_cast<Scheme>(i);
  throw std::invalid_argument("unknown scheme: '" + name + "'");
}

bool uses_importance_agent(Scheme s) {
  return s == Scheme::d3qn || s == Scheme::no_modality || s == Scheme::ddqn;
}

bool uses_score_table(Scheme s) { return uses_importance_agent(s) || s == Scheme::static_eq4; }

bool is_trainable(Scheme s) { return uses_importance_agent(s) || s == Scheme::cpdqn_lru; }

ExperimentConfig ExperimentConfig::desk_defaults() {
  ExperimentConfig cfg;
  cfg.catalog_spec.count = 50;
  cfg.catalog_spec.seed = 1;
  cfg.profile.horizon_slots = 480;
  cfg.profile.phases = {{0, 2.0}, {120, 12.0}, {240, 4.0}, {360, 10.0}};
  cfg.profile.zipf_exponent = 0.8;
  cfg.profile.shifts = {{240, 9001}};
  cfg.topology.node_count = 2;
  cfg.norm.max_access_bw_bps = cfg.topology.access_bw_bps;
  cfg.norm.max_content_size_bytes = static_cast<double>(cfg.catalog_spec.video_size_max_bytes);
  cfg.norm.max_window_requests = 12.0 * 60.0;
  cfg.sweep_schemes.clear();
  for (Scheme s : all_schemes()) cfg.sweep_schemes.push_back(scheme_name(s));
  return cfg;
}

ExperimentConfig ExperimentConfig::full_scale() {
  ExperimentConfig cfg = desk_defaults();
  cfg.catalog_spec.count = 500;
  cfg.profile.phases = {{0, 2.5}, {120, 14.4}, {240, 5.0}, {360, 12.0}};
  cfg.topology.node_count = 6;
  cfg.norm.max_window_requests = 14.4 * 60.0;
  cfg.eval_seeds.clear();
  for (std::uint64_t s = 1; s <= 30; ++s) cfg.eval_seeds.push_back(s);
  cfg.sweep_cache_sizes.clear();
  for (std::int64_t s = 1; s <= 10; ++s) cfg.sweep_cache_sizes.push_back(s * 100'000'000);
  return cfg;
}

void ExperimentConfig::apply(const Config& f) {
  // A typo in a key silently running the defaults would be a debugging trap,
  // so reject anything outside the known vocabulary up front.
  static const std::set<std::string> known = {
      "catalog.count", "catalog.seed", "catalog.video_fraction", "catalog.audio_fraction",
      "catalog.haptic_fraction", "catalog.video_size_min_bytes", "catalog.video_size_max_bytes",
      "catalog.audio_size_min_bytes", "catalog.audio_size_max_bytes", "catalog.haptic_size_min_bytes",
      "catalog.haptic_size_max_bytes", "workload.slot_length_s", "workload.horizon_slots",
      "workload.zipf_exponent", "workload.phases", "workload.shifts", "workload.releases",
      "topology.node_count", "topology.access_bw_bps", "topology.backbone_bw_bps", "topology.backbone_hops",
      "topology.per_hop_propagation_s", "topology.video_packet_bytes", "topology.audio_packet_bytes",
      "topology.haptic_packet_bytes", "cache.size_bytes", "sweep.cache_sizes", "sweep.schemes",
      "run.eval_seeds", "run.train_seed", "run.output_dir", "drl.hidden", "drl.actions",
      "drl.learning_rate", "drl.gamma", "drl.grad_clip_norm", "drl.eps_start", "drl.eps_end",
      "drl.eps_decay_rate", "drl.eps_warmup_episodes", "drl.replay_capacity", "drl.batch_size",
      "drl.train_start_size", "drl.sync_period_steps", "drl.max_episodes", "drl.early_stop_window",
      "drl.early_stop_patience", "drl.early_stop_min_improvement", "reward.r1", "reward.r2", "reward.th1",
      "reward.th2", "reward.th3", "trigger.period_slots", "trigger.rate_jump_factor",
      "norm.max_access_bw_bps", "norm.max_content_size_bytes", "norm.max_window_requests",
      "static.w1", "static.w2", "static.w3", "static.w4", "observer.window_slots", "metrics.window_slots",
  };
  for (const auto& [key, value] : f.values())
    if (!known.count(key)) throw std::invalid_argument("unknown config key: " + key);

  catalog_spec.count = f.get_i64("catalog.count", catalog_spec.count);
  catalog_spec.seed = f.get_u64("catalog.seed", catalog_spec.seed);
  catalog_spec.video_fraction = f.get_f64("catalog.video_fraction", catalog_spec.video_fraction);
  catalog_spec.audio_fraction = f.get_f64("catalog.audio_fraction", catalog_spec.audio_fraction);
  catalog_spec.haptic_fraction = f.get_f64("catalog.haptic_fraction", catalog_spec.haptic_fraction);
  catalog_spec.video_size_min_bytes = f.get_i64("catalog.video_size_min_bytes", catalog_spec.video_size_min_bytes);
  catalog_spec.video_size_max_bytes = f.get_i64("catalog.video_size_max_bytes", catalog_spec.video_size_max_bytes);
  catalog_spec.audio_size_min_bytes = f.get_i64("catalog.audio_size_min_bytes", catalog_spec.audio_size_min_bytes);
  catalog_spec.audio_size_max_bytes = f.get_i64("catalog.audio_size_max_bytes", catalog_spec.audio_size_max_bytes);
  catalog_spec.haptic_size_min_bytes = f.get_i64("catalog.haptic_size_min_bytes", catalog_spec.haptic_size_min_bytes);
  catalog_spec.haptic_size_max_bytes = f.get_i64("catalog.haptic_size_max_bytes", catalog_spec.haptic_size_max_bytes);

  profile.slot_length_s = f.get_f64("workload.slot_length_s", profile.slot_length_s);
  profile.horizon_slots = f.get_i64("workload.horizon_slots", profile.horizon_slots);
  profile.zipf_exponent = f.get_f64("workload.zipf_exponent", profile.zipf_exponent);
  if (f.has("workload.phases")) {
    profile.phases.clear();
    for (const auto& [slot, rate] : parse_pair_list(f.get_str("workload.phases", ""), "workload.phases"))
      profile.phases.push_back({parse_i64(slot), parse_double(rate)});
  }
  if (f.has("workload.shifts")) {
    profile.shifts.clear();
    for (const auto& [slot, seed] : parse_pair_list(f.get_str("workload.shifts", ""), "workload.shifts"))
      profile.shifts.push_back({parse_i64(slot), static_cast<std::uint64_t>(parse_i64(seed))});
  }
  if (f.has("workload.releases")) {
    profile.releases.clear();
    for (const auto& [slot, cls] : parse_pair_list(f.get_str("workload.releases", ""), "workload.releases"))
      profile.releases.push_back({parse_i64(slot), catalog::parse_modality_class(cls)});
  }

  topology.node_count = static_cast<int>(f.get_i64("topology.node_count", topology.node_count));
  topology.access_bw_bps = f.get_f64("topology.access_bw_bps", topology.access_bw_bps);
  topology.backbone_bw_bps = f.get_f64("topology.backbone_bw_bps", topology.backbone_bw_bps);
  topology.backbone_hops = static_cast<int>(f.get_i64("topology.backbone_hops", topology.backbone_hops));
  topology.per_hop_propagation_s = f.get_f64("topology.per_hop_propagation_s", topology.per_hop_propagation_s);
  topology.video_packet_bytes = f.get_i64("topology.video_packet_bytes", topology.video_packet_bytes);
  topology.audio_packet_bytes = f.get_i64("topology.audio_packet_bytes", topology.audio_packet_bytes);
  topology.haptic_packet_bytes = f.get_i64("topology.haptic_packet_bytes", topology.haptic_packet_bytes);

  cache_size_bytes = f.get_i64("cache.size_bytes", cache_size_bytes);
  if (f.has("sweep.cache_sizes")) sweep_cache_sizes = f.get_i64_list("sweep.cache_sizes", "");
  if (f.has("sweep.schemes")) sweep_schemes = f.get_str_list("sweep.schemes", "");
  if (f.has("run.eval_seeds")) eval_seeds = f.get_u64_list("run.eval_seeds", "");
  train_seed = f.get_u64("run.train_seed", train_seed);
  output_dir = f.get_str("run.output_dir", output_dir);

  drl.hidden = static_cast<int>(f.get_i64("drl.hidden", drl.hidden));
  drl.n_actions = static_cast<int>(f.get_i64("drl.actions", drl.n_actions));
  drl.learning_rate = f.get_f64("drl.learning_rate", drl.learning_rate);
  drl.gamma = f.get_f64("drl.gamma", drl.gamma);
  drl.grad_clip_norm = f.get_f64("drl.grad_clip_norm", drl.grad_clip_norm);
  drl.eps.eps_start = f.get_f64("drl.eps_start", drl.eps.eps_start);
  drl.eps.eps_end = f.get_f64("drl.eps_end", drl.eps.eps_end);
  drl.eps.decay_rate = f.get_f64("drl.eps_decay_rate", drl.eps.decay_rate);
  drl.eps.warmup_episodes = static_cast<int>(f.get_i64("drl.eps_warmup_episodes", drl.eps.warmup_episodes));
  drl.replay_capacity = static_cast<std::size_t>(f.get_i64("drl.replay_capacity",
                                                           static_cast<std::int64_t>(drl.replay_capacity)));
  drl.batch_size = static_cast<std::size_t>(f.get_i64("drl.batch_size", static_cast<std::int64_t>(drl.batch_size)));
  drl.train_start_size =
      static_cast<std::size_t>(f.get_i64("drl.train_start_size", static_cast<std::int64_t>(drl.train_start_size)));
  drl.sync_period_steps = static_cast<int>(f.get_i64("drl.sync_period_steps", drl.sync_period_steps));
  drl.max_episodes = static_cast<int>(f.get_i64("drl.max_episodes", drl.max_episodes));
  drl.early_stop_window = static_cast<int>(f.get_i64("drl.early_stop_window", drl.early_stop_window));
  drl.early_stop_patience = static_cast<int>(f.get_i64("drl.early_stop_patience", drl.early_stop_patience));
  drl.early_stop_min_improvement = f.get_f64("drl.early_stop_min_improvement", drl.early_stop_min_improvement);

  reward.r1 = f.get_f64("reward.r1", reward.r1);
  reward.r2 = f.get_f64("reward.r2", reward.r2);
  reward.th1 = f.get_f64("reward.th1", reward.th1);
  reward.th2 = f.get_f64("reward.th2", reward.th2);
  reward.th3 = f.get_f64("reward.th3", reward.th3);

  trigger.period_slots = f.get_i64("trigger.period_slots", trigger.period_slots);
  trigger.rate_jump_factor = f.get_f64("trigger.rate_jump_factor", trigger.rate_jump_factor);

  norm.max_access_bw_bps = f.get_f64("norm.max_access_bw_bps", topology.access_bw_bps);
  norm.max_content_size_bytes =
      f.get_f64("norm.max_content_size_bytes", static_cast<double>(catalog_spec.video_size_max_bytes));
  double peak = 0;
  for (const auto& p : profile.phases) peak = std::max(peak, p.rate);
  norm.max_window_requests =
      f.get_f64("norm.max_window_requests", std::max(1.0, peak * static_cast<double>(observer_window_slots)));

  static_weights.w1 = f.get_f64("static.w1", static_weights.w1);
  static_weights.w2 = f.get_f64("static.w2", static_weights.w2);
  static_weights.w3 = f.get_f64("static.w3", static_weights.w3);
  static_weights.w4 = f.get_f64("static.w4", static_weights.w4);

  observer_window_slots = f.get_i64("observer.window_slots", observer_window_slots);
  metrics_window_slots = f.get_i64("metrics.window_slots", metrics_window_slots);
}

ExperimentConfig ExperimentConfig::from_config(const Config& file, bool full_scale_base) {
  ExperimentConfig cfg = full_scale_base ? full_scale() : desk_defaults();
  cfg.apply(file);
  return cfg;
}

Trainer::Trainer(const ExperimentConfig& cfg, Scheme s)
    : scheme(s),
      online(s == Scheme::cpdqn_lru ? static_cast<int>(cfg.catalog_spec.count) + 2
                                    : (s == Scheme::no_modality ? 4 : 7),
             cfg.drl.hidden, s == Scheme::cpdqn_lru ? 2 : cfg.drl.n_actions,
             s == Scheme::d3qn || s == Scheme::no_modality,
             derive_seed(cfg.train_seed, 0x4E70 + static_cast<std::uint64_t>(s))),
      target(online),
      buffer(cfg.drl.replay_capacity),
      batch_size(cfg.drl.batch_size),
      train_start_size(cfg.drl.train_start_size),
      sync_period_steps(cfg.drl.sync_period_steps),
      sample_rng(derive_seed(cfg.train_seed, 0x5A30 + static_cast<std::uint64_t>(s))) {
  if (!is_trainable(s)) throw std::invalid_argument("scheme has no learning agent: " + scheme_name(s));
  train_cfg.learning_rate = cfg.drl.learning_rate;
  train_cfg.gamma = cfg.drl.gamma;
  train_cfg.grad_clip_norm = cfg.drl.grad_clip_norm;
  train_cfg.rule = s == Scheme::cpdqn_lru ? drl::TargetRule::vanilla_max : drl::TargetRule::double_q;
}

EpisodeStats run_episode(const ExperimentConfig& cfg, Scheme scheme, std::uint64_t episode_seed, AgentMode mode,
                         Trainer* trainer, double eps, const std::vector<workload::Request>* replay_trace) {
  if (mode != AgentMode::none && trainer == nullptr)
    throw std::invalid_argument("run_episode: agent mode requires a trainer");
  if (mode == AgentMode::none && (uses_importance_agent(scheme) || scheme == Scheme::cpdqn_lru))
    throw std::invalid_argument("run_episode: scheme needs an agent: " + scheme_name(scheme));
  if (trainer != nullptr && trainer->scheme != scheme)
    throw std::invalid_argument("run_episode: trainer was built for " + scheme_name(trainer->scheme));
  const bool training = mode == AgentMode::train;

  catalog::Catalog cat = catalog::build_catalog(cfg.catalog_spec);
  const std::int64_t initial_catalog_size = cfg.catalog_spec.count;
  const int nodes = cfg.topology.node_count;
  if (nodes < 1) throw std::invalid_argument("run_episode: need at least one node");

  workload::WorkloadState wl(cfg.profile, cfg.catalog_spec, cat, derive_seed(episode_seed, 0xA0E5ULL));
  Rng agent_rng(derive_seed(episode_seed, 0xA6E2ULL));

  importance::NormConfig norm = cfg.norm;
  norm.include_modality = scheme != Scheme::no_modality;

  std::vector<cache::CacheState> caches(static_cast<std::size_t>(nodes), cache::CacheState(cfg.cache_size_bytes));
  std::vector<importance::RequestWindow> req_win(static_cast<std::size_t>(nodes),
                                                 importance::RequestWindow(cfg.observer_window_slots));
  std::vector<importance::SatisfactionWindow> sat_win(static_cast<std::size_t>(nodes),
                                                      importance::SatisfactionWindow(cfg.observer_window_slots));
  net::SlotLedger ledger(cfg.topology);
  metrics::MetricsAccumulator acc;

  struct Pending {
    drl::Vec state;
    int action = 0;
  };
  std::map<std::pair<int, std::int64_t>, double> score_table;
  std::map<std::pair<int, std::int64_t>, Pending> pending;
  int trigger_count = 0;

  EpisodeStats stats;
  double loss_sum = 0;

  // Pre-sliced trace when replaying a fixed request file.
  std::vector<std::vector<workload::Request>> trace_by_slot;
  if (replay_trace != nullptr) {
    trace_by_slot.resize(static_cast<std::size_t>(cfg.profile.horizon_slots));
    for (const auto& r : *replay_trace) {
      if (r.slot < 0 || r.slot >= cfg.profile.horizon_slots)
        throw std::invalid_argument("replay trace slot outside the configured horizon");
      trace_by_slot[static_cast<std::size_t>(r.slot)].push_back(r);
    }
    for (auto& v : trace_by_slot)
      std::sort(v.begin(), v.end(), [](const workload::Request& a, const workload::Request& b) {
        return a.arrival_order < b.arrival_order;
      });
  }

  const auto audit = [&](int node) {
    if (caches[static_cast<std::size_t>(node)].used_bytes() >
        caches[static_cast<std::size_t>(node)].capacity_bytes())
      throw std::logic_error("cache capacity exceeded at node " + std::to_string(node));
  };

  for (std::int64_t slot = 0; slot < cfg.profile.horizon_slots; ++slot) {
    for (int n = 0; n < nodes; ++n) {
      req_win[static_cast<std::size_t>(n)].advance(slot);
      sat_win[static_cast<std::size_t>(n)].advance(slot);
    }

    std::vector<workload::Request> requests;
    if (replay_trace != nullptr)
      requests = trace_by_slot[static_cast<std::size_t>(slot)];
    else
      requests = wl.step(slot, nodes);

    const importance::SlotEvents events =
        importance::detect_events(cfg.profile, slot, cfg.trigger.rate_jump_factor);

    if (uses_score_table(scheme) && importance::should_trigger(cfg.trigger, slot, events)) {
      // The ledger still holds the previous slot's end state, which is what a
      // periodic observer would see as current utilization.
      for (int n = 0; n < nodes; ++n) {
        const double avail = ledger.access_remaining_bps[static_cast<std::size_t>(n)];
        double node_reward = 0;
        if (training && uses_importance_agent(scheme) && trigger_count > 0) {
          node_reward = importance::immediate_reward(sat_win[static_cast<std::size_t>(n)].unsatisfied_ratio(),
                                                     cfg.reward);
          stats.episode_reward += node_reward;
        }
        for (const auto& content : cat.contents) {
          const importance::Observation obs =
              importance::observe(cat, req_win[static_cast<std::size_t>(n)], n, content.id, avail);
          if (scheme == Scheme::static_eq4) {
            score_table[{n, content.id}] = importance::static_importance(cfg.static_weights, obs, norm);
            continue;
          }
          const drl::Vec state = importance::encode_state(obs, norm);
          if (training) {
            const auto key = std::make_pair(n, content.id);
            if (const auto it = pending.find(key); it != pending.end())
              trainer->buffer.push(drl::Transition{it->second.state, it->second.action, node_reward, state, false});
            const int action = drl::select_action(trainer->online, state, eps, agent_rng);
            score_table[key] = static_cast<double>(action);
            pending[key] = Pending{state, action};
          } else {
            score_table[{n, content.id}] =
                static_cast<double>(drl::argmax_action(trainer->online.forward(state)));
          }
        }
        // Keep the cached entries' stored importance in sync with the newly
        // distributed score table.
        for (const auto& [id, entry] : caches[static_cast<std::size_t>(n)].entries()) {
          (void)entry;
          const auto it = score_table.find({n, id});
          if (it != score_table.end()) caches[static_cast<std::size_t>(n)].refresh_importance(id, it->second);
        }
      }
      ++trigger_count;
    }

    ledger.reset(cfg.topology);

    for (const auto& req : requests) {
      if (req.node_id < 0 || req.node_id >= nodes) throw std::out_of_range("request for unknown node");
      const std::size_t n = static_cast<std::size_t>(req.node_id);
      const catalog::Content& content = cat.by_id(req.content_id);

      const bool hit = caches[n].lookup(req.content_id, slot);
      const net::TransferOutcome outcome = net::admit_transfer(ledger, cfg.topology, req.node_id, content, hit);
      const bool satisfied = net::qos_satisfied(outcome);

      req_win[n].record(slot, req.content_id);
      sat_win[n].record(slot, satisfied);
      acc.record(metrics::EventRecord{slot, req.node_id, req.content_id, hit, outcome.hops, content.size_bytes,
                                      satisfied});

      if (!hit) {
        switch (scheme) {
          case Scheme::d3qn:
          case Scheme::no_modality:
          case Scheme::ddqn:
          case Scheme::static_eq4: {
            const auto it = score_table.find({req.node_id, req.content_id});
            const double imp = it != score_table.end() ? it->second : 0.0;
            caches[n].on_content_arrival(content, imp, slot);
            break;
          }
          case Scheme::lce_lru:
          case Scheme::lru:
            caches[n].lru_admit(content, slot);
            break;
          case Scheme::dpwcs_lru:
            if (cache::dpwcs_admit(req_win[n], req.content_id)) caches[n].lru_admit(content, slot);
            break;
          case Scheme::cpdqn_lru: {
            const double load = static_cast<double>(req_win[n].total()) / cfg.norm.max_window_requests;
            const double free_frac = caches[n].capacity_bytes() > 0
                                         ? static_cast<double>(caches[n].free_bytes()) /
                                               static_cast<double>(caches[n].capacity_bytes())
                                         : 0.0;
            const drl::Vec state = cache::encode_cpdqn_state(req.content_id, initial_catalog_size, load, free_frac);
            const int action = training ? drl::select_action(trainer->online, state, eps, agent_rng)
                                        : drl::argmax_action(trainer->online.forward(state));
            if (training) {
              // One-step admission feedback: agreeing with the windowed
              // popularity signal pays off, fighting it costs.
              const bool popular = cache::dpwcs_admit(req_win[n], req.content_id);
              const double r = (action == cache::kCpdqnAdmit) == popular ? cfg.reward.r2 : -cfg.reward.r2;
              trainer->buffer.push(drl::Transition{state, action, r, state, true});
              stats.episode_reward += r;
            }
            if (action == cache::kCpdqnAdmit) caches[n].lru_admit(content, slot);
            break;
          }
        }
        audit(req.node_id);
      }
    }

    if (training && trainer->buffer.size() >= trainer->train_start_size) {
      const auto batch = trainer->buffer.sample(trainer->batch_size, trainer->sample_rng);
      const double loss = drl::train_step(trainer->online, trainer->target, batch, trainer->train_cfg);
      if (!std::isfinite(loss))
        throw std::runtime_error("training diverged: non-finite loss at slot " + std::to_string(slot));
      loss_sum += loss;
      stats.train_steps += 1;
      trainer->steps_done += 1;
      if (trainer->steps_done % trainer->sync_period_steps == 0) drl::sync_target(trainer->online, trainer->target);
    }
  }

  if (training && uses_importance_agent(scheme)) {
    std::map<int, double> final_reward;
    for (int n = 0; n < nodes; ++n)
      final_reward[n] =
          importance::immediate_reward(sat_win[static_cast<std::size_t>(n)].unsatisfied_ratio(), cfg.reward);
    for (const auto& [key, p] : pending)
      trainer->buffer.push(drl::Transition{p.state, p.action, final_reward[key.first], p.state, true});
    if (trigger_count > 0)
      for (const auto& [n, r] : final_reward) stats.episode_reward += r;
  }

  if (acc.total_requests() > 0) stats.cumulative = acc.snapshot();
  stats.cumulative.total_requests = acc.total_requests();
  stats.windows = acc.window_series(cfg.metrics_window_slots, cfg.profile.horizon_slots);
  stats.mean_loss = stats.train_steps > 0 ? loss_sum / stats.train_steps : 0.0;
  return stats;
}

}  // namespace mmcache::sim
