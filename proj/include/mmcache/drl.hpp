#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmcache/rng.hpp"

namespace mmcache::drl {

using Vec = std::vector<double>;

struct Transition {
  Vec state;
  int action = 0;
  double reward = 0;
  Vec next_state;
  bool terminal = false;
};

// Two-hidden-layer rectifier MLP over a flat parameter vector. In dueling
// mode the trunk feeds a scalar value head and an |A|-wide advantage head,
// combined as Q(s,a) = V(s) + A(s,a) - mean_a' A(s,a'); in single mode one
// head emits Q directly.
class QNetwork {
 public:
  QNetwork(int input_dim, int hidden, int n_actions, bool dueling, std::uint64_t seed);

  int input_dim() const { return in_; }
  int hidden_dim() const { return h_; }
  int n_actions() const { return n_; }
  bool dueling() const { return dueling_; }

  Vec forward(const Vec& state) const;

  struct Parts {
    double value = 0;
    Vec advantage;
    Vec q;
  };
  Parts forward_parts(const Vec& state) const;

  // Accumulates d(loss)/d(params) into grad for a single sample whose loss
  // derivative with respect to Q(state, action) is dq.
  void backward(const Vec& state, int action, double dq, Vec& grad) const;

  const Vec& params() const { return p_; }
  void set_params(const Vec& p);
  std::size_t param_count() const { return p_.size(); }

  void save(const std::string& path) const;
  static QNetwork load(const std::string& path);

 private:
  struct Cache;
  void run_forward(const Vec& state, Cache& c) const;

  int in_ = 0, h_ = 0, n_ = 0;
  bool dueling_ = true;
  // offsets into p_: w1 [h x in], b1 [h], w2 [h x h], b2 [h],
  // value head wv [h], bv [1] (dueling only), head wa [n x h], ba [n]
  std::size_t o_w1_ = 0, o_b1_ = 0, o_w2_ = 0, o_b2_ = 0, o_wv_ = 0, o_bv_ = 0, o_wa_ = 0, o_ba_ = 0;
  Vec p_;
};

enum class TargetRule { double_q, vanilla_max };

// Bootstrapped targets: terminal -> r; otherwise r + gamma * Q', where Q' is
// the target net's value at the online argmax (double_q) or its own maximum
// (vanilla_max).
Vec td_targets(const std::vector<Transition>& batch, const QNetwork& online, const QNetwork& target, double gamma,
               TargetRule rule = TargetRule::double_q);

struct TrainConfig {
  double learning_rate = 0.0005;
  double gamma = 0.99;
  double grad_clip_norm = 10.0;
  TargetRule rule = TargetRule::double_q;
};

// One SGD step on the mean squared TD error; returns the pre-update loss.
double train_step(QNetwork& net, const QNetwork& target, const std::vector<Transition>& batch,
                  const TrainConfig& cfg);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_ = 0;
  std::size_t cursor_ = 0;
  std::vector<Transition> data_;
};

struct EpsilonSchedule {
  double eps_start = 0.99;
  double eps_end = 0.01;
  double decay_rate = 0.997;
  int warmup_episodes = 100;
};

// eps_start through episode = warmup, then one decay per later episode,
// floored at eps_end.
double epsilon(const EpsilonSchedule& s, int episode);

// With probability eps a uniform action, otherwise the argmax (ties to the
// lowest index).
int select_action(const QNetwork& net, const Vec& state, double eps, Rng& rng);

int argmax_action(const Vec& q);

void sync_target(const QNetwork& online, QNetwork& target);

// Max relative disagreement between the analytic gradient of the squared TD
// error and central finite differences with step h, across all parameters.
double gradient_check(const QNetwork& net, const Vec& state, int action, double target, double h);

}  // namespace mmcache::drl
