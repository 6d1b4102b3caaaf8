#include "mmcache/drl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mmcache::drl {

struct QNetwork::Cache {
  Vec z1, a1, z2, a2;
  double v = 0;
  Vec adv;  // head outputs: advantages in dueling mode, Q-values otherwise
  Vec q;
};

QNetwork::QNetwork(int input_dim, int hidden, int n_actions, bool dueling, std::uint64_t seed)
    : in_(input_dim), h_(hidden), n_(n_actions), dueling_(dueling) {
  if (in_ <= 0 || h_ <= 0 || n_ <= 0) throw std::invalid_argument("QNetwork: dimensions must be positive");
  const std::size_t in = static_cast<std::size_t>(in_), h = static_cast<std::size_t>(h_),
                    n = static_cast<std::size_t>(n_);
  o_w1_ = 0;
  o_b1_ = o_w1_ + h * in;
  o_w2_ = o_b1_ + h;
  o_b2_ = o_w2_ + h * h;
  std::size_t next = o_b2_ + h;
  if (dueling_) {
    o_wv_ = next;
    o_bv_ = o_wv_ + h;
    next = o_bv_ + 1;
  }
  o_wa_ = next;
  o_ba_ = o_wa_ + n * h;
  p_.assign(o_ba_ + n, 0.0);

  // He initialization on weights, zero biases.
  Rng rng(derive_seed(seed, 0x9E7ULL));
  const auto he = [&rng](double* w, std::size_t count, std::size_t fan_in) {
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) w[i] = scale * rng.normal();
  };
  he(&p_[o_w1_], h * in, in);
  he(&p_[o_w2_], h * h, h);
  if (dueling_) he(&p_[o_wv_], h, h);
  he(&p_[o_wa_], n * h, h);
}

void QNetwork::run_forward(const Vec& state, Cache& c) const {
  if (state.size() != static_cast<std::size_t>(in_))
    throw std::invalid_argument("QNetwork: state dimension mismatch");
  const std::size_t in = static_cast<std::size_t>(in_), h = static_cast<std::size_t>(h_),
                    n = static_cast<std::size_t>(n_);
  c.z1.assign(h, 0.0);
  c.a1.assign(h, 0.0);
  for (std::size_t k = 0; k < h; ++k) {
    double z = p_[o_b1_ + k];
    const double* w = &p_[o_w1_ + k * in];
    for (std::size_t m = 0; m < in; ++m) z += w[m] * state[m];
    c.z1[k] = z;
    c.a1[k] = z > 0 ? z : 0;
  }
  c.z2.assign(h, 0.0);
  c.a2.assign(h, 0.0);
  for (std::size_t k = 0; k < h; ++k) {
    double z = p_[o_b2_ + k];
    const double* w = &p_[o_w2_ + k * h];
    for (std::size_t m = 0; m < h; ++m) z += w[m] * c.a1[m];
    c.z2[k] = z;
    c.a2[k] = z > 0 ? z : 0;
  }
  c.adv.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double z = p_[o_ba_ + j];
    const double* w = &p_[o_wa_ + j * h];
    for (std::size_t m = 0; m < h; ++m) z += w[m] * c.a2[m];
    c.adv[j] = z;
  }
  if (dueling_) {
    double v = p_[o_bv_];
    for (std::size_t m = 0; m < h; ++m) v += p_[o_wv_ + m] * c.a2[m];
    c.v = v;
    double mean = 0;
    for (double a : c.adv) mean += a;
    mean /= static_cast<double>(n);
    c.q.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) c.q[j] = v + c.adv[j] - mean;
  } else {
    c.v = 0;
    c.q = c.adv;
  }
}

Vec QNetwork::forward(const Vec& state) const {
  Cache c;
  run_forward(state, c);
  return c.q;
}

QNetwork::Parts QNetwork::forward_parts(const Vec& state) const {
  Cache c;
  run_forward(state, c);
  return Parts{c.v, c.adv, c.q};
}

void QNetwork::backward(const Vec& state, int action, double dq, Vec& grad) const {
  if (action < 0 || action >= n_) throw std::out_of_range("QNetwork: action out of range");
  if (grad.size() != p_.size()) throw std::invalid_argument("QNetwork: gradient buffer size mismatch");
  Cache c;
  run_forward(state, c);
  const std::size_t in = static_cast<std::size_t>(in_), h = static_cast<std::size_t>(h_),
                    n = static_cast<std::size_t>(n_);

  Vec da2(h, 0.0);
  if (dueling_) {
    // dQ(s,a)/dV = 1 and dQ(s,a)/dA_j = [j == a] - 1/|A|.
    grad[o_bv_] += dq;
    for (std::size_t m = 0; m < h; ++m) {
      grad[o_wv_ + m] += dq * c.a2[m];
      da2[m] += dq * p_[o_wv_ + m];
    }
    const double mean_share = dq / static_cast<double>(n_);
    for (std::size_t j = 0; j < n; ++j) {
      const double dadv = (static_cast<int>(j) == action ? dq : 0.0) - mean_share;
      grad[o_ba_ + j] += dadv;
      const double* w = &p_[o_wa_ + j * h];
      double* gw = &grad[o_wa_ + j * h];
      for (std::size_t m = 0; m < h; ++m) {
        gw[m] += dadv * c.a2[m];
        da2[m] += dadv * w[m];
      }
    }
  } else {
    const std::size_t j = static_cast<std::size_t>(action);
    grad[o_ba_ + j] += dq;
    const double* w = &p_[o_wa_ + j * h];
    double* gw = &grad[o_wa_ + j * h];
    for (std::size_t m = 0; m < h; ++m) {
      gw[m] += dq * c.a2[m];
      da2[m] += dq * w[m];
    }
  }

  Vec da1(h, 0.0);
  for (std::size_t k = 0; k < h; ++k) {
    if (c.z2[k] <= 0) continue;
    const double dz = da2[k];
    grad[o_b2_ + k] += dz;
    const double* w = &p_[o_w2_ + k * h];
    double* gw = &grad[o_w2_ + k * h];
    for (std::size_t m = 0; m < h; ++m) {
      gw[m] += dz * c.a1[m];
      da1[m] += dz * w[m];
    }
  }
  for (std::size_t k = 0; k < h; ++k) {
    if (c.z1[k] <= 0) continue;
    const double dz = da1[k];
    grad[o_b1_ + k] += dz;
    double* gw = &grad[o_w1_ + k * in];
    for (std::size_t m = 0; m < in; ++m) gw[m] += dz * state[m];
  }
}

void QNetwork::set_params(const Vec& p) {
  if (p.size() != p_.size()) throw std::invalid_argument("QNetwork: parameter vector size mismatch");
  p_ = p;
}

void QNetwork::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << "mmcache-qnet 1\n" << in_ << ' ' << h_ << ' ' << n_ << ' ' << (dueling_ ? 1 : 0) << '\n'
      << p_.size() << '\n';
  char buf[64];
  for (double v : p_) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
    if (ec != std::errc()) throw std::runtime_error("checkpoint formatting failed");
    out.write(buf, ptr - buf);
    out.put('\n');
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

QNetwork QNetwork::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "mmcache-qnet" || version != 1)
    throw std::runtime_error("unrecognized checkpoint format: " + path);
  int input = 0, hidden = 0, actions = 0, duel = 0;
  std::size_t count = 0;
  in >> input >> hidden >> actions >> duel >> count;
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  QNetwork net(input, hidden, actions, duel != 0, 0);
  if (count != net.p_.size()) throw std::runtime_error("checkpoint parameter count mismatch: " + path);
  std::string tok;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> tok)) throw std::runtime_error("truncated checkpoint body: " + path);
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, std::chars_format::hex);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw std::runtime_error("bad checkpoint value: '" + tok + "'");
    net.p_[i] = v;
  }
  return net;
}

int argmax_action(const Vec& q) {
  if (q.empty()) throw std::invalid_argument("argmax over empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = i;
  return static_cast<int>(best);
}

Vec td_targets(const std::vector<Transition>& batch, const QNetwork& online, const QNetwork& target, double gamma,
               TargetRule rule) {
  if (batch.empty()) throw std::invalid_argument("td_targets: empty batch");
  if (gamma < 0 || gamma > 1) throw std::invalid_argument("td_targets: gamma outside [0,1]");
  Vec out(batch.size(), 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i];
    if (t.terminal) {
      out[i] = t.reward;
      continue;
    }
    const Vec q_target = target.forward(t.next_state);
    double bootstrap = 0;
    if (rule == TargetRule::double_q) {
      bootstrap = q_target[static_cast<std::size_t>(argmax_action(online.forward(t.next_state)))];
    } else {
      bootstrap = *std::max_element(q_target.begin(), q_target.end());
    }
    out[i] = t.reward + gamma * bootstrap;
  }
  return out;
}

double train_step(QNetwork& net, const QNetwork& target, const std::vector<Transition>& batch,
                  const TrainConfig& cfg) {
  const Vec targets = td_targets(batch, net, target, cfg.gamma, cfg.rule);
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  Vec grad(net.param_count(), 0.0);
  double loss = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i];
    const Vec q = net.forward(t.state);
    const double err = q[static_cast<std::size_t>(t.action)] - targets[i];
    loss += err * err;
    net.backward(t.state, t.action, 2.0 * err * inv_b, grad);
  }
  loss *= inv_b;
  if (!std::isfinite(loss)) return loss;  // caller aborts; do not scramble parameters

  double norm_sq = 0;
  for (double g : grad) norm_sq += g * g;
  const double norm = std::sqrt(norm_sq);
  const double scale = (cfg.grad_clip_norm > 0 && norm > cfg.grad_clip_norm) ? cfg.grad_clip_norm / norm : 1.0;

  Vec p = net.params();
  for (std::size_t i = 0; i < p.size(); ++i) p[i] -= cfg.learning_rate * scale * grad[i];
  net.set_params(p);
  return loss;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  data_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size > data_.size()) throw std::invalid_argument("ReplayBuffer: sample larger than population");
  std::vector<std::size_t> idx;
  idx.reserve(batch_size);
  while (idx.size() < batch_size) {
    const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(data_.size()) - 1));
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
  }
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i : idx) batch.push_back(data_[i]);
  return batch;
}

double epsilon(const EpsilonSchedule& s, int episode) {
  if (episode < 1) throw std::invalid_argument("epsilon: episodes count from 1");
  if (episode <= s.warmup_episodes) return s.eps_start;
  const int k = episode - s.warmup_episodes;
  return std::max(s.eps_start * std::pow(s.decay_rate, k), s.eps_end);
}

int select_action(const QNetwork& net, const Vec& state, double eps, Rng& rng) {
  if (eps < 0 || eps > 1) throw std::invalid_argument("select_action: eps outside [0,1]");
  if (rng.uniform() < eps) return static_cast<int>(rng.uniform_int(0, net.n_actions() - 1));
  return argmax_action(net.forward(state));
}

void sync_target(const QNetwork& online, QNetwork& target) {
  if (online.input_dim() != target.input_dim() || online.hidden_dim() != target.hidden_dim() ||
      online.n_actions() != target.n_actions() || online.dueling() != target.dueling())
    throw std::invalid_argument("sync_target: incompatible network shapes");
  target.set_params(online.params());
}

double gradient_check(const QNetwork& net, const Vec& state, int action, double target, double h) {
  if (h <= 0) throw std::invalid_argument("gradient_check: h must be positive");
  const auto loss_at = [&](const QNetwork& n) {
    const double q = n.forward(state)[static_cast<std::size_t>(action)];
    return (q - target) * (q - target);
  };

  Vec analytic(net.param_count(), 0.0);
  {
    const double q = net.forward(state)[static_cast<std::size_t>(action)];
    net.backward(state, action, 2.0 * (q - target), analytic);
  }

  QNetwork work = net;
  double max_rel = 0;
  for (std::size_t i = 0; i < work.param_count(); ++i) {
    Vec p = work.params();
    const double orig = p[i];
    p[i] = orig + h;
    work.set_params(p);
    const double up = loss_at(work);
    p[i] = orig - h;
    work.set_params(p);
    const double down = loss_at(work);
    p[i] = orig;
    work.set_params(p);
    const double numeric = (up - down) / (2.0 * h);
    const double rel = std::fabs(analytic[i] - numeric) / std::max(std::fabs(analytic[i]) + std::fabs(numeric), 1e-6);
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace mmcache::drl
