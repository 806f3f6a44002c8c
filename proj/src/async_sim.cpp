#include "wbary/async_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wbary/errors.hpp"

namespace wbary {

std::string_view to_string(AlgorithmVariant v) {
  switch (v) {
    case AlgorithmVariant::a2dwb: return "a2dwb";
    case AlgorithmVariant::a2dwbn: return "a2dwbn";
    case AlgorithmVariant::sync_baseline: return "sync_baseline";
  }
  return "unknown";
}

AlgorithmVariant algorithm_variant_from_string(std::string_view name) {
  if (name == "a2dwb") return AlgorithmVariant::a2dwb;
  if (name == "a2dwbn") return AlgorithmVariant::a2dwbn;
  if (name == "sync_baseline" || name == "sync") return AlgorithmVariant::sync_baseline;
  throw ConfigError("unknown algorithm variant '" + std::string(name) +
                    "' (expected a2dwb, a2dwbn or sync_baseline)");
}

std::string_view to_string(ActivationMode mode) {
  return mode == ActivationMode::permutation ? "permutation" : "random";
}

ActivationMode activation_mode_from_string(std::string_view name) {
  if (name == "permutation") return ActivationMode::permutation;
  if (name == "random") return ActivationMode::random;
  throw ConfigError("unknown activation mode '" + std::string(name) +
                    "' (expected permutation or random)");
}

ActivationSchedule build_schedule(ActivationMode mode, int m, double interval_s, double horizon_s,
                                  std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("build_schedule: m must be >= 1");
  if (!(interval_s > 0.0) || !std::isfinite(interval_s))
    throw std::invalid_argument("build_schedule: interval_s must be positive");
  if (!(horizon_s >= 0.0) || !std::isfinite(horizon_s))
    throw std::invalid_argument("build_schedule: horizon_s must be >= 0");

  ActivationSchedule sched{mode, interval_s, seed, {}};
  const auto count = static_cast<std::int64_t>(std::floor(horizon_s / interval_s + 1e-9));
  sched.activations.reserve(static_cast<std::size_t>(count));

  std::vector<int> perm(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < count; ++k) {
    int node = 0;
    if (mode == ActivationMode::permutation) {
      const std::int64_t pos = k % m;
      if (pos == 0) {
        std::iota(perm.begin(), perm.end(), 0);
        RngStream rng = RngStream::keyed(seed, StreamDomain::activation, static_cast<std::uint64_t>(k / m));
        for (int a = m - 1; a > 0; --a)
          std::swap(perm[static_cast<std::size_t>(a)],
                    perm[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(a) + 1))]);
      }
      node = perm[static_cast<std::size_t>(pos)];
    } else {
      node = static_cast<int>(
          RngStream::keyed(seed, StreamDomain::activation, static_cast<std::uint64_t>(k), 1)
              .below(static_cast<std::uint64_t>(m)));
    }
    sched.activations.push_back({static_cast<double>(k + 1) * interval_s, node});
  }
  return sched;
}

void CommModel::validate() const {
  if (delay_support.empty()) throw ConfigError("delay.support must not be empty");
  if (delay_support.size() != delay_probs.size())
    throw ConfigError("delay.support and delay.probs must have the same length");
  double total = 0.0;
  for (std::size_t a = 0; a < delay_support.size(); ++a) {
    if (!(delay_support[a] > 0.0) || !std::isfinite(delay_support[a]))
      throw ConfigError("delay.support entries must be positive and finite");
    if (!(delay_probs[a] >= 0.0) || !std::isfinite(delay_probs[a]))
      throw ConfigError("delay.probs entries must be nonnegative");
    total += delay_probs[a];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("delay.probs must sum to 1");
}

double CommModel::max_delay() const {
  double best = 0.0;
  for (std::size_t a = 0; a < delay_support.size(); ++a)
    if (delay_probs[a] > 0.0) best = std::max(best, delay_support[a]);
  return best;
}

double CommModel::mean_delay() const {
  double mean = 0.0;
  for (std::size_t a = 0; a < delay_support.size(); ++a) mean += delay_support[a] * delay_probs[a];
  return mean;
}

double sample_delay(const CommModel& comm, const MessageKey& key, std::uint64_t seed) {
  RngStream rng = RngStream::keyed(seed, StreamDomain::delay, static_cast<std::uint64_t>(key.sender),
                                   static_cast<std::uint64_t>(key.receiver), key.sequence);
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < comm.delay_support.size(); ++a) {
    if (comm.delay_probs[a] <= 0.0) continue;
    last_positive = a;
    cum += comm.delay_probs[a];
    if (u < cum) return comm.delay_support[a];
  }
  return comm.delay_support[last_positive];  // rounding slack in the cumulative sum
}

bool EventQueue::Later::operator()(const Event& a, const Event& b) const {
  if (a.time != b.time) return a.time > b.time;
  if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
  if (a.source != b.source) return a.source > b.source;
  if (a.sequence != b.sequence) return a.sequence > b.sequence;
  return a.message.to > b.message.to;
}

void EventQueue::push(Event e) {
  if (!std::isfinite(e.time)) throw InvariantViolation("EventQueue: non-finite event time");
  if (e.time < last_popped_) throw InvariantViolation("EventQueue: event scheduled in the past");
  heap_.push(std::move(e));
}

Event EventQueue::pop() {
  if (heap_.empty()) throw InvariantViolation("EventQueue: pop from empty queue");
  Event e = heap_.top();
  heap_.pop();
  last_popped_ = e.time;
  return e;
}

int BatchPolicy::at(std::int64_t k, int m) const {
  if (mode == Mode::fixed) return fixed_size;
  const std::int64_t b = batch_size(k, m, sigma2, epsilon, smoothness);
  return static_cast<int>(std::min<std::int64_t>(b, max_size));
}

void SimConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("algorithm.gamma must be positive");
  if (!(horizon_s >= 0.0) || !std::isfinite(horizon_s))
    throw ConfigError("sim.horizon_s must be >= 0");
  if (!(interval_s > 0.0) || !std::isfinite(interval_s))
    throw ConfigError("sim.activation.interval_s must be positive");
  if (!(eval.every_s > 0.0) || !std::isfinite(eval.every_s))
    throw ConfigError("eval.eval_every_s must be positive");
  if (eval.samples < 1) throw ConfigError("eval.eval_samples must be >= 1");
  if (batch.mode == BatchPolicy::Mode::fixed && batch.fixed_size < 1)
    throw ConfigError("algorithm.batch must be >= 1");
  if (batch.mode == BatchPolicy::Mode::theorem &&
      (!(batch.epsilon > 0.0) || !(batch.smoothness > 0.0) || !(batch.sigma2 >= 0.0)))
    throw ConfigError("algorithm.batch_epsilon must be positive");
  comm.validate();
}

Simulation::Simulation(Graph graph, std::vector<std::shared_ptr<const LocalDualOracle>> locals,
                       SimConfig config)
    : graph_(std::move(graph)),
      locals_(std::move(locals)),
      config_(std::move(config)),
      thetas_(graph_.size()) {
  config_.validate();
  if (static_cast<int>(locals_.size()) != graph_.size())
    throw std::invalid_argument("Simulation: need one local problem per node");
  for (const auto& l : locals_)
    if (!l) throw std::invalid_argument("Simulation: null local problem");
  const int n = locals_.front()->dim();
  for (const auto& l : locals_)
    if (l->dim() != n) throw std::invalid_argument("Simulation: local problems differ in dimension");

  nodes_.resize(static_cast<std::size_t>(graph_.size()));
  for (auto& node : nodes_) {
    node.u_bar = Vector::Zero(n);
    node.v_bar = Vector::Zero(n);
    node.own_last_gradient = Vector::Zero(n);
    node.last_theta = thetas_.at(1);
  }
}

void Simulation::initialize() {
  const int m = graph_.size();
  const int n = locals_.front()->dim();
  const Vector zero = Vector::Zero(n);
  for (int i = 0; i < m; ++i) {
    RngStream rng = RngStream::keyed(config_.master_seed, StreamDomain::oracle,
                                     static_cast<std::uint64_t>(i), 0);
    auto& node = nodes_[static_cast<std::size_t>(i)];
    node.own_last_gradient = locals_[static_cast<std::size_t>(i)]->gradient(zero, batch_for(0), rng);
    node.broadcasts = 1;  // sequence 0 is the initial share
  }
  for (int i = 0; i < m; ++i)
    for (int j : graph_.neighbors(i))
      nodes_[static_cast<std::size_t>(j)].neighbor_grad_table[i] = {
          nodes_[static_cast<std::size_t>(i)].own_last_gradient, 0.0};
  initialized_ = true;
}

Vector Simulation::combine(int i, const Vector& own) const {
  const auto& node = nodes_[static_cast<std::size_t>(i)];
  Vector combined = static_cast<double>(graph_.degree(i)) * own;
  for (int j : graph_.neighbors(i)) {
    auto it = node.neighbor_grad_table.find(j);
    if (it == node.neighbor_grad_table.end())
      throw InvariantViolation("node " + std::to_string(i) + " has no table entry for neighbor " +
                               std::to_string(j));
    combined -= it->second.gradient;
  }
  return combined;
}

void Simulation::apply_update(NodeState& node, const Vector& combined, double theta) {
  const double m = graph_.size();
  const Vector delta = (config_.gamma / (m * theta)) * combined;
  node.u_bar -= delta;
  node.v_bar += ((1.0 - m * theta) / (theta * theta)) * delta;
  node.last_theta = theta;
  ++node.local_iteration_count;
}

std::vector<Event> Simulation::broadcast(int i, double t, const Vector& g) {
  auto& node = nodes_[static_cast<std::size_t>(i)];
  const std::uint64_t seq = node.broadcasts++;
  auto payload = std::make_shared<const Vector>(g);
  std::vector<Event> out;
  out.reserve(graph_.neighbors(i).size());
  for (int j : graph_.neighbors(i)) {
    const double d = sample_delay(config_.comm, {i, j, seq}, config_.master_seed);
    out.push_back({t + d, EventKind::deliver, i, seq, {i, j, t, payload}});
  }
  return out;
}

std::vector<Event> Simulation::activate_node(int i, double t) {
  if (!initialized_) throw InvariantViolation("activate_node before initialize");
  if (i < 0 || i >= graph_.size()) throw std::out_of_range("activate_node: no such node");
  auto& node = nodes_[static_cast<std::size_t>(i)];
  const std::int64_t k = global_iter_;
  const double theta = thetas_.at(k + 1);
  const double extrapolation =
      config_.variant == AlgorithmVariant::a2dwbn ? node.last_theta : theta;

  const Vector omega = node.u_bar + extrapolation * extrapolation * node.v_bar;
  RngStream rng = RngStream::keyed(config_.master_seed, StreamDomain::oracle,
                                   static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k + 1));
  const Vector g = locals_[static_cast<std::size_t>(i)]->gradient(omega, batch_for(k + 1), rng);

  for (const auto& [j, entry] : node.neighbor_grad_table)
    stats_.max_table_age = std::max(stats_.max_table_age, t - entry.timestamp);

  apply_update(node, combine(i, g), theta);
  node.own_last_gradient = g;
  ++global_iter_;
  ++stats_.activations;
  clock_ = std::max(clock_, t);
  return broadcast(i, t, g);
}

bool Simulation::deliver(const GradientMessage& msg) {
  if (!msg.gradient) throw InvariantViolation("deliver: empty message");
  auto& table = nodes_.at(static_cast<std::size_t>(msg.to)).neighbor_grad_table;
  auto it = table.find(msg.from);
  if (it == table.end())
    throw InvariantViolation("deliver: node " + std::to_string(msg.to) +
                             " does not neighbor node " + std::to_string(msg.from));
  if (msg.send_time > it->second.timestamp) {
    it->second = {*msg.gradient, msg.send_time};
    ++stats_.deliveries;
    return true;
  }
  ++stats_.stale_drops;
  return false;
}

double Simulation::round_duration(std::uint64_t seq) const {
  double duration = 0.0;
  for (int i = 0; i < graph_.size(); ++i)
    for (int j : graph_.neighbors(i))
      duration = std::max(duration, sample_delay(config_.comm, {i, j, seq}, config_.master_seed));
  return duration;
}

double Simulation::sync_round(double deadline) {
  if (!initialized_) throw InvariantViolation("sync_round before initialize");
  const int m = graph_.size();
  const auto seq = static_cast<std::uint64_t>(rounds_ + 1);
  const double duration = round_duration(seq);
  if (clock_ + duration > deadline) return duration;

  const double theta = thetas_.at(rounds_ + 1);
  const int batch = batch_for(rounds_ * m + 1);
  std::vector<Vector> grads(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    const Vector omega = node.u_bar + theta * theta * node.v_bar;
    RngStream rng = RngStream::keyed(config_.master_seed, StreamDomain::oracle,
                                     static_cast<std::uint64_t>(i), seq);
    grads[static_cast<std::size_t>(i)] = locals_[static_cast<std::size_t>(i)]->gradient(omega, batch, rng);
  }
  // Barrier: every node holds every neighbor's fresh gradient before updating.
  for (int i = 0; i < m; ++i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    node.own_last_gradient = grads[static_cast<std::size_t>(i)];
    node.broadcasts = seq + 1;
    for (int j : graph_.neighbors(i)) node.neighbor_grad_table[j] = {grads[static_cast<std::size_t>(j)], clock_};
  }
  for (int i = 0; i < m; ++i)
    apply_update(nodes_[static_cast<std::size_t>(i)], combine(i, grads[static_cast<std::size_t>(i)]), theta);

  clock_ += duration;
  ++rounds_;
  ++stats_.rounds;
  global_iter_ = rounds_ * m;
  return duration;
}

Vector Simulation::dual_iterate(int i) const {
  const std::int64_t k =
      config_.variant == AlgorithmVariant::sync_baseline ? rounds_ : global_iter_;
  const double theta = thetas_.at(std::max<std::int64_t>(k, 1));
  const auto& node = nodes_.at(static_cast<std::size_t>(i));
  return node.u_bar + theta * theta * node.v_bar;
}

TraceRow Simulation::snapshot(double time) {
  const int m = graph_.size();
  const int n = locals_.front()->dim();
  BlockMatrix eta(n, m);
  for (int i = 0; i < m; ++i) eta.col(i) = dual_iterate(i);
  // Objective at the projection onto the consensus-free subspace, where the
  // decentralized dual is defined; primals come from each node's own iterate.
  const Vector mean = eta.rowwise().mean();
  double objective = 0.0;
  BlockMatrix primal(n, m);
  for (int i = 0; i < m; ++i) {
    const auto& local = *locals_[static_cast<std::size_t>(i)];
    RngStream value_rng = RngStream::keyed(config_.eval.seed, StreamDomain::eval);
    objective += local.evaluate(eta.col(i) - mean, config_.eval.samples, value_rng).value;
    RngStream primal_rng = RngStream::keyed(config_.eval.seed, StreamDomain::eval);
    primal.col(i) = local.evaluate(eta.col(i), config_.eval.samples, primal_rng).primal;
  }
  return {time,
          global_iter_,
          std::string(to_string(config_.variant)),
          config_.topology_label,
          config_.master_seed,
          objective,
          consensus_quadratic(graph_, primal)};
}

Trace Simulation::run() {
  if (initialized_) throw InvariantViolation("Simulation::run on a used simulation");
  const int m = graph_.size();
  if (config_.variant == AlgorithmVariant::sync_baseline && graph_.edge_count() == 0)
    throw ConfigError("sync_baseline needs at least one edge to define a round duration");
  initialize();

  Trace trace;
  const double horizon = config_.horizon_s;
  const auto eval_count = static_cast<std::int64_t>(std::floor(horizon / config_.eval.every_s + 1e-9)) + 1;
  std::int64_t next_eval = 0;
  auto eval_time = [&](std::int64_t s) { return static_cast<double>(s) * config_.eval.every_s; };
  // Snapshot every evaluation time strictly before `t`; state changes at t come after.
  auto flush_before = [&](double t) {
    while (next_eval < eval_count && eval_time(next_eval) < t) {
      trace.rows.push_back(snapshot(eval_time(next_eval)));
      ++next_eval;
    }
  };

  if (config_.variant == AlgorithmVariant::sync_baseline) {
    for (;;) {
      const double end = clock_ + round_duration(static_cast<std::uint64_t>(rounds_ + 1));
      if (end > horizon) break;
      flush_before(end);
      sync_round();
    }
  } else {
    EventQueue queue;
    const auto sched = build_schedule(config_.activation_mode, m, config_.interval_s, horizon,
                                      config_.master_seed);
    for (std::size_t k = 0; k < sched.activations.size(); ++k) {
      const auto& a = sched.activations[k];
      queue.push({a.time, EventKind::activate, a.node, static_cast<std::uint64_t>(k), {}});
    }
    while (!queue.empty() && queue.top().time <= horizon) {
      flush_before(queue.top().time);
      const Event e = queue.pop();
      if (e.kind == EventKind::activate) {
        for (auto& out : activate_node(e.source, e.time)) queue.push(std::move(out));
      } else {
        if (!(e.time > e.message.send_time))
          throw InvariantViolation("delivery not after its send time");
        deliver(e.message);
      }
    }
  }
  flush_before(std::numeric_limits<double>::infinity());
  return trace;
}

Trace run_sim(const Graph& graph, std::vector<std::shared_ptr<const LocalDualOracle>> locals,
              const SimConfig& config) {
  Simulation sim(graph, std::move(locals), config);
  return sim.run();
}

}  // namespace wbary
