#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "wbary/graph_topology.hpp"
#include "wbary/local_problem.hpp"
#include "wbary/optimizer_core.hpp"
#include "wbary/trace.hpp"

namespace wbary {

enum class AlgorithmVariant { a2dwb, a2dwbn, sync_baseline };
std::string_view to_string(AlgorithmVariant v);
AlgorithmVariant algorithm_variant_from_string(std::string_view name);

enum class ActivationMode { permutation, random };
std::string_view to_string(ActivationMode mode);
ActivationMode activation_mode_from_string(std::string_view name);

// ---------------------------------------------------------------------------
// activation schedule

struct Activation {
  double time = 0.0;
  int node = 0;
};

struct ActivationSchedule {
  ActivationMode mode = ActivationMode::permutation;
  double interval_s = 0.2;
  std::uint64_t master_seed = 0;
  std::vector<Activation> activations;  // activation k (0-based) fires at (k+1) * interval_s
};

/// One activation per tick up to and including the horizon. Permutation mode
/// draws a fresh permutation of the nodes for every sweep of m ticks.
ActivationSchedule build_schedule(ActivationMode mode, int m, double interval_s, double horizon_s,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// communication

struct CommModel {
  std::vector<double> delay_support{0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> delay_probs{0.2, 0.2, 0.2, 0.2, 0.2};

  /// Throws ConfigError unless support is positive and probs form a simplex.
  void validate() const;
  double max_delay() const;
  double mean_delay() const;
};

/// Identifies one directed message. `sequence` is the sender's broadcast
/// counter (0 for the initial broadcast).
struct MessageKey {
  int sender = 0;
  int receiver = 0;
  std::uint64_t sequence = 0;
};

/// Categorical draw keyed by (seed, key): replaying a key gives the same delay.
double sample_delay(const CommModel& comm, const MessageKey& key, std::uint64_t seed);

// ---------------------------------------------------------------------------
// events

struct GradientMessage {
  int from = 0;
  int to = 0;
  double send_time = 0.0;
  std::shared_ptr<const Vector> gradient;
};

enum class EventKind : int { deliver = 0, activate = 1 };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::activate;
  int source = 0;              // activated node, or message sender
  std::uint64_t sequence = 0;  // activation index, or broadcast counter
  GradientMessage message;     // deliver only
};

/// Min-queue on (time, kind, source, sequence).
class EventQueue {
 public:
  void push(Event e);
  Event pop();
  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const;
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  double last_popped_ = -1.0;
};

// ---------------------------------------------------------------------------
// node state and simulation

struct TableEntry {
  Vector gradient;
  double timestamp = 0.0;
};

struct NodeState {
  Vector u_bar;
  Vector v_bar;
  std::map<int, TableEntry> neighbor_grad_table;
  Vector own_last_gradient;
  std::int64_t local_iteration_count = 0;
  /// theta of this node's most recent update (theta_1 before the first one).
  double last_theta = 0.0;
  std::uint64_t broadcasts = 0;
};

struct BatchPolicy {
  enum class Mode { fixed, theorem };
  Mode mode = Mode::fixed;
  int fixed_size = 10;
  // theorem mode: batch_size(k, m, sigma2, epsilon, smoothness)
  double sigma2 = 1.0;
  double epsilon = 1.0;
  double smoothness = 1.0;
  /// Upper clamp so a tiny epsilon cannot stall the simulation.
  int max_size = 100000;

  int at(std::int64_t k, int m) const;
};

struct EvalConfig {
  double every_s = 2.0;
  int samples = 200;
  std::uint64_t seed = 20240601;
};

struct SimConfig {
  AlgorithmVariant variant = AlgorithmVariant::a2dwb;
  double gamma = 0.0;
  BatchPolicy batch;
  double horizon_s = 200.0;
  ActivationMode activation_mode = ActivationMode::permutation;
  double interval_s = 0.2;
  CommModel comm;
  std::uint64_t master_seed = 1;
  EvalConfig eval;
  std::string topology_label;

  void validate() const;
};

struct SimStats {
  std::int64_t activations = 0;
  std::int64_t rounds = 0;
  std::int64_t deliveries = 0;
  std::int64_t stale_drops = 0;
  /// Largest (use time - broadcast time) of a table entry read by an update.
  double max_table_age = 0.0;
};

class Simulation {
 public:
  Simulation(Graph graph, std::vector<std::shared_ptr<const LocalDualOracle>> locals,
             SimConfig config);

  /// Every node computes its gradient at 0 and its neighbors' tables are
  /// filled with it at time 0.
  void initialize();

  /// One A2DWB / A2DWBN update of node i at time t, using the current global
  /// counter k for theta_{k+1}. Returns the broadcasts of the fresh gradient.
  std::vector<Event> activate_node(int i, double t);

  /// Applies a delivery under the latest-send-wins rule. Returns false when
  /// the message was older than the stored entry and was dropped.
  bool deliver(const GradientMessage& msg);

  /// One barrier round of the synchronous baseline. Returns its duration.
  /// When `deadline` is exceeded by the round's end the round is discarded
  /// and the state is left untouched.
  double sync_round(double deadline = std::numeric_limits<double>::infinity());

  /// Full run to the horizon including evaluation snapshots.
  Trace run();

  /// eta_bar_i = u_bar + theta_k^2 v_bar at the current counter.
  Vector dual_iterate(int i) const;
  TraceRow snapshot(double time);

  const NodeState& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  std::int64_t global_iteration() const { return global_iter_; }
  double clock() const { return clock_; }
  const SimStats& stats() const { return stats_; }
  const Graph& graph() const { return graph_; }
  const SimConfig& config() const { return config_; }
  double theta(std::int64_t k) const { return thetas_.at(k); }

 private:
  int batch_for(std::int64_t k) const { return config_.batch.at(k, graph_.size()); }
  Vector combine(int i, const Vector& own) const;
  void apply_update(NodeState& node, const Vector& combined, double theta);
  std::vector<Event> broadcast(int i, double t, const Vector& g);
  /// Slowest directed-edge delay of barrier round `seq` (rounds count from 1).
  double round_duration(std::uint64_t seq) const;

  Graph graph_;
  std::vector<std::shared_ptr<const LocalDualOracle>> locals_;
  SimConfig config_;
  mutable ThetaSchedule thetas_;  // cache only
  std::vector<NodeState> nodes_;
  std::int64_t global_iter_ = 0;  // activations (async) or rounds * m (sync)
  std::int64_t rounds_ = 0;
  double clock_ = 0.0;
  bool initialized_ = false;
  SimStats stats_;
};

Trace run_sim(const Graph& graph, std::vector<std::shared_ptr<const LocalDualOracle>> locals,
              const SimConfig& config);

}  // namespace wbary
