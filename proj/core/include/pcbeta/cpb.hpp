#pragma once

// Covariance-aware inference with beta-distributed leaves: the circuit is
// shadowed along the negated query's ancestor chain, then one sweep carries
// means and pairwise covariances of every node, yielding P(q, e) and P(e)
// jointly and the first-order variance of their ratio.

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "pcbeta/betacalc.hpp"
#include "pcbeta/circuit.hpp"
#include "pcbeta/label_table.hpp"

namespace pcbeta {

inline constexpr NodeId kNoShadow = std::numeric_limits<NodeId>::max();

/// Base circuit plus shadow copies of the negated-query leaves and all their
/// ancestors. Shadow ids continue after the base ids; non-ancestors are
/// shared between both evaluations.
class ShadowedCircuit {
 public:
  const Circuit& base() const { return base_; }
  std::size_t total_size() const { return base_.size() + shadow_nodes_.size(); }
  std::size_t shadow_count() const { return shadow_nodes_.size(); }

  const Node& node(NodeId id) const {
    return id < base_.size() ? base_.node(id) : shadow_nodes_[id - base_.size()];
  }
  bool is_shadow(NodeId id) const { return id >= base_.size(); }
  NodeId shadow_of(NodeId base_id) const { return shadow_of_[base_id]; }
  NodeId original_of(NodeId id) const {
    return is_shadow(id) ? original_of_[id - base_.size()] : id;
  }
  /// Leaf forced to the additive identity (lambda 0, or a negated-query stub).
  bool is_constant_zero(NodeId id) const;

  NodeId root() const { return base_.root(); }
  /// Carries P(q, e); equals root() when the negated query never occurs.
  NodeId shadow_root() const {
    const NodeId s = shadow_of_[base_.root()];
    return s == kNoShadow ? base_.root() : s;
  }

  /// Evaluation order: base nodes by index, each shadow right after its base.
  std::vector<NodeId> schedule() const;

 private:
  friend ShadowedCircuit shadow_circuit(const Circuit& c);

  Circuit base_;
  std::vector<NodeId> shadow_of_;
  std::vector<NodeId> original_of_;
  std::vector<Node> shadow_nodes_;
};

/// Requires a query staged by set_condition.
ShadowedCircuit shadow_circuit(const Circuit& c);

struct QueryResult {
  double mean = 0.0;
  double variance = 0.0;
  BetaLabel matched;
  /// Variance before clamping to [0, mean(1-mean)].
  double raw_variance = 0.0;
  bool clamped = false;
};

/// Per-node means and the full covariance over every node of a shadowed
/// circuit (dense evaluation only).
class MomentState {
 public:
  explicit MomentState(std::size_t nodes = 0) : means_(nodes, 0.0), cov_(nodes * (nodes + 1) / 2) {}

  std::size_t size() const { return means_.size(); }
  double mean(NodeId id) const { return means_[id]; }
  double covariance(NodeId a, NodeId b) const { return cov_[index(a, b)]; }
  double variance(NodeId id) const { return covariance(id, id); }

  std::vector<double>& means() { return means_; }
  std::vector<double>& packed() { return cov_; }

  static std::size_t index(std::size_t a, std::size_t b) {
    if (a < b) std::swap(a, b);
    return a * (a + 1) / 2 + b;
  }

 private:
  std::vector<double> means_;
  std::vector<double> cov_;
};

struct CpbOptions {
  double base_rate = kDefaultBaseRate;
  double prior_weight = kDefaultPriorWeight;
};

/// Dense evaluation: keeps the covariance of every node pair. When `state`
/// is non-null it receives all node moments.
QueryResult eval_cov(const ShadowedCircuit& sc, const LabelTable& labels,
                     const std::optional<LeafCovariance>& leaf_cov = std::nullopt,
                     MomentState* state = nullptr, const CpbOptions& options = {});

struct StreamingStats {
  std::size_t peak_live_rows = 0;
  std::size_t total_nodes = 0;
};

/// Same arithmetic as eval_cov, but covariance rows exist only for nodes
/// with unevaluated parents; leaves are materialised on first use, one
/// correlation component at a time. Rows are freed after a node's last
/// parent is evaluated. Throws Error if live rows would exceed `row_budget`
/// (0 means unlimited).
QueryResult eval_cov_streaming(const ShadowedCircuit& sc, const LabelTable& labels,
                               const std::optional<LeafCovariance>& leaf_cov = std::nullopt,
                               std::size_t row_budget = 0, StreamingStats* stats = nullptr,
                               const CpbOptions& options = {});

/// Shadow + streaming evaluation of a conditioned circuit.
QueryResult cpb_query(const Circuit& conditioned, const LabelTable& labels,
                      const std::optional<LeafCovariance>& leaf_cov = std::nullopt,
                      const CpbOptions& options = {});

/// Conditioned mean/variance from the numerator P(q, e), the evidence P(e)
/// and their covariance, clamped and moment matched.
QueryResult condition_moments(double num_mean, double num_var, double den_mean, double den_var,
                              double cov_num_den, const CpbOptions& options = {});

}  // namespace pcbeta
