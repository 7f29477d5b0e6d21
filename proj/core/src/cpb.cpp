#include "pcbeta/cpb.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "pcbeta/errors.hpp"

namespace pcbeta {

bool ShadowedCircuit::is_constant_zero(NodeId id) const {
  const Node& n = node(id);
  if (n.kind == NodeKind::False) return true;
  if (n.kind != NodeKind::Literal) return false;
  return is_shadow(id) || !base_.lambda(id);
}

std::vector<NodeId> ShadowedCircuit::schedule() const {
  std::vector<NodeId> order;
  order.reserve(total_size());
  for (NodeId i = 0; i < base_.size(); ++i) {
    order.push_back(i);
    if (shadow_of_[i] != kNoShadow) order.push_back(shadow_of_[i]);
  }
  return order;
}

ShadowedCircuit shadow_circuit(const Circuit& c) {
  if (!c.query()) throw CircuitError("shadowing needs a query literal; call set_condition first");
  const std::size_t n = c.size();
  std::vector<std::vector<NodeId>> parents(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId ch : c.node(i).children) parents[ch].push_back(i);
  }
  std::vector<bool> in_shadow(n, false);
  std::vector<NodeId> stack = c.leaves_with(-*c.query());
  for (NodeId id : stack) in_shadow[id] = true;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    for (NodeId p : parents[id]) {
      if (!in_shadow[p]) {
        in_shadow[p] = true;
        stack.push_back(p);
      }
    }
  }

  ShadowedCircuit sc;
  sc.base_ = c;
  sc.shadow_of_.assign(n, kNoShadow);
  for (NodeId i = 0; i < n; ++i) {
    if (!in_shadow[i]) continue;
    Node copy = c.node(i);
    for (NodeId& ch : copy.children) {
      if (sc.shadow_of_[ch] != kNoShadow) ch = sc.shadow_of_[ch];
    }
    sc.shadow_of_[i] = static_cast<NodeId>(n + sc.shadow_nodes_.size());
    sc.shadow_nodes_.push_back(std::move(copy));
    sc.original_of_.push_back(i);
  }
  return sc;
}

QueryResult condition_moments(double num_mean, double num_var, double den_mean, double den_var,
                              double cov_num_den, const CpbOptions& options) {
  if (!(den_mean > 0.0)) throw InconsistentEvidence();
  const double n = num_mean;
  const double d = den_mean;
  QueryResult r;
  r.mean = std::clamp(n / d, 0.0, 1.0);
  r.raw_variance = num_var / (d * d) + (n * n) / (d * d * d * d) * den_var -
                   2.0 * n / (d * d * d) * cov_num_den;
  const double cap = r.mean * (1.0 - r.mean);
  r.variance = std::clamp(r.raw_variance, 0.0, cap);
  r.clamped = r.variance != r.raw_variance;
  r.matched = moment_match({r.mean, r.variance}, options.base_rate, options.prior_weight);
  return r;
}

namespace {

constexpr std::int64_t kUnmaterialised = -1;
constexpr std::int64_t kFreed = -2;

class CovarianceSweep {
 public:
  CovarianceSweep(const ShadowedCircuit& sc, const LabelTable& labels, const LeafCovariance& leaf_cov,
                  bool streaming, std::size_t budget)
      : sc_(sc),
        labels_(labels),
        leaf_cov_(leaf_cov),
        streaming_(streaming),
        budget_(budget),
        total_(sc.total_size()),
        mean_(total_, 0.0),
        slot_(total_, kUnmaterialised),
        live_pos_(total_, 0),
        pending_(total_, 0) {
    for (NodeId id = 0; id < total_; ++id) {
      for (NodeId ch : sc_.node(id).children) ++pending_[ch];
    }
    pinned_root_ = sc_.root();
    pinned_shadow_ = sc_.shadow_root();
    if (streaming_) {
      build_components();
    } else {
      cov_.assign(total_ * (total_ + 1) / 2, 0.0);
    }
  }

  void run() {
    if (!streaming_) {
      for (NodeId id = 0; id < total_; ++id) {
        if (is_leaf(id)) materialise_leaf(id);
      }
    }
    for (NodeId id : sc_.schedule()) {
      if (is_leaf(id)) {
        if (streaming_ && (id == pinned_root_ || id == pinned_shadow_)) ensure_leaf(id);
        continue;
      }
      evaluate_internal(id);
    }
  }

  double mean(NodeId id) const { return mean_[id]; }
  double cov(NodeId a, NodeId b) const {
    return cov_[MomentState::index(static_cast<std::size_t>(slot_[a]),
                                   static_cast<std::size_t>(slot_[b]))];
  }
  std::size_t peak() const { return peak_; }

  void export_state(MomentState& state) const {
    state = MomentState(total_);
    state.means() = mean_;
    state.packed() = cov_;
  }

 private:
  bool is_leaf(NodeId id) const {
    const NodeKind k = sc_.node(id).kind;
    return k == NodeKind::Literal || k == NodeKind::True || k == NodeKind::False;
  }

  // Leaves whose probability is a genuine random variable.
  bool is_random_leaf(NodeId id) const {
    const Node& n = sc_.node(id);
    if (n.kind != NodeKind::Literal || sc_.is_constant_zero(id)) return false;
    return !labels_.label(n.literal).is_point_mass();
  }

  double leaf_mean(NodeId id) const {
    const Node& n = sc_.node(id);
    switch (n.kind) {
      case NodeKind::True:
        return 1.0;
      case NodeKind::False:
        return 0.0;
      default:
        return sc_.is_constant_zero(id) ? 0.0 : labels_.label(n.literal).mean();
    }
  }

  int find(std::vector<int>& parent, int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }

  void build_components() {
    const int vars = labels_.var_count();
    std::vector<int> parent(vars + 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto unite = [&](int a, int b) { parent[find(parent, a)] = find(parent, b); };
    for (int v = 1; v <= vars; ++v) unite(v, labels_.parameter_of(v));
    for (const auto& [pair, value] : leaf_cov_.explicit_entries()) {
      if (value != 0.0) unite(pair.first, pair.second);
    }
    component_of_.assign(total_, -1);
    std::vector<int> index_of_root(vars + 1, -1);
    for (NodeId id = 0; id < total_; ++id) {
      if (!is_random_leaf(id)) continue;
      const int r = find(parent, var_of(sc_.node(id).literal));
      if (index_of_root[r] < 0) {
        index_of_root[r] = static_cast<int>(members_.size());
        members_.emplace_back();
      }
      component_of_[id] = index_of_root[r];
      members_[index_of_root[r]].push_back(id);
    }
  }

  std::size_t allocate_slot(NodeId id) {
    std::size_t s = 0;
    if (!streaming_) {
      s = id;
    } else if (!free_slots_.empty()) {
      s = free_slots_.back();
      free_slots_.pop_back();
    } else {
      s = next_slot_++;
      cov_.resize((s + 1) * (s + 2) / 2, 0.0);
    }
    slot_[id] = static_cast<std::int64_t>(s);
    live_pos_[id] = live_.size();
    live_.push_back(id);
    peak_ = std::max(peak_, live_.size());
    if (budget_ != 0 && live_.size() > budget_) {
      throw Error("covariance row budget of " + std::to_string(budget_) + " exceeded");
    }
    return s;
  }

  void release(NodeId id) {
    if (!streaming_ || id == pinned_root_ || id == pinned_shadow_) return;
    free_slots_.push_back(static_cast<std::size_t>(slot_[id]));
    slot_[id] = kFreed;
    const std::size_t pos = live_pos_[id];
    live_[pos] = live_.back();
    live_pos_[live_[pos]] = pos;
    live_.pop_back();
  }

  void materialise_leaf(NodeId id) {
    mean_[id] = leaf_mean(id);
    const std::size_t s = allocate_slot(id);
    const bool random = is_random_leaf(id);
    const Literal lit = sc_.node(id).literal;
    for (NodeId z : live_) {
      double value = 0.0;
      if (random && is_random_leaf(z)) value = leaf_cov_(lit, sc_.node(z).literal);
      cov_[MomentState::index(s, static_cast<std::size_t>(slot_[z]))] = value;
    }
  }

  void ensure_leaf(NodeId id) {
    if (slot_[id] != kUnmaterialised) return;
    const int comp = streaming_ ? component_of_[id] : -1;
    if (comp < 0) {
      materialise_leaf(id);
      return;
    }
    for (NodeId member : members_[comp]) {
      if (slot_[member] == kUnmaterialised &&
          (pending_[member] > 0 || member == pinned_root_ || member == pinned_shadow_)) {
        materialise_leaf(member);
      }
    }
  }

  void evaluate_internal(NodeId id) {
    const Node& node = sc_.node(id);
    const std::size_t k = node.children.size();
    for (NodeId ch : node.children) ensure_leaf(ch);

    weights_.assign(k, 1.0);
    double m = 0.0;
    if (node.kind == NodeKind::And) {
      // Product of the other children's means, via prefix/suffix products so
      // a zero-mean child needs no division.
      prefix_.assign(k + 1, 1.0);
      for (std::size_t i = 0; i < k; ++i) prefix_[i + 1] = prefix_[i] * mean_[node.children[i]];
      double suffix = 1.0;
      for (std::size_t i = k; i-- > 0;) {
        weights_[i] = prefix_[i] * suffix;
        suffix *= mean_[node.children[i]];
      }
      m = prefix_[k];
    } else {
      for (NodeId ch : node.children) m += mean_[ch];
    }
    mean_[id] = m;

    child_slots_.resize(k);
    for (std::size_t i = 0; i < k; ++i) child_slots_[i] = static_cast<std::size_t>(slot_[node.children[i]]);
    const std::size_t s = allocate_slot(id);
    double self = 0.0;
    bool self_done = false;
    for (NodeId z : live_) {
      if (z == id) continue;
      const std::size_t zs = static_cast<std::size_t>(slot_[z]);
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        acc += weights_[i] * cov_[MomentState::index(child_slots_[i], zs)];
      }
      cov_[MomentState::index(s, zs)] = acc;
    }
    for (std::size_t i = 0; i < k; ++i) {
      self += weights_[i] * cov_[MomentState::index(s, child_slots_[i])];
      self_done = true;
    }
    cov_[MomentState::index(s, s)] = self_done ? self : 0.0;

    for (NodeId ch : node.children) {
      if (--pending_[ch] == 0) release(ch);
    }
  }

  const ShadowedCircuit& sc_;
  const LabelTable& labels_;
  const LeafCovariance& leaf_cov_;
  bool streaming_;
  std::size_t budget_;
  std::size_t total_;
  NodeId pinned_root_ = 0;
  NodeId pinned_shadow_ = 0;

  std::vector<double> mean_;
  std::vector<std::int64_t> slot_;
  std::vector<std::size_t> live_pos_;
  std::vector<std::uint32_t> pending_;
  std::vector<NodeId> live_;
  std::vector<double> cov_;
  std::vector<std::size_t> free_slots_;
  std::size_t next_slot_ = 0;
  std::size_t peak_ = 0;

  std::vector<int> component_of_;
  std::vector<std::vector<NodeId>> members_;

  std::vector<double> weights_;
  std::vector<double> prefix_;
  std::vector<std::size_t> child_slots_;
};

QueryResult finish(const CovarianceSweep& sweep, const ShadowedCircuit& sc,
                   const CpbOptions& options) {
  const NodeId num = sc.shadow_root();
  const NodeId den = sc.root();
  return condition_moments(sweep.mean(num), sweep.cov(num, num), sweep.mean(den),
                           sweep.cov(den, den), sweep.cov(num, den), options);
}

}  // namespace

QueryResult eval_cov(const ShadowedCircuit& sc, const LabelTable& labels,
                     const std::optional<LeafCovariance>& leaf_cov, MomentState* state,
                     const CpbOptions& options) {
  const LeafCovariance lc = leaf_cov ? *leaf_cov : LeafCovariance::independent(labels);
  CovarianceSweep sweep(sc, labels, lc, false, 0);
  sweep.run();
  if (state) sweep.export_state(*state);
  return finish(sweep, sc, options);
}

QueryResult eval_cov_streaming(const ShadowedCircuit& sc, const LabelTable& labels,
                               const std::optional<LeafCovariance>& leaf_cov,
                               std::size_t row_budget, StreamingStats* stats,
                               const CpbOptions& options) {
  const LeafCovariance lc = leaf_cov ? *leaf_cov : LeafCovariance::independent(labels);
  CovarianceSweep sweep(sc, labels, lc, true, row_budget);
  sweep.run();
  if (stats) {
    stats->peak_live_rows = sweep.peak();
    stats->total_nodes = sc.total_size();
  }
  return finish(sweep, sc, options);
}

QueryResult cpb_query(const Circuit& conditioned, const LabelTable& labels,
                      const std::optional<LeafCovariance>& leaf_cov, const CpbOptions& options) {
  const Literal q = conditioned.query().value_or(0);
  for (const EvidenceItem& e : conditioned.evidence()) {
    if (q != 0 && e.var == var_of(q)) {
      const double m = (e.value == (q > 0)) ? 1.0 : 0.0;
      return condition_moments(m, 0.0, 1.0, 0.0, 0.0, options);
    }
  }
  return eval_cov_streaming(shadow_circuit(conditioned), labels, leaf_cov, 0, nullptr, options);
}

}  // namespace pcbeta
