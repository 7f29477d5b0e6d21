#include "pcbeta/compile.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <optional>

#include "pcbeta/errors.hpp"

namespace pcbeta {

namespace {

Formula make(FormulaNode::Kind kind, int v = 0, std::vector<Formula> args = {}) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = kind;
  n->var = v;
  n->args = std::move(args);
  return n;
}

constexpr int kMaxCompileVars = 24;

}  // namespace

Formula top() { return make(FormulaNode::Kind::True); }
Formula bottom() { return make(FormulaNode::Kind::False); }

Formula var(Literal lit) {
  if (lit == 0) throw DomainError("literal 0 is not a variable");
  Formula v = make(FormulaNode::Kind::Var, var_of(lit));
  return lit > 0 ? v : negate(v);
}

Formula negate(Formula f) { return make(FormulaNode::Kind::Not, 0, {std::move(f)}); }
Formula conj(std::vector<Formula> fs) { return make(FormulaNode::Kind::And, 0, std::move(fs)); }
Formula disj(std::vector<Formula> fs) { return make(FormulaNode::Kind::Or, 0, std::move(fs)); }
Formula iff(Formula a, Formula b) {
  return make(FormulaNode::Kind::Iff, 0, {std::move(a), std::move(b)});
}

bool evaluate(const Formula& f, const std::vector<bool>& assignment) {
  switch (f->kind) {
    case FormulaNode::Kind::True:
      return true;
    case FormulaNode::Kind::False:
      return false;
    case FormulaNode::Kind::Var:
      return assignment[f->var];
    case FormulaNode::Kind::Not:
      return !evaluate(f->args[0], assignment);
    case FormulaNode::Kind::And:
      return std::all_of(f->args.begin(), f->args.end(),
                         [&](const Formula& a) { return evaluate(a, assignment); });
    case FormulaNode::Kind::Or:
      return std::any_of(f->args.begin(), f->args.end(),
                         [&](const Formula& a) { return evaluate(a, assignment); });
    case FormulaNode::Kind::Iff:
      return evaluate(f->args[0], assignment) == evaluate(f->args[1], assignment);
  }
  return false;
}

bool Theory::satisfied_by(const std::vector<bool>& assignment) const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [&](const Formula& f) { return evaluate(f, assignment); });
}

Bdd::Bdd(std::vector<int> order) : order_(std::move(order)) {
  const int max_var = order_.empty() ? 0 : *std::max_element(order_.begin(), order_.end());
  level_of_var_.assign(max_var + 1, -1);
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (order_[i] < 1 || level_of_var_[order_[i]] != -1) {
      throw DomainError("variable order must list distinct positive variables");
    }
    level_of_var_[order_[i]] = static_cast<int>(i);
  }
  const int terminal = static_cast<int>(order_.size());
  nodes_.push_back({terminal, kFalse, kFalse});
  nodes_.push_back({terminal, kTrue, kTrue});
}

Bdd::Ref Bdd::make(int level, Ref low, Ref high) {
  if (low == high) return low;
  const std::uint64_t key = (static_cast<std::uint64_t>(level) << 48) ^
                            (static_cast<std::uint64_t>(low) << 24) ^ high;
  // Keys are exact while node counts stay below 2^24.
  auto [it, inserted] = unique_.try_emplace(key, static_cast<Ref>(nodes_.size()));
  if (inserted) {
    if (nodes_.size() >= (1u << 24)) throw Error("BDD node limit exceeded");
    nodes_.push_back({level, low, high});
  }
  return it->second;
}

Bdd::Ref Bdd::literal(Literal lit) {
  const int v = var_of(lit);
  if (v >= static_cast<int>(level_of_var_.size()) || level_of_var_[v] < 0) {
    throw DomainError("variable " + std::to_string(v) + " missing from the order");
  }
  return lit > 0 ? make(level_of_var_[v], kFalse, kTrue) : make(level_of_var_[v], kTrue, kFalse);
}

Bdd::Ref Bdd::apply(Op op, Ref a, Ref b) {
  if (op == Op::And) {
    if (a == kFalse || b == kFalse) return kFalse;
    if (a == kTrue) return b;
    if (b == kTrue || a == b) return a;
  } else {
    if (a == kTrue || b == kTrue) return kTrue;
    if (a == kFalse) return b;
    if (b == kFalse || a == b) return a;
  }
  if (a > b) std::swap(a, b);
  const std::uint64_t key =
      (static_cast<std::uint64_t>(op) << 62) ^ (static_cast<std::uint64_t>(a) << 31) ^ b;
  if (auto it = apply_cache_.find(key); it != apply_cache_.end()) return it->second;
  const int la = level_of(a);
  const int lb = level_of(b);
  const int level = std::min(la, lb);
  const Ref a0 = la == level ? nodes_[a].low : a;
  const Ref a1 = la == level ? nodes_[a].high : a;
  const Ref b0 = lb == level ? nodes_[b].low : b;
  const Ref b1 = lb == level ? nodes_[b].high : b;
  const Ref low = apply(op, a0, b0);
  const Ref high = apply(op, a1, b1);
  const Ref r = make(level, low, high);
  apply_cache_[key] = r;
  return r;
}

Bdd::Ref Bdd::apply_and(Ref a, Ref b) { return apply(Op::And, a, b); }
Bdd::Ref Bdd::apply_or(Ref a, Ref b) { return apply(Op::Or, a, b); }

Bdd::Ref Bdd::apply_not(Ref a) {
  if (a == kFalse) return kTrue;
  if (a == kTrue) return kFalse;
  if (auto it = not_cache_.find(a); it != not_cache_.end()) return it->second;
  const Entry e = nodes_[a];
  const Ref r = make(e.level, apply_not(e.low), apply_not(e.high));
  not_cache_[a] = r;
  return r;
}

Bdd::Ref Bdd::from_formula(const Formula& f) {
  switch (f->kind) {
    case FormulaNode::Kind::True:
      return kTrue;
    case FormulaNode::Kind::False:
      return kFalse;
    case FormulaNode::Kind::Var:
      return literal(f->var);
    case FormulaNode::Kind::Not:
      return apply_not(from_formula(f->args[0]));
    case FormulaNode::Kind::And: {
      Ref acc = kTrue;
      for (const Formula& a : f->args) acc = apply_and(acc, from_formula(a));
      return acc;
    }
    case FormulaNode::Kind::Or: {
      Ref acc = kFalse;
      for (const Formula& a : f->args) acc = apply_or(acc, from_formula(a));
      return acc;
    }
    case FormulaNode::Kind::Iff: {
      const Ref a = from_formula(f->args[0]);
      const Ref b = from_formula(f->args[1]);
      return apply_or(apply_and(a, b), apply_and(apply_not(a), apply_not(b)));
    }
  }
  return kFalse;
}

Bdd::Ref Bdd::exists_rec(Ref f, const std::vector<bool>& quantified,
                         std::unordered_map<Ref, Ref>& memo) {
  if (is_terminal(f)) return f;
  if (auto it = memo.find(f); it != memo.end()) return it->second;
  const Entry e = nodes_[f];
  const Ref low = exists_rec(e.low, quantified, memo);
  const Ref high = exists_rec(e.high, quantified, memo);
  const Ref r = quantified[e.level] ? apply_or(low, high) : make(e.level, low, high);
  memo[f] = r;
  return r;
}

Bdd::Ref Bdd::exists(Ref f, const std::vector<int>& vars) {
  std::vector<bool> quantified(order_.size(), false);
  for (int v : vars) {
    if (v >= 1 && v < static_cast<int>(level_of_var_.size()) && level_of_var_[v] >= 0) {
      quantified[level_of_var_[v]] = true;
    }
  }
  std::unordered_map<Ref, Ref> memo;
  return exists_rec(f, quantified, memo);
}

namespace {

class Emitter {
 public:
  Emitter(const Bdd& bdd, bool memo) : bdd_(bdd), memo_(memo) {}

  Circuit run(Bdd::Ref root, int var_count) {
    const NodeId r = emit(root);
    (void)r;
    return Circuit(var_count, std::move(nodes_));
  }

 private:
  NodeId push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  NodeId leaf(Literal lit) {
    if (auto it = leaves_.find(lit); it != leaves_.end()) return it->second;
    const NodeId id = push(Node{NodeKind::Literal, {}, lit, 0});
    leaves_[lit] = id;
    return id;
  }

  NodeId constant(bool value) {
    NodeId& slot = value ? true_id_ : false_id_;
    if (slot == kUnset) slot = push(Node{value ? NodeKind::True : NodeKind::False, {}, 0, 0});
    return slot;
  }

  // Branch v ? f : nothing folded: literal alone for a true cofactor.
  std::optional<NodeId> branch(Literal lit, Bdd::Ref cofactor) {
    if (cofactor == Bdd::kFalse) return std::nullopt;
    const NodeId l = leaf(lit);
    if (cofactor == Bdd::kTrue) return l;
    const NodeId sub = emit(cofactor);
    return push(Node{NodeKind::And, {l, sub}, 0, 0});
  }

  NodeId emit(Bdd::Ref r) {
    if (r == Bdd::kFalse) return constant(false);
    if (r == Bdd::kTrue) return constant(true);
    if (memo_) {
      if (auto it = done_.find(r); it != done_.end()) return it->second;
    }
    const int v = bdd_.var_at(r);
    const auto hi = branch(v, bdd_.high(r));
    const auto lo = branch(-v, bdd_.low(r));
    NodeId id = 0;
    if (hi && lo) {
      id = push(Node{NodeKind::Or, {*hi, *lo}, 0, v});
    } else {
      id = hi ? *hi : *lo;
    }
    if (memo_) done_[r] = id;
    return id;
  }

  static constexpr NodeId kUnset = std::numeric_limits<NodeId>::max();

  const Bdd& bdd_;
  bool memo_;
  std::vector<Node> nodes_;
  std::map<Literal, NodeId> leaves_;
  std::unordered_map<Bdd::Ref, NodeId> done_;
  NodeId true_id_ = kUnset;
  NodeId false_id_ = kUnset;
};

}  // namespace

Circuit shannon_compile(const Theory& t, const CompileOptions& options) {
  std::vector<int> order = options.order;
  if (order.empty()) {
    order.resize(t.var_count);
    std::iota(order.begin(), order.end(), 1);
  }
  {
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(t.var_count);
    std::iota(expected.begin(), expected.end(), 1);
    if (sorted != expected) throw DomainError("order must list every theory variable once");
  }
  std::vector<int> kept;
  for (int v = 1; v <= t.var_count; ++v) {
    if (std::find(options.project_out.begin(), options.project_out.end(), v) ==
        options.project_out.end()) {
      kept.push_back(v);
    }
  }
  if (static_cast<int>(kept.size()) > kMaxCompileVars) {
    throw DomainError("theory keeps " + std::to_string(kept.size()) +
                      " variables; the compiler accepts at most 24");
  }
  Bdd bdd(order);
  Bdd::Ref f = Bdd::kTrue;
  for (const Formula& c : t.constraints) f = bdd.apply_and(f, bdd.from_formula(c));
  if (!options.project_out.empty()) f = bdd.exists(f, options.project_out);
  return Emitter(bdd, options.memo).run(f, t.var_count);
}

namespace {

std::vector<int> topological_order(const BayesNetSpec& spec) {
  const std::size_t n = spec.nodes.size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int p : spec.nodes[i].parents) {
      if (p < 0 || static_cast<std::size_t>(p) >= n) throw Error("parent index out of range");
      children[p].push_back(static_cast<int>(i));
      ++indegree[i];
    }
  }
  std::vector<int> order;
  std::vector<int> ready;
  for (std::size_t i = n; i-- > 0;) {
    if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
  }
  while (!ready.empty()) {
    const int i = ready.back();
    ready.pop_back();
    order.push_back(i);
    for (auto it = children[i].rbegin(); it != children[i].rend(); ++it) {
      if (--indegree[*it] == 0) ready.push_back(*it);
    }
  }
  if (order.size() != n) throw Error("Bayesian network is cyclic");
  return order;
}

int new_var(Program& p, const std::string& name, int parameter) {
  p.names.push_back(name);
  p.parameter_of.push_back(parameter);
  return ++p.theory.var_count;
}

int new_parameter(Program& p, const std::string& name) {
  p.parameter_names.push_back(name);
  return p.parameter_count++;
}

}  // namespace

Program encode_bn(const BayesNetSpec& spec, const std::string& name) {
  Program p;
  p.name = name;
  p.names.push_back("");
  p.parameter_of.push_back(-1);
  const std::size_t n = spec.nodes.size();
  p.cpt.resize(n);
  p.node_vars.assign(n, 0);
  p.node_parents.resize(n);
  for (int i : topological_order(spec)) {
    const auto& node = spec.nodes[i];
    const std::size_t k = node.parents.size();
    if (k > 16) throw Error("node " + node.name + " has too many parents");
    std::vector<int> cpt_vars;
    for (std::size_t config = 0; config < (std::size_t{1} << k); ++config) {
      std::string label = "p(" + node.name;
      for (std::size_t j = 0; j < k; ++j) {
        label += (j ? "," : "|");
        label += ((config >> j) & 1u) ? "" : "-";
        label += spec.nodes[node.parents[j]].name;
      }
      label += ")";
      const int param = new_parameter(p, label);
      p.cpt[i].push_back(param);
      cpt_vars.push_back(new_var(p, label, param));
    }
    const int v = new_var(p, node.name, -1);
    p.node_vars[i] = v;
    p.node_parents[i] = node.parents;
    std::vector<Formula> terms;
    for (std::size_t config = 0; config < cpt_vars.size(); ++config) {
      std::vector<Formula> lits;
      for (std::size_t j = 0; j < k; ++j) {
        const int pv = p.node_vars[node.parents[j]];
        lits.push_back(var(((config >> j) & 1u) ? pv : -pv));
      }
      lits.push_back(var(cpt_vars[config]));
      terms.push_back(conj(std::move(lits)));
    }
    p.theory.constraints.push_back(iff(var(v), disj(std::move(terms))));
  }
  for (int e : spec.evidence_nodes) p.evidence_vars.push_back(p.node_vars.at(e));
  for (int q : spec.query_nodes) p.query_vars.push_back(p.node_vars.at(q));
  p.order.resize(p.theory.var_count);
  std::iota(p.order.begin(), p.order.end(), 1);
  return p;
}

Circuit compile_program(const Program& p, const std::vector<EvidenceItem>& evidence, bool memo) {
  Theory t = p.theory;
  for (const EvidenceItem& e : evidence) t.constraints.push_back(var(e.value ? e.var : -e.var));
  CompileOptions options;
  options.order = p.order;
  options.memo = memo;
  for (int v = 1; v <= t.var_count; ++v) {
    const bool query = std::find(p.query_vars.begin(), p.query_vars.end(), v) != p.query_vars.end();
    if (!p.is_annotated(v) && !query) options.project_out.push_back(v);
  }
  return shannon_compile(t, options);
}

Program burglary_program() {
  Program p;
  p.name = "burglary";
  p.names.push_back("");
  p.parameter_of.push_back(-1);
  const int b = new_var(p, "burglary", new_parameter(p, "burglary"));
  const int e = new_var(p, "earthquake", new_parameter(p, "earthquake"));
  const int h = new_var(p, "hears_alarm(john)", new_parameter(p, "hears_alarm(john)"));
  const int alarm = new_var(p, "alarm", -1);
  const int calls = new_var(p, "calls(john)", -1);
  p.theory.constraints = {iff(var(alarm), disj({var(b), var(e)})),
                          iff(var(calls), conj({var(alarm), var(h)}))};
  p.evidence_vars = {calls};
  p.evidence_values = {true};
  p.query_vars = {b};
  p.order = {b, e, h, alarm, calls};
  return p;
}

Program smokers_program(bool shared_label) {
  Program p;
  p.name = "smokers";
  p.names.push_back("");
  p.parameter_of.push_back(-1);
  const int stress_param = new_parameter(p, "stress");
  const int influence_param = shared_label ? stress_param : new_parameter(p, "influences");
  const int asthma_param = new_parameter(p, "asthma");
  constexpr int kPeople = 4;
  const std::vector<std::pair<int, int>> friends = {{1, 2}, {2, 1}, {2, 4}, {3, 2}, {4, 2}};

  std::vector<int> stress(kPeople + 1);
  for (int x = 1; x <= kPeople; ++x) {
    stress[x] = new_var(p, "stress(" + std::to_string(x) + ")", stress_param);
  }
  // influences(y, x) lets smoking spread from y to x when friend(x, y).
  std::map<std::pair<int, int>, int> influences;
  for (auto [x, y] : friends) {
    influences[{y, x}] = new_var(
        p, "influences(" + std::to_string(y) + "," + std::to_string(x) + ")", influence_param);
  }
  std::vector<int> asthma_rule(kPeople + 1);
  for (int x = 1; x <= kPeople; ++x) {
    asthma_rule[x] = new_var(p, "asthma_rule(" + std::to_string(x) + ")", asthma_param);
  }
  std::vector<int> smokes(kPeople + 1);
  std::vector<int> asthma(kPeople + 1);
  for (int x = 1; x <= kPeople; ++x) smokes[x] = new_var(p, "smokes(" + std::to_string(x) + ")", -1);
  for (int x = 1; x <= kPeople; ++x) asthma[x] = new_var(p, "asthma(" + std::to_string(x) + ")", -1);

  // Least-model semantics of the recursive rule: x smokes iff some stressed
  // person reaches x along a simple path of active influence edges.
  for (int x = 1; x <= kPeople; ++x) {
    std::vector<Formula> paths;
    std::vector<int> path = {x};
    std::vector<Formula> edges;
    auto extend = [&](auto&& self, int head) -> void {
      std::vector<Formula> term = edges;
      term.push_back(var(stress[head]));
      paths.push_back(conj(std::move(term)));
      for (const auto& [edge, v] : influences) {
        const auto [from, to] = edge;
        if (to != head || std::find(path.begin(), path.end(), from) != path.end()) continue;
        path.push_back(from);
        edges.push_back(var(v));
        self(self, from);
        edges.pop_back();
        path.pop_back();
      }
    };
    extend(extend, x);
    p.theory.constraints.push_back(iff(var(smokes[x]), disj(std::move(paths))));
    p.theory.constraints.push_back(
        iff(var(asthma[x]), conj({var(smokes[x]), var(asthma_rule[x])})));
  }
  p.evidence_vars = {smokes[2], influences.at({4, 2})};
  p.evidence_values = {true, false};
  p.query_vars = {smokes[1], smokes[3], smokes[4], asthma[1], asthma[2], asthma[3], asthma[4]};
  p.order.resize(p.theory.var_count);
  std::iota(p.order.begin(), p.order.end(), 1);
  return p;
}

namespace {

BayesNetSpec chain_spec(const std::vector<std::vector<int>>& parents,
                        const std::vector<int>& evidence, const std::vector<int>& queries) {
  BayesNetSpec spec;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    spec.nodes.push_back({"n" + std::to_string(i + 1), parents[i]});
  }
  spec.evidence_nodes = evidence;
  spec.query_nodes = queries;
  return spec;
}

}  // namespace

Program net1_program() {
  // n1 -> n2 -> {n3, n4}; n3 -> {n5, n6}; n6 -> n7; n5 -> {n8, n9}.
  return encode_bn(chain_spec({{}, {0}, {1}, {1}, {2}, {2}, {5}, {4}, {4}}, {0, 3, 6, 7, 8},
                              {1, 2, 4, 5}),
                   "net1");
}

Program net2_program() {
  // {n1, n2} -> n3; n3 -> {n4, n5}; n5 -> {n6, n7}; n4 -> n8.
  return encode_bn(chain_spec({{}, {}, {0, 1}, {2}, {2}, {4}, {4}, {3}}, {0, 1, 5, 6, 7},
                              {2, 3, 4}),
                   "net2");
}

Program net3_program() {
  // {n1, n2, n3} -> n4; n4 -> {n5, n6}; n5 -> n7; n6 -> n8.
  return encode_bn(chain_spec({{}, {}, {}, {0, 1, 2}, {3}, {3}, {4}, {5}}, {0, 1, 2, 6, 7},
                              {3, 4, 5}),
                   "net3");
}

Program builtin_program(const std::string& name) {
  if (name == "burglary") return burglary_program();
  if (name == "smokers") return smokers_program(false);
  if (name == "smokers-shared") return smokers_program(true);
  if (name == "net1") return net1_program();
  if (name == "net2") return net2_program();
  if (name == "net3") return net3_program();
  throw Error("unknown builtin program '" + name + "'");
}

}  // namespace pcbeta
