#pragma once

// Propositional theories, a small ordered-BDD package used as memoised
// Shannon expansion into decision-DNNF circuits, and encoders for the
// example programs.

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcbeta/circuit.hpp"

namespace pcbeta {

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  enum class Kind { True, False, Var, Not, And, Or, Iff };
  Kind kind = Kind::True;
  int var = 0;
  std::vector<Formula> args;
};

Formula top();
Formula bottom();
/// Signed literal: var(3) is x3, var(-3) is its negation.
Formula var(Literal lit);
Formula negate(Formula f);
Formula conj(std::vector<Formula> fs);
Formula disj(std::vector<Formula> fs);
Formula iff(Formula a, Formula b);

/// assignment[v] for v in 1..n (index 0 unused).
bool evaluate(const Formula& f, const std::vector<bool>& assignment);

struct Theory {
  int var_count = 0;
  std::vector<Formula> constraints;

  bool satisfied_by(const std::vector<bool>& assignment) const;
};

/// Reduced ordered BDD over variable levels. Node 0 is false, node 1 true.
class Bdd {
 public:
  using Ref = std::uint32_t;
  static constexpr Ref kFalse = 0;
  static constexpr Ref kTrue = 1;

  /// order[i] is the variable tested at level i.
  explicit Bdd(std::vector<int> order);

  Ref literal(Literal lit);
  Ref apply_and(Ref a, Ref b);
  Ref apply_or(Ref a, Ref b);
  Ref apply_not(Ref a);
  Ref from_formula(const Formula& f);
  /// Existential quantification over `vars`.
  Ref exists(Ref f, const std::vector<int>& vars);

  bool is_terminal(Ref r) const { return r <= kTrue; }
  int var_at(Ref r) const { return order_[nodes_[r].level]; }
  Ref low(Ref r) const { return nodes_[r].low; }
  Ref high(Ref r) const { return nodes_[r].high; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Entry {
    int level;
    Ref low;
    Ref high;
  };
  enum class Op : std::uint8_t { And, Or };

  Ref make(int level, Ref low, Ref high);
  Ref apply(Op op, Ref a, Ref b);
  Ref exists_rec(Ref f, const std::vector<bool>& quantified,
                 std::unordered_map<Ref, Ref>& memo);
  int level_of(Ref r) const { return nodes_[r].level; }

  std::vector<int> order_;
  std::vector<int> level_of_var_;
  std::vector<Entry> nodes_;
  std::unordered_map<std::uint64_t, Ref> unique_;
  std::unordered_map<std::uint64_t, Ref> apply_cache_;
  std::unordered_map<Ref, Ref> not_cache_;
};

struct CompileOptions {
  /// Variable order (every theory variable exactly once); empty means 1..n.
  std::vector<int> order;
  /// Variables existentially projected out before emission.
  std::vector<int> project_out;
  /// Share identical sub-functions; false expands the decision tree.
  bool memo = true;
};

/// Shannon expansion node = (v and f|v) or (-v and f|-v) with constants
/// folded. The result is deterministic and decomposable; an unsatisfiable
/// theory yields a single false node. Theories above 24 variables are
/// rejected.
Circuit shannon_compile(const Theory& t, const CompileOptions& options = {});

/// A binary Bayesian network: each node gets one annotated variable per
/// parent configuration and a derived variable completed by a biconditional.
struct BayesNetSpec {
  struct Node {
    std::string name;
    std::vector<int> parents;  // indices into nodes
  };
  std::vector<Node> nodes;
  std::vector<int> evidence_nodes;
  std::vector<int> query_nodes;
};

/// A compiled-ready program: theory without evidence plus its legend.
struct Program {
  std::string name;
  Theory theory;
  std::vector<std::string> names;   // 1-based
  /// Parameter group of each variable, -1 for derived (indicator) variables.
  std::vector<int> parameter_of;
  int parameter_count = 0;
  std::vector<std::string> parameter_names;
  std::vector<int> evidence_vars;
  /// Fixed evidence values; empty when they are drawn per experiment.
  std::vector<bool> evidence_values;
  std::vector<int> query_vars;
  std::vector<int> order;
  /// For networks: cpt[node] lists the parameter of each parent
  /// configuration (bit i of the index is parent i) and var_of_node[node].
  std::vector<std::vector<int>> cpt;
  std::vector<int> node_vars;
  std::vector<std::vector<int>> node_parents;

  bool is_annotated(int var) const { return parameter_of[var] >= 0; }
};

/// Throws Error on a cyclic network.
Program encode_bn(const BayesNetSpec& spec, const std::string& name = "bn");

/// Conjoins the evidence, projects out derived non-query variables and
/// compiles. Queries and annotated variables always stay in the circuit.
Circuit compile_program(const Program& p, const std::vector<EvidenceItem>& evidence,
                        bool memo = true);

Program burglary_program();
/// `shared_label` ties stress and influences to one parameter.
Program smokers_program(bool shared_label = false);
Program net1_program();
Program net2_program();
Program net3_program();
/// Throws Error for unknown names.
Program builtin_program(const std::string& name);

}  // namespace pcbeta
