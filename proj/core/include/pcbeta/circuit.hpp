#pragma once

// d-DNNF circuits in the c2d textual format, structural validation,
// lambda-indicator conditioning and generic bottom-up evaluation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcbeta {

using NodeId = std::uint32_t;
/// Signed variable id: +v is the positive literal, -v its negation.
using Literal = int;

inline int var_of(Literal lit) { return lit < 0 ? -lit : lit; }

enum class NodeKind : std::uint8_t { And, Or, Literal, True, False };

struct Node {
  NodeKind kind = NodeKind::True;
  std::vector<NodeId> children;
  Literal literal = 0;       // Literal nodes only
  int decision_var = 0;      // Or nodes: parsed, never required
};

struct EvidenceItem {
  int var = 0;
  bool value = true;

  friend bool operator==(const EvidenceItem&, const EvidenceItem&) = default;
};

/// Immutable-after-construction rooted DAG. Children always precede their
/// parents, so node index order is a topological order and the last node is
/// the root.
class Circuit {
 public:
  Circuit() = default;
  Circuit(int var_count, std::vector<Node> nodes);

  int var_count() const { return var_count_; }
  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return static_cast<NodeId>(nodes_.size() - 1); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Per-leaf indicator; 1 unless set_condition cleared it.
  bool lambda(NodeId id) const { return lambda_[id] != 0; }
  std::span<const std::uint8_t> lambdas() const { return lambda_; }

  const std::optional<Literal>& query() const { return query_; }
  const std::vector<EvidenceItem>& evidence() const { return evidence_; }

  /// All literal leaves carrying `lit` (usually zero or one).
  std::vector<NodeId> leaves_with(Literal lit) const;
  bool mentions_var(int var) const;

  /// Same structure with children permuted; used for order-independence checks.
  Circuit with_children_order(std::vector<Node> nodes) const;

 private:
  friend Circuit set_condition(const Circuit&, std::optional<Literal>,
                               const std::vector<EvidenceItem>&);

  int var_count_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::uint8_t> lambda_;
  std::optional<Literal> query_;
  std::vector<EvidenceItem> evidence_;
};

/// Parses "nnf N E V" followed by L / A / O lines. Throws ParseError.
Circuit parse_nnf(std::string_view text);
Circuit read_nnf_file(const std::string& path);
std::string write_nnf(const Circuit& c);

struct Violation {
  enum class Kind { Decomposability, Determinism, LiteralRange };
  Kind kind;
  NodeId node;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;
  bool determinism_checked = false;

  bool ok() const { return violations.empty(); }
};

struct ValidateOptions {
  int max_check_vars = 16;
  /// Skip the determinism warning for circuits above max_check_vars.
  bool trust_determinism = false;
};

/// Decomposability is always checked exactly. Determinism is checked by
/// exhaustive (64-way bit-parallel) model enumeration iff var_count <=
/// max_check_vars (counting variables that occur in the circuit); otherwise it
/// is trusted and a warning is recorded.
ValidationReport validate(const Circuit& c, const ValidateOptions& options = {});

/// Makes every OR node that mentions one of `vars` mention it in all of its
/// children by wrapping deficient children as AND(child, OR(v, -v)). Returns
/// `c` unchanged (same ids) when it is already smooth in those variables.
Circuit smooth_variables(const Circuit& c, const std::vector<int>& vars);

/// Copy of `c` with all lambdas reset, then cleared on leaves that contradict
/// the evidence. The query and evidence variables are smoothed first, since
/// lambda conditioning is only exact on circuits smooth in them. Evidence on variables the circuit does not mention is
/// recorded only (it is already baked into the circuit). The query literal is
/// recorded for shadowing and two-pass conditioning; its variable must appear.
Circuit set_condition(const Circuit& c, std::optional<Literal> query,
                      const std::vector<EvidenceItem>& evidence);

/// Parses lines "evidence <var> <0|1>" and "query <lit>".
struct ConditionSpec {
  std::optional<Literal> query;
  std::vector<EvidenceItem> evidence;
};
ConditionSpec parse_condition(std::string_view text);

}  // namespace pcbeta
