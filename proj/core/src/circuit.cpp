#include "pcbeta/circuit.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

#include "pcbeta/errors.hpp"

namespace pcbeta {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

long long to_int(std::string_view tok, std::size_t line) {
  long long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw ParseError(line, "expected an integer, got '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

Circuit::Circuit(int var_count, std::vector<Node> nodes)
    : var_count_(var_count), nodes_(std::move(nodes)), lambda_(nodes_.size(), 1) {
  if (nodes_.empty()) throw CircuitError("circuit has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (NodeId c : nodes_[i].children) {
      if (c >= i) throw CircuitError("child id must precede its parent");
    }
    if (nodes_[i].kind == NodeKind::Literal) {
      const int v = var_of(nodes_[i].literal);
      if (v < 1 || v > var_count_) throw CircuitError("literal out of range");
    }
  }
}

std::vector<NodeId> Circuit::leaves_with(Literal lit) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == NodeKind::Literal && nodes_[i].literal == lit) {
      out.push_back(static_cast<NodeId>(i));
    }
  }
  return out;
}

bool Circuit::mentions_var(int var) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [var](const Node& n) {
    return n.kind == NodeKind::Literal && var_of(n.literal) == var;
  });
}

Circuit Circuit::with_children_order(std::vector<Node> nodes) const {
  Circuit out = *this;
  if (nodes.size() != nodes_.size()) throw CircuitError("node count mismatch");
  out.nodes_ = std::move(nodes);
  return out;
}

Circuit parse_nnf(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  long long declared_nodes = 0;
  long long declared_edges = 0;
  int vars = 0;
  std::vector<Node> nodes;
  long long edges = 0;

  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "c") {
      if (end == text.size()) break;
      continue;
    }
    if (!have_header) {
      if (tok[0] != "nnf" || tok.size() != 4) {
        throw ParseError(line_no, "malformed header, expected 'nnf <nodes> <edges> <vars>'");
      }
      declared_nodes = to_int(tok[1], line_no);
      declared_edges = to_int(tok[2], line_no);
      vars = static_cast<int>(to_int(tok[3], line_no));
      if (declared_nodes <= 0 || declared_edges < 0 || vars < 0) {
        throw ParseError(line_no, "malformed header counts");
      }
      have_header = true;
      if (end == text.size()) break;
      continue;
    }
    Node n;
    const NodeId self = static_cast<NodeId>(nodes.size());
    auto read_children = [&](std::size_t first, long long k) {
      if (k < 0 || static_cast<std::size_t>(k) != tok.size() - first) {
        throw ParseError(line_no, "child count does not match the listed ids");
      }
      for (std::size_t i = first; i < tok.size(); ++i) {
        const long long c = to_int(tok[i], line_no);
        if (c < 0 || c >= static_cast<long long>(self)) {
          throw ParseError(line_no, "dangling child id " + std::to_string(c));
        }
        n.children.push_back(static_cast<NodeId>(c));
      }
      edges += k;
    };
    if (tok[0] == "L") {
      if (tok.size() != 2) throw ParseError(line_no, "literal line needs exactly one literal");
      const long long lit = to_int(tok[1], line_no);
      if (lit == 0 || std::llabs(lit) > vars) {
        throw ParseError(line_no, "literal " + std::to_string(lit) + " out of range");
      }
      n.kind = NodeKind::Literal;
      n.literal = static_cast<Literal>(lit);
    } else if (tok[0] == "A") {
      if (tok.size() < 2) throw ParseError(line_no, "AND line needs a child count");
      read_children(2, to_int(tok[1], line_no));
      n.kind = n.children.empty() ? NodeKind::True : NodeKind::And;
    } else if (tok[0] == "O") {
      if (tok.size() < 3) throw ParseError(line_no, "OR line needs a decision var and child count");
      n.decision_var = static_cast<int>(to_int(tok[1], line_no));
      read_children(3, to_int(tok[2], line_no));
      n.kind = n.children.empty() ? NodeKind::False : NodeKind::Or;
    } else {
      throw ParseError(line_no, "unknown node type '" + std::string(tok[0]) + "'");
    }
    nodes.push_back(std::move(n));
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseError(line_no, "missing 'nnf' header");
  if (static_cast<long long>(nodes.size()) != declared_nodes) {
    throw ParseError(line_no, "header declares " + std::to_string(declared_nodes) +
                                  " nodes, found " + std::to_string(nodes.size()));
  }
  if (edges != declared_edges) {
    throw ParseError(line_no, "header declares " + std::to_string(declared_edges) +
                                  " edges, found " + std::to_string(edges));
  }
  return Circuit(vars, std::move(nodes));
}

Circuit read_nnf_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open circuit file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_nnf(ss.str());
}

std::string write_nnf(const Circuit& c) {
  std::size_t edges = 0;
  for (const Node& n : c.nodes()) edges += n.children.size();
  std::ostringstream out;
  out << "nnf " << c.size() << ' ' << edges << ' ' << c.var_count() << '\n';
  for (const Node& n : c.nodes()) {
    switch (n.kind) {
      case NodeKind::Literal:
        out << "L " << n.literal;
        break;
      case NodeKind::True:
        out << "A 0";
        break;
      case NodeKind::False:
        out << "O 0 0";
        break;
      case NodeKind::And:
        out << "A " << n.children.size();
        break;
      case NodeKind::Or:
        out << "O " << n.decision_var << ' ' << n.children.size();
        break;
    }
    if (n.kind == NodeKind::And || n.kind == NodeKind::Or) {
      for (NodeId ch : n.children) out << ' ' << ch;
    }
    out << '\n';
  }
  return out.str();
}

namespace {

// Sorted variable set of every node's subcircuit.
std::vector<std::vector<int>> variable_sets(const Circuit& c) {
  std::vector<std::vector<int>> vars(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Node& n = c.node(static_cast<NodeId>(i));
    if (n.kind == NodeKind::Literal) {
      vars[i] = {var_of(n.literal)};
      continue;
    }
    std::vector<int> acc;
    for (NodeId ch : n.children) {
      std::vector<int> merged;
      std::set_union(acc.begin(), acc.end(), vars[ch].begin(), vars[ch].end(),
                     std::back_inserter(merged));
      acc.swap(merged);
    }
    vars[i] = std::move(acc);
  }
  return vars;
}

// Variables mentioned by any literal, ascending.
std::vector<int> mentioned_vars(const Circuit& c) {
  std::vector<int> vars;
  for (const Node& n : c.nodes()) {
    if (n.kind == NodeKind::Literal) vars.push_back(var_of(n.literal));
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

void check_determinism(const Circuit& c, const std::vector<int>& vars, ValidationReport& report) {
  const int n = static_cast<int>(vars.size());
  std::vector<int> index_of(c.var_count() + 1, -1);
  for (int i = 0; i < n; ++i) index_of[vars[i]] = i;
  // The first six variables live in the 64 lanes of a word; the rest are enumerated.
  constexpr std::uint64_t kLanePatterns[6] = {
      0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
      0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
  const int lane_vars = std::min(n, 6);
  const std::uint64_t valid_lanes = lane_vars == 6 ? ~0ull : ((1ull << (1 << lane_vars)) - 1);
  const int outer_vars = n - lane_vars;
  const std::uint64_t outer_count = 1ull << outer_vars;
  std::vector<std::uint64_t> value(c.size());
  std::vector<bool> flagged(c.size(), false);

  for (std::uint64_t outer = 0; outer < outer_count; ++outer) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Node& node = c.node(static_cast<NodeId>(i));
      std::uint64_t v = 0;
      switch (node.kind) {
        case NodeKind::True:
          v = valid_lanes;
          break;
        case NodeKind::False:
          v = 0;
          break;
        case NodeKind::Literal: {
          const int idx = index_of[var_of(node.literal)];
          std::uint64_t pos = 0;
          if (idx < lane_vars) {
            pos = kLanePatterns[idx];
          } else {
            pos = ((outer >> (idx - lane_vars)) & 1ull) ? ~0ull : 0ull;
          }
          v = (node.literal > 0 ? pos : ~pos) & valid_lanes;
          break;
        }
        case NodeKind::And:
          v = valid_lanes;
          for (NodeId ch : node.children) v &= value[ch];
          break;
        case NodeKind::Or: {
          std::uint64_t seen = 0;
          for (NodeId ch : node.children) {
            if ((seen & value[ch]) != 0 && !flagged[i]) {
              flagged[i] = true;
              report.violations.push_back({Violation::Kind::Determinism, static_cast<NodeId>(i),
                                           "OR node " + std::to_string(i) +
                                               " has children sharing a model"});
            }
            seen |= value[ch];
          }
          v = seen;
          break;
        }
      }
      value[i] = v;
    }
  }
}

}  // namespace

ValidationReport validate(const Circuit& c, const ValidateOptions& options) {
  ValidationReport report;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Node& n = c.node(static_cast<NodeId>(i));
    if (n.kind == NodeKind::Literal) {
      const int v = var_of(n.literal);
      if (v < 1 || v > c.var_count()) {
        report.violations.push_back({Violation::Kind::LiteralRange, static_cast<NodeId>(i),
                                     "literal out of range"});
      }
    }
  }
  const auto vars = variable_sets(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Node& n = c.node(static_cast<NodeId>(i));
    if (n.kind != NodeKind::And) continue;
    std::vector<int> acc;
    for (NodeId ch : n.children) {
      std::vector<int> shared;
      std::set_intersection(acc.begin(), acc.end(), vars[ch].begin(), vars[ch].end(),
                            std::back_inserter(shared));
      if (!shared.empty()) {
        report.violations.push_back(
            {Violation::Kind::Decomposability, static_cast<NodeId>(i),
             "AND node " + std::to_string(i) + " has children sharing variable " +
                 std::to_string(shared.front())});
        break;
      }
      std::vector<int> merged;
      std::set_union(acc.begin(), acc.end(), vars[ch].begin(), vars[ch].end(),
                     std::back_inserter(merged));
      acc.swap(merged);
    }
  }
  const std::vector<int> used = mentioned_vars(c);
  for (const Violation& v : report.violations) {
    if (v.kind == Violation::Kind::LiteralRange) return report;
  }
  if (static_cast<int>(used.size()) <= options.max_check_vars) {
    check_determinism(c, used, report);
    report.determinism_checked = true;
  } else if (!options.trust_determinism) {
    report.warnings.push_back("determinism not checked: " + std::to_string(used.size()) +
                              " variables exceed max_check_vars of " +
                              std::to_string(options.max_check_vars) + "; trusted");
  }
  return report;
}

Circuit smooth_variables(const Circuit& c, const std::vector<int>& vars) {
  const std::size_t n = c.size();
  // mentions[i][k]: node i's subcircuit mentions vars[k].
  std::vector<std::vector<bool>> mentions(n, std::vector<bool>(vars.size(), false));
  bool smooth = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = c.node(static_cast<NodeId>(i));
    for (std::size_t k = 0; k < vars.size(); ++k) {
      if (node.kind == NodeKind::Literal) {
        mentions[i][k] = var_of(node.literal) == vars[k];
        continue;
      }
      bool any = false;
      bool all = true;
      for (NodeId ch : node.children) {
        any = any || mentions[ch][k];
        all = all && mentions[ch][k];
      }
      mentions[i][k] = any;
      if (node.kind == NodeKind::Or && any && !all) smooth = false;
    }
  }
  if (smooth) return c;

  std::vector<Node> out;
  std::vector<NodeId> remap(n);
  std::vector<NodeId> tautology(vars.size(), 0);
  std::vector<bool> have_tautology(vars.size(), false);
  auto emit = [&out](Node node) {
    out.push_back(std::move(node));
    return static_cast<NodeId>(out.size() - 1);
  };
  auto tautology_of = [&](std::size_t k) {
    if (!have_tautology[k]) {
      Node pos{NodeKind::Literal, {}, vars[k], 0};
      Node neg{NodeKind::Literal, {}, -vars[k], 0};
      const NodeId p = emit(pos);
      const NodeId q = emit(neg);
      tautology[k] = emit(Node{NodeKind::Or, {p, q}, 0, vars[k]});
      have_tautology[k] = true;
    }
    return tautology[k];
  };
  for (std::size_t i = 0; i < n; ++i) {
    Node node = c.node(static_cast<NodeId>(i));
    std::vector<NodeId> children;
    for (NodeId ch : node.children) {
      NodeId mapped = remap[ch];
      if (node.kind == NodeKind::Or) {
        std::vector<NodeId> pads;
        for (std::size_t k = 0; k < vars.size(); ++k) {
          if (mentions[i][k] && !mentions[ch][k]) pads.push_back(tautology_of(k));
        }
        if (!pads.empty()) {
          pads.insert(pads.begin(), mapped);
          mapped = emit(Node{NodeKind::And, std::move(pads), 0, 0});
        }
      }
      children.push_back(mapped);
    }
    node.children = std::move(children);
    remap[i] = emit(std::move(node));
  }
  return Circuit(c.var_count(), std::move(out));
}

Circuit set_condition(const Circuit& c, std::optional<Literal> query,
                      const std::vector<EvidenceItem>& evidence) {
  std::vector<int> smooth_vars;
  if (query && *query != 0) smooth_vars.push_back(var_of(*query));
  for (const EvidenceItem& e : evidence) {
    if (e.var >= 1 && e.var <= c.var_count()) smooth_vars.push_back(e.var);
  }
  std::sort(smooth_vars.begin(), smooth_vars.end());
  smooth_vars.erase(std::unique(smooth_vars.begin(), smooth_vars.end()), smooth_vars.end());
  Circuit out = smooth_variables(c, smooth_vars);
  std::fill(out.lambda_.begin(), out.lambda_.end(), std::uint8_t{1});
  if (query) {
    if (*query == 0 || var_of(*query) > c.var_count() || !c.mentions_var(var_of(*query))) {
      throw CircuitError("query variable " + std::to_string(var_of(*query)) +
                         " does not appear in the circuit");
    }
  }
  for (const EvidenceItem& e : evidence) {
    if (e.var < 1 || e.var > c.var_count()) {
      throw CircuitError("evidence variable " + std::to_string(e.var) + " out of range");
    }
    const Literal contradicting = e.value ? -e.var : e.var;
    for (NodeId id : out.leaves_with(contradicting)) out.lambda_[id] = 0;
  }
  out.query_ = query;
  out.evidence_ = evidence;
  return out;
}

ConditionSpec parse_condition(std::string_view text) {
  ConditionSpec spec;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto tok = split_ws(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok[0] == "evidence") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'evidence <var> <0|1>'");
      const long long v = to_int(tok[1], line_no);
      const long long val = to_int(tok[2], line_no);
      if (v <= 0 || (val != 0 && val != 1)) throw ParseError(line_no, "bad evidence entry");
      spec.evidence.push_back({static_cast<int>(v), val == 1});
    } else if (tok[0] == "query") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'query <var>'");
      const long long v = to_int(tok[1], line_no);
      if (v == 0) throw ParseError(line_no, "query literal must be non-zero");
      spec.query = static_cast<Literal>(v);
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(tok[0]) + "'");
    }
  }
  return spec;
}

}  // namespace pcbeta
