#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcbeta/betacalc.hpp"
#include "pcbeta/circuit.hpp"

namespace pcbeta {

/// Labelling function: variable -> beta label of its positive literal. The
/// negative literal always gets the complement. Variables without a label are
/// indicators (non-probabilistic atoms): both literals are certain-true.
///
/// Variables may be tied to a shared parameter; tied variables carry the same
/// label and their probabilities are the same random variable.
class LabelTable {
 public:
  LabelTable() = default;
  explicit LabelTable(int var_count);

  int var_count() const { return static_cast<int>(labels_.size()) - 1; }

  void set(int var, const BetaLabel& label);
  void set_indicator(int var);
  bool is_indicator(int var) const;

  /// Label of a signed literal, the complement for negative literals.
  BetaLabel label(Literal lit) const;

  /// Tie `var` to `representative`'s parameter. Labels must already match.
  void tie(int var, int representative);
  /// Representative variable of var's parameter (var itself when untied).
  int parameter_of(int var) const { return param_[var]; }
  /// Sets the label of every variable tied to `representative`.
  void set_parameter(int representative, const BetaLabel& label);

 private:
  void check_var(int var) const;

  std::vector<BetaLabel> labels_{1};
  std::vector<bool> indicator_{true};
  std::vector<int> param_{0};
};

/// Covariances between leaf probabilities, stored per positive-literal pair;
/// entries involving negative literals follow from cov[-v, w] = -cov[v, w].
/// Diagonal and complement blocks always come from the labels.
class LeafCovariance {
 public:
  /// Independent leaves apart from tied parameters (block-diagonal pattern).
  static LeafCovariance independent(const LabelTable& labels);

  /// cov[lit_i, lit_j] including the forced diagonal/complement/tie blocks.
  double operator()(Literal a, Literal b) const;

  /// Explicit entry for a literal pair (signs folded into the stored value).
  void set(Literal a, Literal b, double cov);
  const std::map<std::pair<int, int>, double>& explicit_entries() const { return entries_; }

 private:
  LabelTable labels_;
  std::map<std::pair<int, int>, double> entries_;
};

/// "<var> <alpha_pos> <alpha_neg> <base_rate> <prior_weight>" lines; also
/// "<var> indicator", "<var> point <p>" and "tie <var> <representative>".
LabelTable parse_labels(std::string_view text, int var_count);
std::string write_labels(const LabelTable& labels);

/// "<lit_i> <lit_j> <cov>" triplets on top of the independent synthesis.
LeafCovariance parse_leaf_covariance(std::string_view text, const LabelTable& labels);

}  // namespace pcbeta
