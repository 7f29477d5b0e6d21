#include "pcbeta/label_table.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "pcbeta/errors.hpp"

namespace pcbeta {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + tok + "'");
  }
}

int to_var(const std::string& tok, std::size_t line, int var_count) {
  const double v = to_double(tok, line);
  if (v != std::floor(v) || v < 1 || v > var_count) {
    throw ParseError(line, "variable '" + tok + "' out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

LabelTable::LabelTable(int var_count)
    : labels_(var_count + 1), indicator_(var_count + 1, true), param_(var_count + 1) {
  for (int v = 0; v <= var_count; ++v) param_[v] = v;
}

void LabelTable::check_var(int var) const {
  if (var < 1 || var > var_count()) {
    throw DomainError("variable " + std::to_string(var) + " out of range");
  }
}

void LabelTable::set(int var, const BetaLabel& label) {
  check_var(var);
  labels_[var] = label;
  indicator_[var] = false;
}

void LabelTable::set_indicator(int var) {
  check_var(var);
  labels_[var] = BetaLabel::certain_true();
  indicator_[var] = true;
}

bool LabelTable::is_indicator(int var) const {
  check_var(var);
  return indicator_[var];
}

BetaLabel LabelTable::label(Literal lit) const {
  const int v = var_of(lit);
  check_var(v);
  if (indicator_[v]) return BetaLabel::certain_true();
  return lit > 0 ? labels_[v] : labels_[v].complement();
}

void LabelTable::tie(int var, int representative) {
  check_var(var);
  check_var(representative);
  const int rep = param_[representative];
  if (indicator_[rep] || !(labels_[rep] == labels_[var]) || indicator_[var]) {
    throw DomainError("tied variables must carry identical labels");
  }
  param_[var] = rep;
}

void LabelTable::set_parameter(int representative, const BetaLabel& label) {
  check_var(representative);
  const int rep = param_[representative];
  for (int v = 1; v <= var_count(); ++v) {
    if (param_[v] == rep) set(v, label);
  }
}

LeafCovariance LeafCovariance::independent(const LabelTable& labels) {
  LeafCovariance out;
  out.labels_ = labels;
  return out;
}

double LeafCovariance::operator()(Literal a, Literal b) const {
  const int va = var_of(a);
  const int vb = var_of(b);
  if (labels_.is_indicator(va) || labels_.is_indicator(vb)) return 0.0;
  const double sign = (a > 0) == (b > 0) ? 1.0 : -1.0;
  if (labels_.parameter_of(va) == labels_.parameter_of(vb)) {
    return sign * moments_of(labels_.label(va)).variance;
  }
  auto it = entries_.find({std::min(va, vb), std::max(va, vb)});
  return it == entries_.end() ? 0.0 : sign * it->second;
}

void LeafCovariance::set(Literal a, Literal b, double cov) {
  const int va = var_of(a);
  const int vb = var_of(b);
  if (labels_.parameter_of(va) == labels_.parameter_of(vb)) {
    throw DomainError("covariance within one parameter is fixed by its label");
  }
  const double sign = (a > 0) == (b > 0) ? 1.0 : -1.0;
  entries_[{std::min(va, vb), std::max(va, vb)}] = sign * cov;
}

LabelTable parse_labels(std::string_view text, int var_count) {
  LabelTable table(var_count);
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  std::vector<std::pair<int, int>> ties;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] == "tie") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'tie <var> <representative>'");
      ties.emplace_back(to_var(tok[1], line_no, var_count), to_var(tok[2], line_no, var_count));
      continue;
    }
    const int var = to_var(tok[0], line_no, var_count);
    try {
      if (tok.size() == 2 && tok[1] == "indicator") {
        table.set_indicator(var);
      } else if (tok.size() == 3 && tok[1] == "point") {
        table.set(var, BetaLabel::point_mass(to_double(tok[2], line_no)));
      } else if (tok.size() == 5) {
        table.set(var, BetaLabel::from_alphas(to_double(tok[1], line_no), to_double(tok[2], line_no),
                                              to_double(tok[3], line_no),
                                              to_double(tok[4], line_no)));
      } else {
        throw ParseError(line_no,
                         "expected '<var> <alpha_pos> <alpha_neg> <base_rate> <prior_weight>'");
      }
    } catch (const DomainError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  for (auto [var, rep] : ties) {
    try {
      table.tie(var, rep);
    } catch (const DomainError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return table;
}

std::string write_labels(const LabelTable& labels) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (int v = 1; v <= labels.var_count(); ++v) {
    if (labels.is_indicator(v)) {
      out << v << " indicator\n";
      continue;
    }
    const BetaLabel l = labels.label(v);
    if (l.is_point_mass()) {
      out << v << " point " << l.mean() << '\n';
    } else {
      out << v << ' ' << l.alpha_pos() << ' ' << l.alpha_neg() << ' ' << l.base_rate() << ' '
          << l.prior_weight() << '\n';
    }
  }
  for (int v = 1; v <= labels.var_count(); ++v) {
    if (labels.parameter_of(v) != v) out << "tie " << v << ' ' << labels.parameter_of(v) << '\n';
  }
  return out.str();
}

LeafCovariance parse_leaf_covariance(std::string_view text, const LabelTable& labels) {
  LeafCovariance cov = LeafCovariance::independent(labels);
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok.size() != 3) throw ParseError(line_no, "expected '<lit_i> <lit_j> <cov>'");
    const double a = to_double(tok[0], line_no);
    const double b = to_double(tok[1], line_no);
    const double value = to_double(tok[2], line_no);
    if (a == 0 || b == 0 || std::abs(a) > labels.var_count() || std::abs(b) > labels.var_count()) {
      throw ParseError(line_no, "literal out of range");
    }
    const auto la = static_cast<Literal>(a);
    const auto lb = static_cast<Literal>(b);
    if (labels.parameter_of(var_of(la)) == labels.parameter_of(var_of(lb))) {
      // Diagonal and complement blocks come from the labels; accept consistent restatements.
      const double sign = (la > 0) == (lb > 0) ? 1.0 : -1.0;
      const double forced = sign * moments_of(labels.label(var_of(la))).variance;
      if (std::abs(forced - value) > 1e-9) {
        throw ParseError(line_no, "entry contradicts the label variance");
      }
      continue;
    }
    cov.set(la, lb, value);
  }
  return cov;
}

}  // namespace pcbeta
