#include "pcbeta/learn.hpp"

#include <sstream>

#include "pcbeta/errors.hpp"
#include "pcbeta/rng.hpp"

namespace pcbeta {

Counts count(const Dataset& d) {
  Counts c;
  c.positive.assign(d.var_count + 1, 0);
  c.negative.assign(d.var_count + 1, 0);
  for (const auto& row : d.rows) {
    for (int v = 1; v <= d.var_count; ++v) {
      if (row[v - 1]) {
        ++c.positive[v];
      } else {
        ++c.negative[v];
      }
    }
  }
  return c;
}

BetaLabel posterior(std::int64_t positive, std::int64_t negative, double base_rate,
                    double prior_weight) {
  return BetaLabel::from_alphas(static_cast<double>(positive) + prior_weight * base_rate,
                                static_cast<double>(negative) + prior_weight * (1.0 - base_rate),
                                base_rate, prior_weight);
}

FitResult fit_complete(const Dataset& d, double base_rate, double prior_weight) {
  const Counts c = count(d);
  LabelTable labels(d.var_count);
  for (int v = 1; v <= d.var_count; ++v) {
    labels.set(v, posterior(c.positive[v], c.negative[v], base_rate, prior_weight));
  }
  return {labels, LeafCovariance::independent(labels)};
}

Dataset sample_observations(const std::vector<double>& probs, std::size_t n_ins,
                            std::uint64_t seed) {
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("ground-truth probability outside [0,1]");
  }
  Rng rng(seed);
  Dataset d;
  d.var_count = static_cast<int>(probs.size());
  d.rows.resize(n_ins);
  for (auto& row : d.rows) {
    row.resize(probs.size());
    for (std::size_t v = 0; v < probs.size(); ++v) row[v] = rng.bernoulli(probs[v]) ? 1 : 0;
  }
  return d;
}

Dataset parse_dataset(std::string_view text) {
  std::istringstream in{std::string(text)};
  Dataset d;
  std::size_t line_no = 0;
  bool header = false;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first[0] == '#') continue;
    if (!header) {
      int n = -1;
      if (first != "vars" || !(ls >> n) || n < 0) {
        throw ParseError(line_no, "expected header 'vars <n>'");
      }
      d.var_count = n;
      header = true;
      continue;
    }
    std::vector<std::uint8_t> row;
    std::istringstream rs(line);
    for (std::string tok; rs >> tok;) {
      if (tok != "0" && tok != "1") throw ParseError(line_no, "row values must be 0 or 1");
      row.push_back(tok == "1" ? 1 : 0);
    }
    if (static_cast<int>(row.size()) != d.var_count) {
      throw ParseError(line_no, "incomplete row: expected " + std::to_string(d.var_count) +
                                    " values, got " + std::to_string(row.size()));
    }
    d.rows.push_back(std::move(row));
  }
  if (!header) throw ParseError(line_no, "missing 'vars' header");
  return d;
}

std::string write_dataset(const Dataset& d) {
  std::ostringstream out;
  out << "vars " << d.var_count << '\n';
  for (const auto& row : d.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << int(row[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace pcbeta
