#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcbeta {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A value violates a documented precondition (bad label, bad opinion, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The evidence has zero probability (additive identity at the evidence root).
class InconsistentEvidence : public Error {
 public:
  InconsistentEvidence() : Error("inconsistent evidence: zero-probability evidence") {}
  using Error::Error;
};

/// Moment-matching division with E[Y] <= E[X].
class NonConditionable : public Error {
 public:
  using Error::Error;
};

/// Circuit-level structural problems (absent query variable, bad evidence, ...).
class CircuitError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcbeta
