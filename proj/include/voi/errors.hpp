#pragma once

#include <stdexcept>
#include <string>

namespace voi {

// Error categories; the CLI maps these onto exit codes.
enum class ErrorKind {
  Schema,      // state/block names do not match a model declaration
  Data,        // malformed or inconsistent observations
  Usage,       // API misuse (empty chain, provenance mismatch, ...)
  Config,      // bad run configuration
  Capability,  // model lacks an optional capability (e.g. closed-form conditional)
  Budget,      // computation refused: would exceed the configured budget
  Init,        // sampler could not find an in-support starting state
  Divergence,  // numerical blow-up during optimization
  Design,      // invalid prospective design (overlaps observed cells, ...)
  Degenerate,  // degenerate input (all rows identical, zero variance, ...)
  Io           // file I/O failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace voi
