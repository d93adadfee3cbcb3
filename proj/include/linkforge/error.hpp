#pragma once
// Error types shared across the toolkit. Each carries a kind that the CLI
// maps onto its exit codes.

#include <stdexcept>
#include <string>
#include <string_view>

namespace linkforge {

enum class ErrorKind {
  config,            // bad or missing configuration
  schema,            // input file lacks a required column
  validation,        // input data violates an invariant
  data,              // unparseable or otherwise unusable data
  insufficient_data, // too few observations for an estimator
  budget,            // pair budget exceeded
  not_found,         // unknown identifier
  conflict,          // operation not allowed in current state
  io,                // filesystem failure
  contract,          // caller violated a precondition
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::config: return "config";
    case ErrorKind::schema: return "schema";
    case ErrorKind::validation: return "validation";
    case ErrorKind::data: return "data";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::budget: return "budget";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::io: return "io";
    case ErrorKind::contract: return "contract";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::contract, what);
}

}  // namespace linkforge
