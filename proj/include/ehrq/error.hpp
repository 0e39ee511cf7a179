#pragma once

#include <stdexcept>
#include <string>

namespace ehrq {

enum class ErrorKind {
  parse,
  schema,
  io,
  missing_table_file,
  header_mismatch,
  type_coercion,
  integrity,
  sql_syntax,
  sparql_syntax,
  unsupported_feature,
  no_path,
  unknown_table,
  unknown_column,
  unknown_predicate,
  unbound_projection_variable,
  type_mismatch,
  unmapped_column,
  empty_column,
  file_format,
  eval,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the whole toolchain; the kind carries the
/// contract-level error name so callers and tests can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace ehrq
