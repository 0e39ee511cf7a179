#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

namespace ehrq {

enum class Datatype { text, integer, real };

Datatype datatype_from_string(std::string_view s);
const char* to_string(Datatype dt);

/// Null, lowercased text, signed 64-bit integer, or 64-bit float.
using CellValue = std::variant<std::monostate, std::string, std::int64_t, double>;

inline bool is_null(const CellValue& v) { return std::holds_alternative<std::monostate>(v); }
inline bool is_text(const CellValue& v) { return std::holds_alternative<std::string>(v); }
inline bool is_numeric(const CellValue& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}
double as_double(const CellValue& v);

std::string lowercase(std::string_view s);
std::string trim(std::string_view s);

/// Shortest round-tripping decimal form, always with a '.' or exponent so the
/// lexer reads it back as a float.
std::string format_double(double x);

/// Canonical lexical form: Null -> "", text as-is, numbers in canonical form.
std::string format_cell(const CellValue& v);

/// Canonical query token: text double-quoted, numbers bare.
std::string value_token(const CellValue& v);

/// Trim, then coerce per declared datatype; empty -> Null; text lowercased.
/// Throws Error(type_coercion) when the raw form does not parse.
CellValue coerce_cell(std::string_view raw, Datatype dt);

/// Strict total order used for deterministic sorting (type rank, then value).
/// Not the comparison semantics of query evaluation.
bool cell_less(const CellValue& a, const CellValue& b);

}  // namespace ehrq
