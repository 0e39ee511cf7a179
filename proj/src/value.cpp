#include "ehrq/value.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "ehrq/error.hpp"

namespace ehrq {

Datatype datatype_from_string(std::string_view s) {
  if (s == "text") return Datatype::text;
  if (s == "integer") return Datatype::integer;
  if (s == "float") return Datatype::real;
  fail(ErrorKind::parse, "unknown datatype '" + std::string(s) + "'");
}

const char* to_string(Datatype dt) {
  switch (dt) {
    case Datatype::text: return "text";
    case Datatype::integer: return "integer";
    case Datatype::real: return "float";
  }
  return "?";
}

double as_double(const CellValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  fail(ErrorKind::type_mismatch, "value is not numeric");
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  std::string out(buf, ptr);
  if (out.find('.') == std::string::npos && out.find('e') == std::string::npos &&
      out.find("inf") == std::string::npos && out.find("nan") == std::string::npos) {
    out += ".0";
  }
  return out;
}

std::string format_cell(const CellValue& v) {
  if (is_null(v)) return "";
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return format_double(std::get<double>(v));
}

std::string value_token(const CellValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return "\"" + *s + "\"";
  return format_cell(v);
}

CellValue coerce_cell(std::string_view raw, Datatype dt) {
  std::string t = trim(raw);
  if (t.empty()) return CellValue{};
  switch (dt) {
    case Datatype::text:
      return lowercase(t);
    case Datatype::integer: {
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
      if (ec != std::errc() || ptr != t.data() + t.size())
        fail(ErrorKind::type_coercion, "'" + t + "' is not an integer");
      return value;
    }
    case Datatype::real: {
      double value = 0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
      if (ec != std::errc() || ptr != t.data() + t.size())
        fail(ErrorKind::type_coercion, "'" + t + "' is not a float");
      return value;
    }
  }
  fail(ErrorKind::type_coercion, "bad datatype");
}

bool cell_less(const CellValue& a, const CellValue& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  return a < b;
}

}  // namespace ehrq
