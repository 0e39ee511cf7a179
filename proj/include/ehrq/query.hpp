#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ehrq/value.hpp"

namespace ehrq {

enum class AggFn { count, max, min, avg };
enum class CmpOp { eq, lt, gt, le, ge };
enum class QueryLang { sql, sparql };
enum class Tokenization { fused, split };

const char* to_string(AggFn fn);
const char* to_string(CmpOp op);

/// Lowercase tokens; quoted string literals are single tokens and keep their
/// internal spaces, every other token is whitespace-free.
using TokenStream = std::vector<std::string>;

std::string join_tokens(const TokenStream& tokens);
TokenStream split_line(std::string_view line);

inline constexpr const char* kMaskToken = "<cond_val>";

// --- SQL subset -------------------------------------------------------------

struct ColumnRef {
  std::string table;
  std::string column;
  bool operator==(const ColumnRef&) const = default;
  bool operator<(const ColumnRef& o) const {
    return table != o.table ? table < o.table : column < o.column;
  }
};

struct SelectItem {
  std::optional<AggFn> agg;
  ColumnRef column;
  bool operator==(const SelectItem&) const = default;
};

struct SqlJoin {
  std::string table;
  ColumnRef on_left;
  ColumnRef on_right;
  bool operator==(const SqlJoin&) const = default;
};

struct SqlCondition {
  ColumnRef column;
  CmpOp op = CmpOp::eq;
  CellValue value;
  bool operator==(const SqlCondition&) const = default;
};

struct SqlQuery {
  std::vector<SelectItem> select_items;
  std::string from_table;
  std::vector<SqlJoin> joins;
  std::vector<SqlCondition> conditions;
  bool operator==(const SqlQuery&) const = default;
};

/// Grammar: select <items> from <t> (inner join <t> on <c> = <c>)*
/// (where <cond> (and <cond>)*)? with aggregates count/max/min/avg.
/// Accepts fused (t.c) and split (t . c) column spellings; DISTINCT, OR,
/// LIKE and GROUP BY raise Error(unsupported_feature).
SqlQuery parse_sql(std::string_view text);
TokenStream serialize_sql(const SqlQuery& q, Tokenization mode);

// --- SPARQL subset ----------------------------------------------------------

struct Variable {
  std::string name;  // without the '?'
  bool operator==(const Variable&) const = default;
};

struct EntityRef {
  std::string id;  // "/subject_id/12"
  bool operator==(const EntityRef&) const = default;
};

using PatternTerm = std::variant<Variable, EntityRef, CellValue>;

struct TriplePattern {
  PatternTerm subject;  // variable or entity
  std::string predicate;  // without angle brackets: "/drug"
  PatternTerm object;
  bool operator==(const TriplePattern&) const = default;
};

struct SparqlFilter {
  Variable var;
  CmpOp op = CmpOp::eq;
  PatternTerm value;  // literal or entity
  bool operator==(const SparqlFilter&) const = default;
};

struct SparqlProjection {
  std::optional<AggFn> agg;  // when set, vars holds exactly one variable
  std::vector<Variable> vars;
  bool operator==(const SparqlProjection&) const = default;
};

struct SparqlQuery {
  SparqlProjection projection;
  std::vector<TriplePattern> patterns;
  std::vector<SparqlFilter> filters;
  bool operator==(const SparqlQuery&) const = default;
};

/// Grammar: select (?v+ | ( <agg> ( ?v ) as ?agg )) where { (<s> </rel> <o> .)*
/// (filter ( ?v <op> <val> ))* }. Pattern terminators may be glued to the
/// object ("?x." / "\"f\".") or stand alone; the canonical form keeps them
/// separate (4 tokens per pattern). Projected and filtered variables must
/// appear in a pattern and pattern variables must form a connected graph.
SparqlQuery parse_sparql(std::string_view text);
TokenStream serialize_sparql(const SparqlQuery& q);

/// Replaces every condition value with <cond_val>: in SQL the value token of
/// each WHERE comparison; in SPARQL non-variable pattern subjects/objects and
/// filter right-hand sides. All other tokens pass through unchanged.
TokenStream mask_condition_values(const TokenStream& tokens, QueryLang lang);

}  // namespace ehrq
