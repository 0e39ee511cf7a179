#include "ehrq/error.hpp"

namespace ehrq {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "ParseError";
    case ErrorKind::schema: return "SchemaError";
    case ErrorKind::io: return "IoError";
    case ErrorKind::missing_table_file: return "MissingTableFile";
    case ErrorKind::header_mismatch: return "HeaderMismatch";
    case ErrorKind::type_coercion: return "TypeCoercionError";
    case ErrorKind::integrity: return "IntegrityError";
    case ErrorKind::sql_syntax: return "SqlSyntaxError";
    case ErrorKind::sparql_syntax: return "SparqlSyntaxError";
    case ErrorKind::unsupported_feature: return "UnsupportedFeature";
    case ErrorKind::no_path: return "NoPath";
    case ErrorKind::unknown_table: return "UnknownTable";
    case ErrorKind::unknown_column: return "UnknownColumn";
    case ErrorKind::unknown_predicate: return "UnknownPredicate";
    case ErrorKind::unbound_projection_variable: return "UnboundProjectionVariable";
    case ErrorKind::type_mismatch: return "TypeMismatch";
    case ErrorKind::unmapped_column: return "UnmappedColumn";
    case ErrorKind::empty_column: return "EmptyColumn";
    case ErrorKind::file_format: return "FileFormatError";
    case ErrorKind::eval: return "EvalError";
  }
  return "Error";
}

}  // namespace ehrq
