#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ehrq/query.hpp"
#include "ehrq/schema.hpp"
#include "ehrq/value.hpp"

namespace ehrq {

struct Table {
  TableSpec spec;
  std::vector<std::vector<CellValue>> rows;  // aligned to spec.columns

  /// Key value of a row: the declared primary-key cell, or the row index for
  /// keyless tables (synthetic row_id).
  CellValue key_value(std::size_t row) const;
  /// Cell by column name; the synthetic row_id resolves to the row index.
  /// Throws Error(unknown_column).
  CellValue cell(std::size_t row, std::string_view column) const;
  bool has_column(std::string_view column) const;
};

struct Database {
  SchemaManifest manifest;
  std::vector<Table> tables;  // manifest order

  const Table* find_table(std::string_view name) const;
  const Table& require_table(std::string_view name) const;
};

/// Loads `<table>.csv` per manifest table from `dir`, coercing cells to the
/// declared datatypes (empty field -> Null) and enforcing key uniqueness and
/// referential integrity.
Database load_database(const SchemaManifest& manifest, const std::filesystem::path& dir);

/// Canonical text dump used by tests and debugging; identical inputs produce
/// identical dumps.
std::string dump_database(const Database& db);

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<CellValue>> rows;  // multiset; every row has columns.size() cells

  bool operator==(const ResultSet&) const = default;
};

std::string result_to_csv(const ResultSet& rs);

/// Bag-semantics evaluation: inner joins multiply matching rows, WHERE is a
/// conjunction, aggregates run over non-Null values (count of nothing is 0,
/// max/min/avg of nothing is a single Null row).
ResultSet execute_sql(const Database& db, const SqlQuery& query);

}  // namespace ehrq
