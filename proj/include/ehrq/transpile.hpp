#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehrq/database.hpp"
#include "ehrq/query.hpp"
#include "ehrq/schema.hpp"

namespace ehrq {

/// SQL -> SPARQL over the schema relation graph. The root variable is the
/// topmost involved table's entity class; join hops, then condition columns,
/// then selected columns emit patterns (each schema edge once); equality
/// conditions substitute the value unless the column is projected, all other
/// conditions become filters.
SparqlQuery sql_to_sparql(const SqlQuery& q, const SchemaGraph& g);

struct ColumnMapping {
  std::map<ColumnRef, ColumnRef> entries;
};

ColumnMapping mapping_from_json(const nlohmann::json& doc);
nlohmann::json mapping_to_json(const ColumnMapping& m);
ColumnMapping load_mapping(const std::filesystem::path& path);

/// Rewrites a query over a source schema onto the target schema: columns map
/// through `m`, the FROM/JOIN chain is rebuilt as the union of shortest
/// foreign-key paths from the topmost involved target table.
SqlQuery renormalize_sql(const SqlQuery& q, const ColumnMapping& m, const SchemaGraph& target);

struct QueryTemplate {
  std::string nlq;  // with |slot| markers
  std::string sql;  // canonical sql with |slot| markers
  std::map<std::string, ColumnRef> slots;
};

std::vector<QueryTemplate> templates_from_json(const nlohmann::json& doc);
nlohmann::json templates_to_json(const std::vector<QueryTemplate>& templates);
std::vector<QueryTemplate> load_templates(const std::filesystem::path& path);

struct CorpusPair {
  std::string nlq;
  SqlQuery sql;
  std::string sql_text;  // canonical split serialization
};

/// n pairs; condition values drawn uniformly (seeded mt19937, reproducible)
/// from the distinct non-Null values of each slot's column; templates cycle
/// round-robin.
std::vector<CorpusPair> sample_query_corpus(const std::vector<QueryTemplate>& templates,
                                            const Database& db, std::size_t n,
                                            std::uint64_t seed);

}  // namespace ehrq
