#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ehrq/value.hpp"

namespace ehrq {

enum class ColumnRole { primary_key, foreign_key, property };

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::property;
  std::string references;  // referenced table, foreign_key only
  Datatype datatype = Datatype::text;

  bool operator==(const ColumnSpec&) const = default;
};

// Synthetic key for tables declared without a primary key; such rows are
// keyed by load order.
inline constexpr const char* kSyntheticKey = "row_id";

struct TableSpec {
  std::string name;
  std::vector<ColumnSpec> columns;
  std::optional<std::string> primary_key;

  bool has_declared_key() const { return primary_key.has_value(); }
  const std::string& key_column() const;
  const ColumnSpec* find_column(std::string_view column) const;
  int column_index(std::string_view column) const;  // -1 if absent

  bool operator==(const TableSpec&) const = default;
};

struct SchemaManifest {
  std::vector<TableSpec> tables;

  const TableSpec* find_table(std::string_view table) const;
  const TableSpec& require_table(std::string_view table) const;

  bool operator==(const SchemaManifest&) const = default;
};

/// Validates every manifest invariant (identifier shape, key uniqueness,
/// resolvable foreign keys, acyclic table graph, unambiguous relation
/// labels). Throws Error(schema) naming the offending table/column.
void validate_manifest(const SchemaManifest& manifest);

SchemaManifest manifest_from_json(const nlohmann::json& doc);
nlohmann::json manifest_to_json(const SchemaManifest& manifest);
SchemaManifest load_manifest(const std::filesystem::path& path);

// --- relation graph -------------------------------------------------------

struct SchemaNode {
  bool is_entity = false;
  std::string table;
  std::string column;  // key column for entities, property column for literals
  bool synthetic_key = false;

  bool operator==(const SchemaNode&) const = default;
};

struct SchemaEdge {
  int from = -1;
  int to = -1;
  std::string relation;

  bool operator==(const SchemaEdge&) const = default;
};

struct SchemaGraph {
  SchemaManifest manifest;  // empty for hand-built graphs
  std::vector<SchemaNode> nodes;
  std::vector<SchemaEdge> edges;
  std::vector<std::vector<int>> out;  // node -> edge indices, sorted by (relation, to)

  int entity_node(std::string_view table) const;
  int literal_node(std::string_view table, std::string_view column) const;
  int node_for_column(std::string_view table, std::string_view column) const;
  bool reaches(int from, int to) const;
};

/// Builds adjacency and checks the graph invariants: acyclic, literals are
/// sinks, out-edge relation labels unique per node.
SchemaGraph make_schema_graph(SchemaManifest manifest, std::vector<SchemaNode> nodes,
                              std::vector<SchemaEdge> edges);

/// One entity class per table keyed by its (possibly synthetic) key column,
/// one literal class per property column; property edges labelled by column,
/// parent->child edges labelled by the child table. Node order follows the
/// manifest.
SchemaGraph build_schema_graph(const SchemaManifest& manifest);

struct RelationPath {
  struct Hop {
    std::string relation;
    int to = -1;
    bool operator==(const Hop&) const = default;
  };
  std::vector<Hop> hops;

  bool operator==(const RelationPath&) const = default;
};

/// Minimum-hop directed path, edges traversable parent->child only. Among
/// equal-length paths picks the hop-by-hop lexicographically smallest
/// relation sequence. Throws Error(no_path) when unreachable.
RelationPath shortest_relation_path(const SchemaGraph& graph, int from, int to);

}  // namespace ehrq
