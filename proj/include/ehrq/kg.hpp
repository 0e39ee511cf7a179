#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ehrq/database.hpp"
#include "ehrq/query.hpp"
#include "ehrq/schema.hpp"

namespace ehrq {

/// "/subject_id/12" for declared keys; keyless tables are namespaced by the
/// table name ("/prescriptions/3") so synthetic row ids cannot collide.
using EntityId = std::string;

EntityId entity_id(const TableSpec& table, const CellValue& key);

using TripleObject = std::variant<EntityRef, CellValue>;

struct Triple {
  EntityId subject;
  std::string predicate;  // "/drug" or "/admissions"
  TripleObject object;

  bool operator==(const Triple&) const = default;
  bool operator<(const Triple& o) const;
};

struct KnowledgeGraph {
  std::vector<Triple> triples;  // sorted, deduplicated
  std::set<std::string> vocabulary;  // every schema predicate, matched or not
  // subject -> predicate -> objects, plus a per-predicate index for patterns
  // with an unbound subject.
  std::map<EntityId, std::map<std::string, std::vector<const Triple*>>> by_subject;
  std::map<std::string, std::vector<const Triple*>> by_predicate;
  std::set<EntityId> entities;

  bool has_entity(const EntityId& id) const { return entities.count(id) > 0; }
};

/// One entity per row (from its key column), one literal triple per non-Null
/// property cell, one parent-entity -> /<child_table> -> row-entity triple
/// per non-Null foreign-key cell.
KnowledgeGraph build_kg(const Database& db);

/// Tab-separated subject/predicate/object, one triple per line, literal
/// objects double-quoted, sorted.
std::string dump_triples(const KnowledgeGraph& kg);

struct KgMetrics {
  std::size_t triple_count = 0;
  int max_depth = 0;  // edges on the longest root-to-leaf path, literal hops included

  bool operator==(const KgMetrics&) const = default;
};

KgMetrics kg_metrics(const KnowledgeGraph& kg);

/// Basic-graph-pattern matching with bag semantics over distinct complete
/// bindings; FILTER restricts bindings, aggregates mirror execute_sql.
ResultSet execute_sparql(const KnowledgeGraph& kg, const SparqlQuery& query);

}  // namespace ehrq
