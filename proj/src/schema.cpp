#include "ehrq/schema.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ehrq/error.hpp"

namespace ehrq {

namespace {

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (std::isupper(static_cast<unsigned char>(c))) return false;
    if (std::isspace(static_cast<unsigned char>(c))) return false;
    if (c == '.' || c == '"' || c == '/') return false;
  }
  return true;
}

ColumnRole role_from_string(std::string_view s) {
  if (s == "primary_key") return ColumnRole::primary_key;
  if (s == "foreign_key") return ColumnRole::foreign_key;
  if (s == "property") return ColumnRole::property;
  fail(ErrorKind::parse, "unknown column role '" + std::string(s) + "'");
}

const char* role_to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::primary_key: return "primary_key";
    case ColumnRole::foreign_key: return "foreign_key";
    case ColumnRole::property: return "property";
  }
  return "?";
}

}  // namespace

const std::string& TableSpec::key_column() const {
  if (primary_key) return *primary_key;
  static const std::string synthetic = kSyntheticKey;
  return synthetic;
}

const ColumnSpec* TableSpec::find_column(std::string_view column) const {
  for (const auto& c : columns)
    if (c.name == column) return &c;
  return nullptr;
}

int TableSpec::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == column) return static_cast<int>(i);
  return -1;
}

const TableSpec* SchemaManifest::find_table(std::string_view table) const {
  for (const auto& t : tables)
    if (t.name == table) return &t;
  return nullptr;
}

const TableSpec& SchemaManifest::require_table(std::string_view table) const {
  const TableSpec* t = find_table(table);
  if (!t) fail(ErrorKind::unknown_table, "table '" + std::string(table) + "' not in manifest");
  return *t;
}

void validate_manifest(const SchemaManifest& manifest) {
  std::set<std::string> table_names;
  for (const auto& t : manifest.tables) {
    if (!valid_identifier(t.name))
      fail(ErrorKind::schema, "invalid table name '" + t.name + "'");
    if (!table_names.insert(t.name).second)
      fail(ErrorKind::schema, "duplicate table '" + t.name + "'");
  }

  std::set<std::string> declared_keys;  // key column names must be unique
                                        // across tables: they namespace entity ids
  for (const auto& t : manifest.tables) {
    std::set<std::string> column_names;
    const ColumnSpec* pk = nullptr;
    for (const auto& c : t.columns) {
      if (!valid_identifier(c.name))
        fail(ErrorKind::schema, "invalid column name '" + c.name + "' in table '" + t.name + "'");
      if (!column_names.insert(c.name).second)
        fail(ErrorKind::schema, "duplicate column '" + c.name + "' in table '" + t.name + "'");
      if (c.role == ColumnRole::primary_key) {
        if (pk)
          fail(ErrorKind::schema, "table '" + t.name + "' declares more than one primary key");
        pk = &c;
      }
      if (c.role == ColumnRole::foreign_key) {
        const TableSpec* parent = manifest.find_table(c.references);
        if (!parent)
          fail(ErrorKind::schema, "table '" + t.name + "' column '" + c.name +
                                      "' references unknown table '" + c.references + "'");
        if (!parent->has_declared_key())
          fail(ErrorKind::schema, "table '" + t.name + "' references '" + c.references +
                                      "' which has no primary key");
        const ColumnSpec* parent_pk = parent->find_column(parent->key_column());
        if (parent_pk && parent_pk->datatype != c.datatype)
          fail(ErrorKind::schema, "foreign key '" + t.name + "." + c.name +
                                      "' datatype differs from '" + c.references + "' key");
      }
    }
    if (t.primary_key) {
      if (!pk || pk->name != *t.primary_key)
        fail(ErrorKind::schema, "table '" + t.name + "' primary_key field names '" +
                                    *t.primary_key + "' but no such primary-key column exists");
      if (!declared_keys.insert(*t.primary_key).second)
        fail(ErrorKind::schema, "primary key column name '" + *t.primary_key +
                                    "' is declared by more than one table");
    } else {
      if (pk)
        fail(ErrorKind::schema, "table '" + t.name + "' has a primary-key column '" + pk->name +
                                    "' but no primary_key field");
      if (t.find_column(kSyntheticKey))
        fail(ErrorKind::schema, "keyless table '" + t.name + "' may not declare a column named '" +
                                    std::string(kSyntheticKey) + "'");
    }
  }

  // Relation labels must be unambiguous per parent: a property column of a
  // parent may not share its name with a child table of that parent, and two
  // foreign keys from the same child to the same parent are rejected.
  std::map<std::string, std::set<std::string>> children;  // parent -> child tables
  for (const auto& t : manifest.tables) {
    for (const auto& c : t.columns) {
      if (c.role != ColumnRole::foreign_key) continue;
      if (!children[c.references].insert(t.name).second)
        fail(ErrorKind::schema, "table '" + t.name + "' links to '" + c.references +
                                    "' through more than one foreign key");
    }
  }
  for (const auto& t : manifest.tables) {
    auto it = children.find(t.name);
    if (it == children.end()) continue;
    for (const auto& c : t.columns)
      if (c.role == ColumnRole::property && it->second.count(c.name))
        fail(ErrorKind::schema, "relation label '" + c.name + "' of table '" + t.name +
                                    "' is both a property column and a child table");
  }

  // Acyclicity of the parent->child table graph.
  std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
  auto dfs = [&](auto&& self, const std::string& table) -> void {
    state[table] = 1;
    auto it = children.find(table);
    if (it != children.end()) {
      for (const auto& child : it->second) {
        int s = state[child];
        if (s == 1) fail(ErrorKind::schema, "table graph cycle through '" + child + "'");
        if (s == 0) self(self, child);
      }
    }
    state[table] = 2;
  };
  for (const auto& t : manifest.tables)
    if (state[t.name] == 0) dfs(dfs, t.name);
}

SchemaManifest manifest_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("tables") || !doc["tables"].is_array())
    fail(ErrorKind::parse, "manifest must be an object with a 'tables' array");
  SchemaManifest manifest;
  for (const auto& jt : doc["tables"]) {
    if (!jt.is_object() || !jt.contains("name"))
      fail(ErrorKind::parse, "manifest table entry missing 'name'");
    TableSpec table;
    table.name = lowercase(jt["name"].get<std::string>());
    if (jt.contains("primary_key") && !jt["primary_key"].is_null())
      table.primary_key = lowercase(jt["primary_key"].get<std::string>());
    if (!jt.contains("columns") || !jt["columns"].is_array())
      fail(ErrorKind::parse, "table '" + table.name + "' missing 'columns' array");
    for (const auto& jc : jt["columns"]) {
      ColumnSpec col;
      col.name = lowercase(jc.at("name").get<std::string>());
      col.role = role_from_string(jc.at("role").get<std::string>());
      if (col.role == ColumnRole::foreign_key) {
        if (!jc.contains("references") || jc["references"].is_null())
          fail(ErrorKind::parse, "foreign key '" + table.name + "." + col.name +
                                     "' missing 'references'");
        col.references = lowercase(jc["references"].get<std::string>());
      }
      col.datatype = datatype_from_string(jc.at("datatype").get<std::string>());
      table.columns.push_back(std::move(col));
    }
    manifest.tables.push_back(std::move(table));
  }
  validate_manifest(manifest);
  return manifest;
}

nlohmann::json manifest_to_json(const SchemaManifest& manifest) {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : manifest.tables) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : t.columns) {
      cols.push_back({{"name", c.name},
                      {"role", role_to_string(c.role)},
                      {"references", c.role == ColumnRole::foreign_key
                                         ? nlohmann::json(c.references)
                                         : nlohmann::json()},
                      {"datatype", to_string(c.datatype)}});
    }
    tables.push_back({{"name", t.name},
                      {"primary_key", t.primary_key ? nlohmann::json(*t.primary_key)
                                                    : nlohmann::json()},
                      {"columns", std::move(cols)}});
  }
  return nlohmann::json{{"tables", std::move(tables)}};
}

SchemaManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open manifest '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, "manifest '" + path.string() + "': " + e.what());
  }
  return manifest_from_json(doc);
}

// --- relation graph -------------------------------------------------------

int SchemaGraph::entity_node(std::string_view table) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].is_entity && nodes[i].table == table) return static_cast<int>(i);
  return -1;
}

int SchemaGraph::literal_node(std::string_view table, std::string_view column) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!nodes[i].is_entity && nodes[i].table == table && nodes[i].column == column)
      return static_cast<int>(i);
  return -1;
}

int SchemaGraph::node_for_column(std::string_view table, std::string_view column) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].table == table && nodes[i].column == column) return static_cast<int>(i);
  return -1;
}

bool SchemaGraph::reaches(int from, int to) const {
  if (from == to) return true;
  std::deque<int> queue{from};
  std::vector<char> seen(nodes.size(), 0);
  seen[from] = 1;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (int e : out[cur]) {
      int next = edges[e].to;
      if (next == to) return true;
      if (!seen[next]) {
        seen[next] = 1;
        queue.push_back(next);
      }
    }
  }
  return false;
}

SchemaGraph make_schema_graph(SchemaManifest manifest, std::vector<SchemaNode> nodes,
                              std::vector<SchemaEdge> edges) {
  SchemaGraph g;
  g.manifest = std::move(manifest);
  g.nodes = std::move(nodes);
  g.edges = std::move(edges);
  g.out.assign(g.nodes.size(), {});
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    if (e.from < 0 || e.to < 0 || e.from >= static_cast<int>(g.nodes.size()) ||
        e.to >= static_cast<int>(g.nodes.size()))
      fail(ErrorKind::schema, "edge endpoint out of range");
    if (!g.nodes[e.from].is_entity)
      fail(ErrorKind::schema, "literal node has an outgoing edge");
    g.out[e.from].push_back(static_cast<int>(i));
  }
  for (auto& adjacency : g.out) {
    std::sort(adjacency.begin(), adjacency.end(), [&](int a, int b) {
      if (g.edges[a].relation != g.edges[b].relation)
        return g.edges[a].relation < g.edges[b].relation;
      return g.edges[a].to < g.edges[b].to;
    });
    for (std::size_t i = 1; i < adjacency.size(); ++i)
      if (g.edges[adjacency[i - 1]].relation == g.edges[adjacency[i]].relation)
        fail(ErrorKind::schema, "relation label '" + g.edges[adjacency[i]].relation +
                                    "' is ambiguous from one node");
  }
  // Cycle check over entity edges (literals are sinks by the check above).
  std::vector<int> state(g.nodes.size(), 0);
  auto dfs = [&](auto&& self, int v) -> void {
    state[v] = 1;
    for (int e : g.out[v]) {
      int next = g.edges[e].to;
      if (state[next] == 1) fail(ErrorKind::schema, "relation graph contains a cycle");
      if (state[next] == 0) self(self, next);
    }
    state[v] = 2;
  };
  for (std::size_t v = 0; v < g.nodes.size(); ++v)
    if (state[v] == 0) dfs(dfs, static_cast<int>(v));
  return g;
}

SchemaGraph build_schema_graph(const SchemaManifest& manifest) {
  validate_manifest(manifest);
  std::vector<SchemaNode> nodes;
  std::vector<SchemaEdge> edges;
  auto entity_index = [&](std::string_view table) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].is_entity && nodes[i].table == table) return static_cast<int>(i);
    return -1;
  };

  for (const auto& t : manifest.tables) {
    nodes.push_back({true, t.name, t.key_column(), !t.has_declared_key()});
    for (const auto& c : t.columns)
      if (c.role == ColumnRole::property) nodes.push_back({false, t.name, c.name, false});
  }
  for (const auto& t : manifest.tables) {
    const int child_entity = entity_index(t.name);
    for (const auto& c : t.columns) {
      if (c.role == ColumnRole::property) {
        int lit = -1;
        for (std::size_t i = 0; i < nodes.size(); ++i)
          if (!nodes[i].is_entity && nodes[i].table == t.name && nodes[i].column == c.name)
            lit = static_cast<int>(i);
        edges.push_back({child_entity, lit, c.name});
      } else if (c.role == ColumnRole::foreign_key) {
        const int parent_entity = entity_index(c.references);
        if (parent_entity < 0)
          fail(ErrorKind::schema, "table '" + t.name + "' references missing '" + c.references + "'");
        edges.push_back({parent_entity, child_entity, t.name});
      }
    }
  }
  return make_schema_graph(manifest, std::move(nodes), std::move(edges));
}

RelationPath shortest_relation_path(const SchemaGraph& graph, int from, int to) {
  const int n = static_cast<int>(graph.nodes.size());
  if (from < 0 || to < 0 || from >= n || to >= n)
    fail(ErrorKind::no_path, "node not in graph");
  if (from == to) return {};

  // Unit weights: reverse BFS from the target, then walk forward greedily
  // taking the smallest relation label that stays on a shortest path.
  std::vector<std::vector<int>> in(n);
  for (std::size_t i = 0; i < graph.edges.size(); ++i)
    in[graph.edges[i].to].push_back(static_cast<int>(i));
  std::vector<int> dist(n, -1);
  dist[to] = 0;
  std::deque<int> queue{to};
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (int e : in[cur]) {
      int prev = graph.edges[e].from;
      if (dist[prev] < 0) {
        dist[prev] = dist[cur] + 1;
        queue.push_back(prev);
      }
    }
  }
  if (dist[from] < 0)
    fail(ErrorKind::no_path, "no path from " + graph.nodes[from].table + " to " +
                                 graph.nodes[to].table +
                                 (graph.nodes[to].is_entity ? "" : "." + graph.nodes[to].column));

  RelationPath path;
  int cur = from;
  while (cur != to) {
    for (int e : graph.out[cur]) {  // adjacency is sorted by relation label
      int next = graph.edges[e].to;
      if (dist[next] == dist[cur] - 1) {
        path.hops.push_back({graph.edges[e].relation, next});
        cur = next;
        break;
      }
    }
  }
  return path;
}

}  // namespace ehrq
