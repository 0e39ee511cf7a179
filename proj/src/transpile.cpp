#include "ehrq/transpile.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "ehrq/error.hpp"
#include "ehrq/kg.hpp"

namespace ehrq {

namespace {

// Deterministic variable names from node labels, deduplicated with numeric
// suffixes; "agg" is reserved for the aggregate output.
class VariableNames {
 public:
  VariableNames() { used_.insert("agg"); }

  std::string assign(int node, const std::string& base) {
    auto it = by_node_.find(node);
    if (it != by_node_.end()) return it->second;
    std::string name = base;
    for (int suffix = 2; used_.count(name); ++suffix)
      name = base + std::to_string(suffix);
    used_.insert(name);
    by_node_.emplace(node, name);
    return name;
  }

  const std::string& of(int node) const { return by_node_.at(node); }
  bool has(int node) const { return by_node_.count(node) > 0; }

 private:
  std::map<int, std::string> by_node_;
  std::set<std::string> used_;
};

struct InvolvedTables {
  std::vector<std::string> order;  // from_table, then join order
  std::string root;
};

InvolvedTables find_root(const SqlQuery& q, const SchemaGraph& g) {
  InvolvedTables inv;
  inv.order.push_back(q.from_table);
  for (const auto& j : q.joins) inv.order.push_back(j.table);
  for (const auto& t : inv.order)
    if (g.entity_node(t) < 0) fail(ErrorKind::unknown_table, t);

  for (const auto& candidate : inv.order) {
    bool reaches_all = true;
    for (const auto& other : inv.order)
      if (!g.reaches(g.entity_node(candidate), g.entity_node(other))) {
        reaches_all = false;
        break;
      }
    if (reaches_all) {
      inv.root = candidate;
      return inv;
    }
  }
  fail(ErrorKind::no_path, "the tables of the query share no common root in the schema graph");
}

}  // namespace

SparqlQuery sql_to_sparql(const SqlQuery& q, const SchemaGraph& g) {
  const SchemaManifest& manifest = g.manifest;
  InvolvedTables inv = find_root(q, g);

  VariableNames names;
  const int root_node = g.entity_node(inv.root);
  names.assign(root_node, g.nodes[root_node].column);

  SparqlQuery out;
  std::set<std::pair<int, int>> emitted;  // (from node, to node) edges already present
  std::map<std::string, EntityRef> substitutions;  // variable -> entity value

  // Join hops, in join order. Each join contributes its schema edge exactly
  // once; either side of the ON clause may be the parent.
  for (const auto& join : q.joins) {
    ColumnRef a = join.on_left, b = join.on_right;
    if (a.table == join.table) std::swap(a, b);  // a: earlier table, b: joined table
    const TableSpec& earlier = manifest.require_table(a.table);
    const TableSpec& joined = manifest.require_table(b.table);
    int parent_node = -1, child_node = -1;
    std::string relation;
    const ColumnSpec* fk = joined.find_column(b.column);
    if (fk && fk->role == ColumnRole::foreign_key && fk->references == earlier.name &&
        a.column == earlier.key_column()) {
      parent_node = g.entity_node(earlier.name);
      child_node = g.entity_node(joined.name);
      relation = joined.name;
    } else {
      const ColumnSpec* rfk = earlier.find_column(a.column);
      if (rfk && rfk->role == ColumnRole::foreign_key && rfk->references == joined.name &&
          b.column == joined.key_column()) {
        parent_node = g.entity_node(joined.name);
        child_node = g.entity_node(earlier.name);
        relation = earlier.name;
      } else {
        fail(ErrorKind::no_path, "join between " + a.table + " and " + b.table +
                                     " does not follow a schema foreign key");
      }
    }
    names.assign(parent_node, g.nodes[parent_node].column);
    names.assign(child_node, g.nodes[child_node].column);
    if (emitted.insert({parent_node, child_node}).second)
      out.patterns.push_back({Variable{names.of(parent_node)}, "/" + relation,
                              Variable{names.of(child_node)}});
  }

  auto is_projected = [&](const ColumnRef& column) {
    for (const auto& item : q.select_items)
      if (item.column == column) return true;
    return false;
  };

  auto literal_pattern_for = [&](const ColumnRef& column) -> Variable {
    // Ensure the variable-object pattern for a property column, emitting it
    // on first use.
    const int entity = g.entity_node(column.table);
    const int node = g.literal_node(column.table, column.column);
    if (node < 0) {
      const ColumnSpec* col = manifest.require_table(column.table).find_column(column.column);
      if (col && col->role == ColumnRole::foreign_key)
        fail(ErrorKind::unsupported_feature,
             "foreign-key column " + column.table + "." + column.column +
                 " has no graph node; use the parent key");
      fail(ErrorKind::unknown_column, column.table + "." + column.column);
    }
    Variable var{names.assign(node, column.column)};
    if (emitted.insert({entity, node}).second)
      out.patterns.push_back({Variable{names.of(entity)}, "/" + column.column, var});
    return var;
  };

  // Conditions, in query order.
  for (const auto& cond : q.conditions) {
    const TableSpec& table = manifest.require_table(cond.column.table);
    const int entity_node_id = g.entity_node(cond.column.table);
    if (cond.column.column == table.key_column()) {
      // Condition on an entity class.
      if (cond.op != CmpOp::eq)
        fail(ErrorKind::unsupported_feature,
             "only equality conditions are supported on key columns");
      EntityRef ref{entity_id(table, cond.value)};
      if (is_projected(cond.column)) {
        out.filters.push_back({Variable{names.of(entity_node_id)}, CmpOp::eq, ref});
      } else {
        auto [it, inserted] = substitutions.emplace(names.of(entity_node_id), ref);
        if (!inserted && !(it->second == ref))
          fail(ErrorKind::unsupported_feature,
               "conflicting equality conditions on key column " + cond.column.table + "." +
                   cond.column.column);
      }
      continue;
    }
    const ColumnSpec* col = table.find_column(cond.column.column);
    if (!col || col->role != ColumnRole::property) {
      if (col && col->role == ColumnRole::foreign_key)
        fail(ErrorKind::unsupported_feature,
             "conditions on foreign-key columns are not supported; use the parent key");
      fail(ErrorKind::unknown_column, cond.column.table + "." + cond.column.column);
    }
    if (cond.op == CmpOp::eq && !is_projected(cond.column)) {
      // Equality: replace the variable with the value in its pattern. The
      // edge stays unmarked so a later filter or projection on the same
      // column still gets its variable-object pattern.
      out.patterns.push_back({Variable{names.of(entity_node_id)}, "/" + cond.column.column,
                              cond.value});
    } else {
      Variable var = literal_pattern_for(cond.column);
      out.filters.push_back({var, cond.op, cond.value});
    }
  }

  // Selected columns, in select order.
  for (const auto& item : q.select_items) {
    const TableSpec& table = manifest.require_table(item.column.table);
    Variable var{""};
    if (item.column.column == table.key_column()) {
      var = Variable{names.of(g.entity_node(item.column.table))};
    } else {
      var = literal_pattern_for(item.column);
    }
    if (item.agg)
      out.projection.agg = *item.agg;
    out.projection.vars.push_back(var);
  }
  if (out.projection.agg && out.projection.vars.size() != 1)
    fail(ErrorKind::unsupported_feature, "aggregates must be the only selected item");

  // Apply key-equality substitutions everywhere the variable occurs.
  auto substitute = [&](PatternTerm& term) {
    if (const auto* v = std::get_if<Variable>(&term)) {
      auto it = substitutions.find(v->name);
      if (it != substitutions.end()) term = it->second;
    }
  };
  for (auto& p : out.patterns) {
    substitute(p.subject);
    substitute(p.object);
  }
  for (auto& f : out.filters)
    if (substitutions.count(f.var.name))
      fail(ErrorKind::unsupported_feature, "filtered variable was substituted away");
  for (const auto& v : out.projection.vars)
    if (substitutions.count(v.name))
      fail(ErrorKind::unsupported_feature, "projected variable was substituted away");

  // Every projected variable must be bound by some pattern.
  std::set<std::string> bound;
  for (const auto& p : out.patterns) {
    if (const auto* v = std::get_if<Variable>(&p.subject)) bound.insert(v->name);
    if (const auto* v = std::get_if<Variable>(&p.object)) bound.insert(v->name);
  }
  for (const auto& v : out.projection.vars)
    if (!bound.count(v.name))
      fail(ErrorKind::unsupported_feature,
           "no pattern binds ?" + v.name + "; the query cannot be expressed as a graph pattern");
  return out;
}

ColumnMapping mapping_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_object())
    fail(ErrorKind::parse, "mapping must be an object with a 'columns' object");
  ColumnMapping m;
  auto parse_ref = [](const std::string& s) {
    auto dot = s.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == s.size())
      fail(ErrorKind::parse, "bad column reference '" + s + "'");
    return ColumnRef{lowercase(s.substr(0, dot)), lowercase(s.substr(dot + 1))};
  };
  for (const auto& [key, value] : doc["columns"].items())
    m.entries[parse_ref(key)] = parse_ref(value.get<std::string>());
  return m;
}

nlohmann::json mapping_to_json(const ColumnMapping& m) {
  nlohmann::json columns = nlohmann::json::object();
  for (const auto& [from, to] : m.entries)
    columns[from.table + "." + from.column] = to.table + "." + to.column;
  return nlohmann::json{{"columns", columns}};
}

ColumnMapping load_mapping(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open mapping '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, "mapping '" + path.string() + "': " + e.what());
  }
  return mapping_from_json(doc);
}

SqlQuery renormalize_sql(const SqlQuery& q, const ColumnMapping& m, const SchemaGraph& target) {
  const SchemaManifest& manifest = target.manifest;
  auto map_ref = [&](const ColumnRef& ref) {
    auto it = m.entries.find(ref);
    if (it == m.entries.end())
      fail(ErrorKind::unmapped_column, ref.table + "." + ref.column);
    const TableSpec& t = manifest.require_table(it->second.table);
    if (it->second.column != t.key_column() && !t.find_column(it->second.column))
      fail(ErrorKind::unmapped_column, "target column '" + it->second.table + "." +
                                           it->second.column + "' does not exist");
    return it->second;
  };

  SqlQuery out;
  for (const auto& item : q.select_items)
    out.select_items.push_back({item.agg, map_ref(item.column)});
  for (const auto& cond : q.conditions)
    out.conditions.push_back({map_ref(cond.column), cond.op, cond.value});

  // Involved target tables in first-reference order: selects, conditions,
  // then the source join equalities.
  std::vector<std::string> involved;
  auto involve = [&](const std::string& table) {
    if (std::find(involved.begin(), involved.end(), table) == involved.end())
      involved.push_back(table);
  };
  for (const auto& item : out.select_items) involve(item.column.table);
  for (const auto& cond : out.conditions) involve(cond.column.table);
  for (const auto& join : q.joins) {
    involve(map_ref(join.on_left).table);
    involve(map_ref(join.on_right).table);
  }
  if (q.joins.empty() && involved.empty()) fail(ErrorKind::unmapped_column, "query has no columns");

  // Topmost involved table: reaches every other involved table.
  std::string root;
  for (const auto& candidate : involved) {
    bool reaches_all = true;
    for (const auto& other : involved)
      if (!target.reaches(target.entity_node(candidate), target.entity_node(other))) {
        reaches_all = false;
        break;
      }
    if (reaches_all) {
      root = candidate;
      break;
    }
  }
  if (root.empty())
    fail(ErrorKind::no_path, "mapped tables share no common root in the target schema");

  out.from_table = root;
  std::set<std::string> in_chain{root};
  for (const auto& table : involved) {
    if (table == root) continue;
    RelationPath path = shortest_relation_path(target, target.entity_node(root),
                                               target.entity_node(table));
    std::string parent = root;
    for (const auto& hop : path.hops) {
      const std::string& child = target.nodes[hop.to].table;
      if (in_chain.insert(child).second) {
        const TableSpec& parent_spec = manifest.require_table(parent);
        const TableSpec& child_spec = manifest.require_table(child);
        const ColumnSpec* fk = nullptr;
        for (const auto& c : child_spec.columns)
          if (c.role == ColumnRole::foreign_key && c.references == parent) fk = &c;
        if (!fk) fail(ErrorKind::no_path, "no foreign key from " + child + " to " + parent);
        out.joins.push_back({child,
                             ColumnRef{parent, parent_spec.key_column()},
                             ColumnRef{child, fk->name}});
      }
      parent = child;
    }
  }
  return out;
}

std::vector<QueryTemplate> templates_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) fail(ErrorKind::parse, "templates file must be a JSON array");
  std::vector<QueryTemplate> out;
  for (const auto& jt : doc) {
    QueryTemplate t;
    t.nlq = jt.at("nlq").get<std::string>();
    t.sql = jt.at("sql").get<std::string>();
    for (const auto& [slot, column] : jt.at("slots").items()) {
      const std::string ref = column.get<std::string>();
      auto dot = ref.find('.');
      if (dot == std::string::npos)
        fail(ErrorKind::parse, "slot '" + slot + "' column must be table.column");
      t.slots[slot] = ColumnRef{lowercase(ref.substr(0, dot)), lowercase(ref.substr(dot + 1))};
    }
    for (const auto& [slot, column] : t.slots) {
      (void)column;
      const std::string marker = "|" + slot + "|";
      if (t.sql.find(marker) == std::string::npos)
        fail(ErrorKind::parse, "slot '" + slot + "' missing from sql template");
      if (t.nlq.find(marker) == std::string::npos)
        fail(ErrorKind::parse, "slot '" + slot + "' missing from nlq template");
    }
    out.push_back(std::move(t));
  }
  return out;
}

nlohmann::json templates_to_json(const std::vector<QueryTemplate>& templates) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : templates) {
    nlohmann::json slots = nlohmann::json::object();
    for (const auto& [slot, column] : t.slots)
      slots[slot] = column.table + "." + column.column;
    out.push_back({{"nlq", t.nlq}, {"sql", t.sql}, {"slots", slots}});
  }
  return out;
}

std::vector<QueryTemplate> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open templates '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, "templates '" + path.string() + "': " + e.what());
  }
  return templates_from_json(doc);
}

namespace {

std::string replace_all(std::string text, const std::string& marker, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(marker, pos)) != std::string::npos) {
    text.replace(pos, marker.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

std::vector<CorpusPair> sample_query_corpus(const std::vector<QueryTemplate>& templates,
                                            const Database& db, std::size_t n,
                                            std::uint64_t seed) {
  if (templates.empty()) fail(ErrorKind::parse, "no templates");

  // Distinct non-Null values per slot column, sorted for determinism.
  std::map<ColumnRef, std::vector<CellValue>> pools;
  for (const auto& t : templates) {
    for (const auto& [slot, column] : t.slots) {
      (void)slot;
      if (pools.count(column)) continue;
      const Table& table = db.require_table(column.table);
      if (!table.has_column(column.column))
        fail(ErrorKind::unknown_column, column.table + "." + column.column);
      std::vector<CellValue> values;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        CellValue v = table.cell(r, column.column);
        if (!is_null(v)) values.push_back(std::move(v));
      }
      std::sort(values.begin(), values.end(), cell_less);
      values.erase(std::unique(values.begin(), values.end()), values.end());
      if (values.empty())
        fail(ErrorKind::empty_column, column.table + "." + column.column + " has no values");
      pools[column] = std::move(values);
    }
  }

  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t bound) { return static_cast<std::size_t>(rng() % bound); };

  std::vector<CorpusPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const QueryTemplate& t = templates[i % templates.size()];
    std::string sql_text = t.sql;
    std::string nlq = t.nlq;
    for (const auto& [slot, column] : t.slots) {  // slot order: map = sorted by name
      const auto& pool = pools[column];
      const CellValue& value = pool[pick(pool.size())];
      sql_text = replace_all(sql_text, "|" + slot + "|", value_token(value));
      nlq = replace_all(nlq, "|" + slot + "|", format_cell(value));
    }
    CorpusPair pair;
    pair.nlq = std::move(nlq);
    pair.sql = parse_sql(sql_text);
    pair.sql_text = join_tokens(serialize_sql(pair.sql, Tokenization::split));
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace ehrq
