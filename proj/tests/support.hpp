#pragma once

// Shared helpers for the test suites: independent oracles (kept away from the
// production code paths they check), random AST generators, and fixture
// plumbing.

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ehrq/database.hpp"
#include "ehrq/error.hpp"
#include "ehrq/query.hpp"
#include "ehrq/schema.hpp"
#include "ehrq/value.hpp"

namespace ehrq::testing {

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("ehrq_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- brute-force SQL oracle -------------------------------------------------
// Nested loops with per-level pruning; shares only the Database storage and
// the parsed AST with the engine under test.

inline bool oracle_cells_equal(const CellValue& a, const CellValue& b) {
  if (is_null(a) || is_null(b)) return false;
  if (is_numeric(a) && is_numeric(b)) return as_double(a) == as_double(b);
  return a == b;
}

inline bool oracle_compare(const CellValue& cell, CmpOp op, const CellValue& value) {
  if (is_null(cell) || is_null(value)) return false;
  double sign;
  if (is_numeric(cell) && is_numeric(value)) {
    sign = as_double(cell) < as_double(value) ? -1 : (as_double(cell) > as_double(value) ? 1 : 0);
  } else if (is_text(cell) && is_text(value)) {
    const auto& a = std::get<std::string>(cell);
    const auto& b = std::get<std::string>(value);
    sign = a < b ? -1 : (a > b ? 1 : 0);
  } else {
    fail(ErrorKind::type_mismatch, "oracle: mixed comparison");
  }
  switch (op) {
    case CmpOp::eq: return sign == 0;
    case CmpOp::lt: return sign < 0;
    case CmpOp::gt: return sign > 0;
    case CmpOp::le: return sign <= 0;
    case CmpOp::ge: return sign >= 0;
  }
  return false;
}

inline ResultSet brute_force_sql(const Database& db, const SqlQuery& q) {
  std::vector<const Table*> tables{&db.require_table(q.from_table)};
  std::vector<std::string> names{q.from_table};
  for (const auto& j : q.joins) {
    tables.push_back(&db.require_table(j.table));
    names.push_back(j.table);
  }
  auto index_of = [&](const std::string& t) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == t) return i;
    fail(ErrorKind::unknown_table, t);
  };

  std::vector<std::vector<CellValue>> rows;  // projected plain rows
  std::vector<CellValue> agg_values;
  std::vector<std::size_t> combo(tables.size());

  auto recurse = [&](auto&& self, std::size_t level) -> void {
    if (level == tables.size()) {
      for (const auto& cond : q.conditions) {
        std::size_t ti = index_of(cond.column.table);
        if (!oracle_compare(tables[ti]->cell(combo[ti], cond.column.column), cond.op, cond.value))
          return;
      }
      if (q.select_items.size() == 1 && q.select_items[0].agg) {
        std::size_t ti = index_of(q.select_items[0].column.table);
        CellValue v = tables[ti]->cell(combo[ti], q.select_items[0].column.column);
        if (!is_null(v)) agg_values.push_back(std::move(v));
      } else {
        std::vector<CellValue> row;
        for (const auto& item : q.select_items) {
          std::size_t ti = index_of(item.column.table);
          row.push_back(tables[ti]->cell(combo[ti], item.column.column));
        }
        rows.push_back(std::move(row));
      }
      return;
    }
    for (std::size_t r = 0; r < tables[level]->rows.size(); ++r) {
      combo[level] = r;
      bool ok = true;
      for (std::size_t j = 0; j < q.joins.size() && ok; ++j) {
        // check a join as soon as both of its tables are fixed
        std::size_t li = index_of(q.joins[j].on_left.table);
        std::size_t ri = index_of(q.joins[j].on_right.table);
        if (li > level || ri > level) continue;
        ok = oracle_cells_equal(tables[li]->cell(combo[li], q.joins[j].on_left.column),
                                tables[ri]->cell(combo[ri], q.joins[j].on_right.column));
      }
      if (ok) self(self, level + 1);
    }
  };
  recurse(recurse, 0);

  ResultSet rs;
  for (const auto& item : q.select_items)
    rs.columns.push_back(item.column.table + "." + item.column.column);
  if (q.select_items.size() == 1 && q.select_items[0].agg) {
    const AggFn fn = *q.select_items[0].agg;
    if (fn == AggFn::count) {
      rs.rows.push_back({static_cast<std::int64_t>(agg_values.size())});
    } else if (agg_values.empty()) {
      rs.rows.push_back({CellValue{}});
    } else if (fn == AggFn::avg) {
      double sum = 0;
      for (const auto& v : agg_values) sum += as_double(v);
      rs.rows.push_back({sum / static_cast<double>(agg_values.size())});
    } else {
      CellValue best = agg_values.front();
      for (const auto& v : agg_values) {
        bool take;
        if (is_numeric(v)) take = fn == AggFn::min ? as_double(v) < as_double(best)
                                                   : as_double(v) > as_double(best);
        else take = fn == AggFn::min ? std::get<std::string>(v) < std::get<std::string>(best)
                                     : std::get<std::string>(v) > std::get<std::string>(best);
        if (take) best = v;
      }
      rs.rows.push_back({best});
    }
  } else {
    rs.rows = std::move(rows);
  }
  return rs;
}

// --- BFS oracle over a SchemaGraph -------------------------------------------

inline int bfs_distance(const SchemaGraph& g, int from, int to) {
  if (from == to) return 0;
  std::vector<int> dist(g.nodes.size(), -1);
  dist[from] = 0;
  std::vector<int> queue{from};
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    int cur = queue[qi];
    for (int e : g.out[cur]) {
      int next = g.edges[e].to;
      if (dist[next] < 0) {
        dist[next] = dist[cur] + 1;
        queue.push_back(next);
      }
    }
  }
  return dist[to];
}

// All shortest-path label sequences from -> to, for tie-break checking.
inline void all_shortest_label_paths(const SchemaGraph& g, int from, int to, int budget,
                                     std::vector<std::string>& current,
                                     std::vector<std::vector<std::string>>& out) {
  if (from == to) {
    if (budget == 0) out.push_back(current);
    return;
  }
  if (budget <= 0) return;
  for (int e : g.out[from]) {
    current.push_back(g.edges[e].relation);
    all_shortest_label_paths(g, g.edges[e].to, to, budget - 1, current, out);
    current.pop_back();
  }
}

// Random labeled DAG with out-labels unique per node.
inline SchemaGraph random_dag(std::mt19937_64& rng) {
  const int n = 2 + static_cast<int>(rng() % 11);
  std::vector<SchemaNode> nodes;
  for (int i = 0; i < n; ++i)
    nodes.push_back({true, "t" + std::to_string(i), "k" + std::to_string(i), false});
  const std::vector<std::string> labels = {"a", "b", "c", "d", "e", "f"};
  std::vector<SchemaEdge> edges;
  for (int i = 0; i < n; ++i) {
    std::set<std::string> used;
    for (int j = i + 1; j < n; ++j) {
      if (rng() % 100 < 30) {
        const std::string& label = labels[rng() % labels.size()];
        if (used.insert(label).second) edges.push_back({i, j, label});
      }
    }
  }
  return make_schema_graph({}, std::move(nodes), std::move(edges));
}

// --- random ASTs --------------------------------------------------------------

inline CellValue random_value(std::mt19937_64& rng) {
  switch (rng() % 3) {
    case 0: {
      static const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta bay",
                                                     "epsilon fold", "zeta"};
      return words[rng() % words.size()];
    }
    case 1:
      return static_cast<std::int64_t>(rng() % 20001) - 10000;
    default:
      return (static_cast<double>(rng() % 200001) - 100000.0) / 64.0;
  }
}

inline SqlQuery random_sql_query(std::mt19937_64& rng) {
  auto ident = [&](const char* stem, int n) {
    return std::string(stem) + std::to_string(rng() % n);
  };
  SqlQuery q;
  q.from_table = ident("t", 6);
  std::vector<std::string> chain{q.from_table};
  const int n_joins = static_cast<int>(rng() % 4);
  for (int i = 0; i < n_joins; ++i) {
    SqlJoin join;
    do {
      join.table = ident("t", 12);
    } while (std::find(chain.begin(), chain.end(), join.table) != chain.end());
    const std::string& prev = chain[rng() % chain.size()];
    join.on_left = {prev, ident("c", 8)};
    join.on_right = {join.table, ident("c", 8)};
    if (rng() % 2) std::swap(join.on_left, join.on_right);
    chain.push_back(join.table);
    q.joins.push_back(std::move(join));
  }
  const bool agg = rng() % 2;
  if (agg) {
    SelectItem item;
    item.agg = static_cast<AggFn>(rng() % 4);
    item.column = {chain[rng() % chain.size()], ident("c", 8)};
    q.select_items.push_back(std::move(item));
  } else {
    const int n_items = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n_items; ++i)
      q.select_items.push_back({std::nullopt, {chain[rng() % chain.size()], ident("c", 8)}});
  }
  const int n_conds = static_cast<int>(rng() % 4);
  for (int i = 0; i < n_conds; ++i)
    q.conditions.push_back({{chain[rng() % chain.size()], ident("c", 8)},
                            static_cast<CmpOp>(rng() % 5), random_value(rng)});
  return q;
}

inline SparqlQuery random_sparql_query(std::mt19937_64& rng) {
  SparqlQuery q;
  std::vector<std::string> vars{"v0"};
  const int n_patterns = 1 + static_cast<int>(rng() % 5);
  for (int i = 0; i < n_patterns; ++i) {
    TriplePattern p;
    if (rng() % 6 == 0) {
      p.subject = EntityRef{"/k" + std::to_string(rng() % 4) + "/" + std::to_string(rng() % 50)};
      // keep the variable graph connected: a ground-subject pattern must bind
      // an existing variable as its object
      p.object = Variable{vars[rng() % vars.size()]};
    } else {
      p.subject = Variable{vars[rng() % vars.size()]};
      switch (rng() % 3) {
        case 0: {
          std::string fresh = "v" + std::to_string(vars.size());
          vars.push_back(fresh);
          p.object = Variable{fresh};
          break;
        }
        case 1:
          p.object = random_value(rng);
          break;
        default:
          p.object = EntityRef{"/k" + std::to_string(rng() % 4) + "/" +
                               std::to_string(rng() % 50)};
      }
    }
    p.predicate = "/r" + std::to_string(rng() % 8);
    q.patterns.push_back(std::move(p));
  }
  const int n_filters = static_cast<int>(rng() % 3);
  for (int i = 0; i < n_filters; ++i)
    q.filters.push_back({Variable{vars[rng() % vars.size()]}, static_cast<CmpOp>(rng() % 5),
                         PatternTerm{random_value(rng)}});
  if (rng() % 2) {
    q.projection.agg = static_cast<AggFn>(rng() % 4);
    q.projection.vars.push_back(Variable{vars[rng() % vars.size()]});
  } else {
    const int n_proj = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n_proj; ++i) q.projection.vars.push_back(Variable{vars[rng() % vars.size()]});
  }
  return q;
}

// --- independent cell-count over raw CSVs ------------------------------------
// Counts non-empty property and foreign-key cells straight off the files; the
// generator never emits quoted newlines, so a line scan is enough here.

inline std::size_t csv_cell_count_oracle(const SchemaManifest& manifest,
                                         const std::filesystem::path& dir) {
  std::size_t count = 0;
  for (const auto& table : manifest.tables) {
    std::ifstream in(dir / (table.name + ".csv"));
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (header) {
        header = false;
        continue;
      }
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::string field;
      bool quoted = false;
      for (char c : line) {
        if (c == '"') quoted = !quoted;
        else if (c == ',' && !quoted) {
          fields.push_back(field);
          field.clear();
        } else field += c;
      }
      fields.push_back(field);
      for (std::size_t i = 0; i < table.columns.size() && i < fields.size(); ++i)
        if (table.columns[i].role != ColumnRole::primary_key && !fields[i].empty()) ++count;
    }
  }
  return count;
}

}  // namespace ehrq::testing
