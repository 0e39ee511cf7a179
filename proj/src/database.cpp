#include "ehrq/database.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ehrq/csv.hpp"
#include "ehrq/error.hpp"

namespace ehrq {

CellValue Table::key_value(std::size_t row) const {
  if (spec.has_declared_key()) {
    int idx = spec.column_index(*spec.primary_key);
    return rows[row][idx];
  }
  return static_cast<std::int64_t>(row);
}

bool Table::has_column(std::string_view column) const {
  if (!spec.has_declared_key() && column == kSyntheticKey) return true;
  return spec.find_column(column) != nullptr;
}

CellValue Table::cell(std::size_t row, std::string_view column) const {
  if (!spec.has_declared_key() && column == kSyntheticKey)
    return static_cast<std::int64_t>(row);
  int idx = spec.column_index(column);
  if (idx < 0)
    fail(ErrorKind::unknown_column, spec.name + "." + std::string(column));
  return rows[row][idx];
}

const Table* Database::find_table(std::string_view name) const {
  for (const auto& t : tables)
    if (t.spec.name == name) return &t;
  return nullptr;
}

const Table& Database::require_table(std::string_view name) const {
  const Table* t = find_table(name);
  if (!t) fail(ErrorKind::unknown_table, std::string(name));
  return *t;
}

Database load_database(const SchemaManifest& manifest, const std::filesystem::path& dir) {
  validate_manifest(manifest);
  Database db;
  db.manifest = manifest;

  for (const auto& spec : manifest.tables) {
    const auto path = dir / (spec.name + ".csv");
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::missing_table_file, path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto records = parse_csv(buffer.str());
    if (records.empty())
      fail(ErrorKind::header_mismatch, spec.name + ".csv has no header row");

    const auto& header = records.front();
    if (header.size() != spec.columns.size())
      fail(ErrorKind::header_mismatch,
           spec.name + ".csv header has " + std::to_string(header.size()) + " columns, manifest has " +
               std::to_string(spec.columns.size()));
    for (std::size_t i = 0; i < header.size(); ++i)
      if (lowercase(trim(header[i])) != spec.columns[i].name)
        fail(ErrorKind::header_mismatch, spec.name + ".csv column " + std::to_string(i) +
                                             " is '" + header[i] + "', expected '" +
                                             spec.columns[i].name + "'");

    Table table;
    table.spec = spec;
    for (std::size_t r = 1; r < records.size(); ++r) {
      const auto& record = records[r];
      if (record.size() != spec.columns.size())
        fail(ErrorKind::parse, spec.name + ".csv row " + std::to_string(r) + " has " +
                                   std::to_string(record.size()) + " fields");
      std::vector<CellValue> row;
      row.reserve(record.size());
      for (std::size_t c = 0; c < record.size(); ++c) {
        try {
          row.push_back(coerce_cell(record[c], spec.columns[c].datatype));
        } catch (const Error& e) {
          fail(ErrorKind::type_coercion, spec.name + ".csv row " + std::to_string(r) +
                                             " column '" + spec.columns[c].name + "': " + e.what());
        }
      }
      table.rows.push_back(std::move(row));
    }
    db.tables.push_back(std::move(table));
  }

  // Primary keys unique and non-Null.
  for (const auto& table : db.tables) {
    if (!table.spec.has_declared_key()) continue;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      CellValue key = table.key_value(r);
      if (is_null(key))
        fail(ErrorKind::integrity, table.spec.name + " row " + std::to_string(r) +
                                       " has a null primary key");
      if (!seen.insert(format_cell(key)).second)
        fail(ErrorKind::integrity, table.spec.name + " has duplicate primary key '" +
                                       format_cell(key) + "'");
    }
  }
  // Foreign keys are Null or resolve to a parent primary key.
  for (const auto& table : db.tables) {
    for (std::size_t c = 0; c < table.spec.columns.size(); ++c) {
      const auto& col = table.spec.columns[c];
      if (col.role != ColumnRole::foreign_key) continue;
      const Table& parent = db.require_table(col.references);
      std::set<std::string> parent_keys;
      for (std::size_t r = 0; r < parent.rows.size(); ++r)
        parent_keys.insert(format_cell(parent.key_value(r)));
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const CellValue& v = table.rows[r][c];
        if (is_null(v)) continue;
        if (!parent_keys.count(format_cell(v)))
          fail(ErrorKind::integrity, table.spec.name + " row " + std::to_string(r) + " column '" +
                                         col.name + "' references missing " + col.references +
                                         " key '" + format_cell(v) + "'");
      }
    }
  }
  return db;
}

std::string dump_database(const Database& db) {
  std::string out;
  for (const auto& table : db.tables) {
    out += "# " + table.spec.name + "\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      out += format_cell(table.key_value(r));
      for (const auto& cell : table.rows[r]) {
        out += '\t';
        out += is_null(cell) ? "\\N" : format_cell(cell);
      }
      out += '\n';
    }
  }
  return out;
}

std::string result_to_csv(const ResultSet& rs) {
  std::string out = csv_line(rs.columns);
  for (const auto& row : rs.rows) {
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (const auto& cell : row) fields.push_back(format_cell(cell));
    out += csv_line(fields);
  }
  return out;
}

namespace {

bool compare_cells(const CellValue& cell, CmpOp op, const CellValue& value,
                   const std::string& where) {
  if (is_null(cell) || is_null(value)) return false;
  int sign;
  if (is_numeric(cell) && is_numeric(value)) {
    double a = as_double(cell), b = as_double(value);
    sign = a < b ? -1 : (a > b ? 1 : 0);
  } else if (is_text(cell) && is_text(value)) {
    const auto& a = std::get<std::string>(cell);
    const auto& b = std::get<std::string>(value);
    sign = a < b ? -1 : (a > b ? 1 : 0);
  } else {
    fail(ErrorKind::type_mismatch, "cannot compare text with a number in " + where);
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

CellValue aggregate(AggFn fn, const std::vector<CellValue>& values, const std::string& label) {
  if (fn == AggFn::count) return static_cast<std::int64_t>(values.size());
  if (values.empty()) return CellValue{};
  if (fn == AggFn::avg) {
    double sum = 0;
    for (const auto& v : values) {
      if (!is_numeric(v)) fail(ErrorKind::type_mismatch, "avg over non-numeric " + label);
      sum += as_double(v);
    }
    return sum / static_cast<double>(values.size());
  }
  const CellValue* best = &values.front();
  for (const auto& v : values) {
    bool take;
    if (is_numeric(v) && is_numeric(*best)) {
      take = fn == AggFn::min ? as_double(v) < as_double(*best)
                              : as_double(v) > as_double(*best);
    } else if (is_text(v) && is_text(*best)) {
      const auto& a = std::get<std::string>(v);
      const auto& b = std::get<std::string>(*best);
      take = fn == AggFn::min ? a < b : a > b;
    } else {
      fail(ErrorKind::type_mismatch, "mixed types under " + label);
    }
    if (take) best = &v;
  }
  return *best;
}

}  // namespace

ResultSet execute_sql(const Database& db, const SqlQuery& query) {
  // Tables in chain order: from_table first, then join order.
  std::vector<const Table*> chain{&db.require_table(query.from_table)};
  std::vector<std::string> chain_names{query.from_table};
  auto chain_index = [&](const std::string& table) {
    for (std::size_t i = 0; i < chain_names.size(); ++i)
      if (chain_names[i] == table) return static_cast<int>(i);
    return -1;
  };

  // Combos hold one row index per chained table.
  std::vector<std::vector<std::size_t>> combos;
  combos.reserve(chain[0]->rows.size());
  for (std::size_t r = 0; r < chain[0]->rows.size(); ++r) combos.push_back({r});

  for (const auto& join : query.joins) {
    const Table& added = db.require_table(join.table);
    const bool left_new = join.on_left.table == join.table;
    const ColumnRef& fresh = left_new ? join.on_left : join.on_right;
    const ColumnRef& old = left_new ? join.on_right : join.on_left;
    int old_pos = chain_index(old.table);
    if (old_pos < 0) fail(ErrorKind::unknown_table, old.table);
    const Table& old_table = *chain[old_pos];
    if (!old_table.has_column(old.column))
      fail(ErrorKind::unknown_column, old.table + "." + old.column);
    if (!added.has_column(fresh.column))
      fail(ErrorKind::unknown_column, fresh.table + "." + fresh.column);

    // Join conditions must be the schema's FK=PK links.
    auto is_key_of = [](const Table& t, const std::string& col) {
      return t.spec.key_column() == col &&
             (t.spec.has_declared_key() || col == kSyntheticKey);
    };
    auto is_fk_to = [](const Table& t, const std::string& col, const std::string& parent) {
      const ColumnSpec* c = t.spec.find_column(col);
      return c && c->role == ColumnRole::foreign_key && c->references == parent;
    };
    if (!(is_key_of(old_table, old.column) && is_fk_to(added, fresh.column, old.table)) &&
        !(is_fk_to(old_table, old.column, added.spec.name) && is_key_of(added, fresh.column)))
      fail(ErrorKind::schema, "join between " + old.table + "." + old.column + " and " +
                                  fresh.table + "." + fresh.column +
                                  " is not a schema foreign-key link");

    std::map<std::string, std::vector<std::size_t>> added_by_value;
    for (std::size_t r = 0; r < added.rows.size(); ++r) {
      CellValue v = added.cell(r, fresh.column);
      if (!is_null(v)) added_by_value[format_cell(v)].push_back(r);
    }
    std::vector<std::vector<std::size_t>> next;
    for (const auto& combo : combos) {
      CellValue v = old_table.cell(combo[old_pos], old.column);
      if (is_null(v)) continue;
      auto it = added_by_value.find(format_cell(v));
      if (it == added_by_value.end()) continue;
      for (std::size_t r : it->second) {
        auto extended = combo;
        extended.push_back(r);
        next.push_back(std::move(extended));
      }
    }
    combos = std::move(next);
    chain.push_back(&added);
    chain_names.push_back(join.table);
  }

  for (const auto& cond : query.conditions) {
    int pos = chain_index(cond.column.table);
    if (pos < 0) fail(ErrorKind::unknown_table, cond.column.table);
    if (!chain[pos]->has_column(cond.column.column))
      fail(ErrorKind::unknown_column, cond.column.table + "." + cond.column.column);
    std::vector<std::vector<std::size_t>> kept;
    for (auto& combo : combos) {
      CellValue cell = chain[pos]->cell(combo[pos], cond.column.column);
      if (compare_cells(cell, cond.op, cond.value,
                        cond.column.table + "." + cond.column.column))
        kept.push_back(std::move(combo));
    }
    combos = std::move(kept);
  }

  ResultSet rs;
  const bool aggregated = query.select_items.size() == 1 && query.select_items[0].agg;
  for (const auto& item : query.select_items) {
    int pos = chain_index(item.column.table);
    if (pos < 0) fail(ErrorKind::unknown_table, item.column.table);
    if (!chain[pos]->has_column(item.column.column))
      fail(ErrorKind::unknown_column, item.column.table + "." + item.column.column);
    std::string label = item.column.table + "." + item.column.column;
    rs.columns.push_back(item.agg ? std::string(to_string(*item.agg)) + "(" + label + ")"
                                  : label);
  }

  if (aggregated) {
    const auto& item = query.select_items[0];
    int pos = chain_index(item.column.table);
    std::vector<CellValue> values;
    values.reserve(combos.size());
    for (const auto& combo : combos) {
      CellValue v = chain[pos]->cell(combo[pos], item.column.column);
      if (!is_null(v)) values.push_back(std::move(v));
    }
    rs.rows.push_back({aggregate(*item.agg, values, rs.columns[0])});
  } else {
    rs.rows.reserve(combos.size());
    for (const auto& combo : combos) {
      std::vector<CellValue> row;
      row.reserve(query.select_items.size());
      for (const auto& item : query.select_items) {
        int pos = chain_index(item.column.table);
        row.push_back(chain[pos]->cell(combo[pos], item.column.column));
      }
      rs.rows.push_back(std::move(row));
    }
  }
  return rs;
}

}  // namespace ehrq
