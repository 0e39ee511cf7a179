#include "ehrq/kg.hpp"

#include <algorithm>
#include <cassert>

#include "ehrq/error.hpp"

namespace ehrq {

namespace {

int object_rank(const TripleObject& o) { return std::holds_alternative<EntityRef>(o) ? 0 : 1; }

}  // namespace

bool Triple::operator<(const Triple& o) const {
  if (subject != o.subject) return subject < o.subject;
  if (predicate != o.predicate) return predicate < o.predicate;
  if (object_rank(object) != object_rank(o.object))
    return object_rank(object) < object_rank(o.object);
  if (const auto* e = std::get_if<EntityRef>(&object))
    return e->id < std::get<EntityRef>(o.object).id;
  return cell_less(std::get<CellValue>(object), std::get<CellValue>(o.object));
}

EntityId entity_id(const TableSpec& table, const CellValue& key) {
  const std::string& ns = table.has_declared_key() ? *table.primary_key : table.name;
  return "/" + ns + "/" + format_cell(key);
}

KnowledgeGraph build_kg(const Database& db) {
  KnowledgeGraph kg;
  for (const auto& table : db.manifest.tables) {
    for (const auto& col : table.columns) {
      if (col.role == ColumnRole::property) kg.vocabulary.insert("/" + col.name);
      else if (col.role == ColumnRole::foreign_key) kg.vocabulary.insert("/" + table.name);
    }
  }

  std::vector<Triple> triples;
  for (const auto& table : db.tables) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const EntityId subject = entity_id(table.spec, table.key_value(r));
      kg.entities.insert(subject);
      for (std::size_t c = 0; c < table.spec.columns.size(); ++c) {
        const auto& col = table.spec.columns[c];
        const CellValue& cell = table.rows[r][c];
        if (is_null(cell)) continue;  // no triple for a Null cell
        if (col.role == ColumnRole::property) {
          triples.push_back({subject, "/" + col.name, cell});
        } else if (col.role == ColumnRole::foreign_key) {
          const TableSpec& parent = db.manifest.require_table(col.references);
          triples.push_back({entity_id(parent, cell), "/" + table.spec.name,
                             EntityRef{subject}});
        }
      }
    }
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  kg.triples = std::move(triples);

  for (const auto& t : kg.triples) {
    if (const auto* e = std::get_if<EntityRef>(&t.object)) kg.entities.insert(e->id);
    kg.by_subject[t.subject][t.predicate].push_back(&t);
    kg.by_predicate[t.predicate].push_back(&t);
  }
  // Literals cannot have child nodes: no literal ever indexes as a subject.
  // Subjects are always entity ids by construction; keep the invariant
  // checked against the entity set.
  for (const auto& [subject, rest] : kg.by_subject) {
    (void)rest;
    if (!kg.entities.count(subject))
      fail(ErrorKind::schema, "literal value indexed as a subject: " + subject);
  }
  return kg;
}

std::string dump_triples(const KnowledgeGraph& kg) {
  std::string out;
  for (const auto& t : kg.triples) {
    out += t.subject;
    out += '\t';
    out += t.predicate;
    out += '\t';
    if (const auto* e = std::get_if<EntityRef>(&t.object)) {
      out += e->id;
    } else {
      out += '"';
      out += format_cell(std::get<CellValue>(t.object));
      out += '"';
    }
    out += '\n';
  }
  return out;
}

KgMetrics kg_metrics(const KnowledgeGraph& kg) {
  KgMetrics m;
  m.triple_count = kg.triples.size();

  // Longest downward path per entity, literal edges contributing one hop.
  // Entity-to-entity edges form a DAG, so memoised DFS terminates.
  std::map<EntityId, int> depth;
  auto dfs = [&](auto&& self, const EntityId& id) -> int {
    auto memo = depth.find(id);
    if (memo != depth.end()) return memo->second;
    int best = 0;
    auto it = kg.by_subject.find(id);
    if (it != kg.by_subject.end()) {
      for (const auto& [pred, objects] : it->second) {
        (void)pred;
        for (const Triple* t : objects) {
          if (const auto* e = std::get_if<EntityRef>(&t->object))
            best = std::max(best, 1 + self(self, e->id));
          else
            best = std::max(best, 1);
        }
      }
    }
    depth[id] = best;
    return best;
  };

  std::set<EntityId> has_parent;
  for (const auto& t : kg.triples)
    if (const auto* e = std::get_if<EntityRef>(&t.object)) has_parent.insert(e->id);
  for (const auto& id : kg.entities)
    if (!has_parent.count(id)) m.max_depth = std::max(m.max_depth, dfs(dfs, id));
  return m;
}

namespace {

using Bound = TripleObject;  // entity or literal a variable is bound to

bool bound_equal(const Bound& a, const Bound& b) {
  if (a.index() != b.index()) return false;
  if (const auto* e = std::get_if<EntityRef>(&a)) return e->id == std::get<EntityRef>(b).id;
  return std::get<CellValue>(a) == std::get<CellValue>(b);
}

bool object_matches(const TripleObject& object, const PatternTerm& term,
                    const std::map<std::string, Bound>& binding) {
  if (const auto* v = std::get_if<Variable>(&term)) {
    auto it = binding.find(v->name);
    if (it == binding.end()) return true;
    return bound_equal(object, it->second);
  }
  if (const auto* e = std::get_if<EntityRef>(&term)) {
    const auto* oe = std::get_if<EntityRef>(&object);
    return oe && oe->id == e->id;
  }
  const auto* literal = std::get_if<CellValue>(&object);
  if (!literal) return false;
  const auto& want = std::get<CellValue>(term);
  if (is_numeric(*literal) && is_numeric(want))
    return as_double(*literal) == as_double(want);
  return *literal == want;
}

bool filter_passes(const SparqlFilter& f, const std::map<std::string, Bound>& binding) {
  const Bound& bound = binding.at(f.var.name);
  if (const auto* want_entity = std::get_if<EntityRef>(&f.value)) {
    const auto* e = std::get_if<EntityRef>(&bound);
    if (!e) fail(ErrorKind::type_mismatch, "filter compares an entity with a literal");
    if (f.op != CmpOp::eq)
      fail(ErrorKind::type_mismatch, "entities only support equality filters");
    return e->id == want_entity->id;
  }
  const auto* cell = std::get_if<CellValue>(&bound);
  if (!cell) fail(ErrorKind::type_mismatch, "filter compares a literal with an entity");
  const auto& want = std::get<CellValue>(f.value);
  int sign;
  if (is_numeric(*cell) && is_numeric(want)) {
    double a = as_double(*cell), b = as_double(want);
    sign = a < b ? -1 : (a > b ? 1 : 0);
  } else if (is_text(*cell) && is_text(want)) {
    const auto& a = std::get<std::string>(*cell);
    const auto& b = std::get<std::string>(want);
    sign = a < b ? -1 : (a > b ? 1 : 0);
  } else {
    fail(ErrorKind::type_mismatch, "filter compares text with a number");
  }
  switch (f.op) {
    case CmpOp::eq: return sign == 0;
    case CmpOp::lt: return sign < 0;
    case CmpOp::gt: return sign > 0;
    case CmpOp::le: return sign <= 0;
    case CmpOp::ge: return sign >= 0;
  }
  return false;
}

CellValue bound_to_cell(const Bound& b) {
  if (const auto* e = std::get_if<EntityRef>(&b)) return e->id;
  return std::get<CellValue>(b);
}

}  // namespace

ResultSet execute_sparql(const KnowledgeGraph& kg, const SparqlQuery& query) {
  for (const auto& p : query.patterns)
    if (!kg.vocabulary.count(p.predicate))
      fail(ErrorKind::unknown_predicate, p.predicate);

  std::vector<std::map<std::string, Bound>> bindings;

  auto match = [&](auto&& self, std::size_t index, std::map<std::string, Bound>& binding) -> void {
    if (index == query.patterns.size()) {
      bindings.push_back(binding);
      return;
    }
    const TriplePattern& p = query.patterns[index];

    auto try_triple = [&](const Triple& t) {
      if (!object_matches(t.object, p.object, binding)) return;
      const auto* ov = std::get_if<Variable>(&p.object);
      const auto* sv = std::get_if<Variable>(&p.subject);
      bool inserted_obj = false, inserted_sub = false;
      if (ov && !binding.count(ov->name)) {
        binding.emplace(ov->name, t.object);
        inserted_obj = true;
      }
      // Re-check the subject once the object is bound: when both terms are
      // the same variable the subject must agree with the fresh binding.
      bool consistent = true;
      if (sv) {
        auto it = binding.find(sv->name);
        if (it == binding.end()) {
          binding.emplace(sv->name, EntityRef{t.subject});
          inserted_sub = true;
        } else {
          const auto* be = std::get_if<EntityRef>(&it->second);
          consistent = be && be->id == t.subject;
        }
      }
      if (consistent) self(self, index + 1, binding);
      if (inserted_obj) binding.erase(ov->name);
      if (inserted_sub) binding.erase(sv->name);
    };

    // Resolve the subject: ground entity, bound variable, or unbound.
    std::string subject;
    bool subject_known = false;
    if (const auto* e = std::get_if<EntityRef>(&p.subject)) {
      subject = e->id;
      subject_known = true;
    } else if (const auto* v = std::get_if<Variable>(&p.subject)) {
      auto it = binding.find(v->name);
      if (it != binding.end()) {
        const auto* be = std::get_if<EntityRef>(&it->second);
        if (!be) return;  // literal-bound variable cannot be a subject
        subject = be->id;
        subject_known = true;
      }
    }

    if (subject_known) {
      auto s_it = kg.by_subject.find(subject);
      if (s_it == kg.by_subject.end()) return;
      auto p_it = s_it->second.find(p.predicate);
      if (p_it == s_it->second.end()) return;
      for (const Triple* t : p_it->second) try_triple(*t);
    } else {
      auto p_it = kg.by_predicate.find(p.predicate);
      if (p_it == kg.by_predicate.end()) return;
      for (const Triple* t : p_it->second) try_triple(*t);
    }
  };

  std::map<std::string, Bound> empty;
  match(match, 0, empty);

  std::vector<const std::map<std::string, Bound>*> kept;
  kept.reserve(bindings.size());
  for (const auto& b : bindings) {
    bool pass = true;
    for (const auto& f : query.filters)
      if (!filter_passes(f, b)) {
        pass = false;
        break;
      }
    if (pass) kept.push_back(&b);
  }

  ResultSet rs;
  if (query.projection.agg) {
    const auto& var = query.projection.vars.at(0);
    rs.columns.push_back(std::string(to_string(*query.projection.agg)) + "(?" + var.name + ")");
    std::vector<CellValue> values;
    values.reserve(kept.size());
    for (const auto* b : kept) values.push_back(bound_to_cell(b->at(var.name)));
    if (*query.projection.agg == AggFn::count) {
      rs.rows.push_back({static_cast<std::int64_t>(values.size())});
    } else if (values.empty()) {
      rs.rows.push_back({CellValue{}});
    } else if (*query.projection.agg == AggFn::avg) {
      double sum = 0;
      for (const auto& v : values) {
        if (!is_numeric(v)) fail(ErrorKind::type_mismatch, "avg over non-numeric values");
        sum += as_double(v);
      }
      rs.rows.push_back({sum / static_cast<double>(values.size())});
    } else {
      const bool want_min = *query.projection.agg == AggFn::min;
      CellValue best = values.front();
      for (const auto& v : values) {
        bool take;
        if (is_numeric(v) && is_numeric(best)) {
          take = want_min ? as_double(v) < as_double(best) : as_double(v) > as_double(best);
        } else if (is_text(v) && is_text(best)) {
          take = want_min ? std::get<std::string>(v) < std::get<std::string>(best)
                          : std::get<std::string>(v) > std::get<std::string>(best);
        } else {
          fail(ErrorKind::type_mismatch, "mixed types under aggregate");
        }
        if (take) best = v;
      }
      rs.rows.push_back({best});
    }
  } else {
    for (const auto& v : query.projection.vars) rs.columns.push_back("?" + v.name);
    rs.rows.reserve(kept.size());
    for (const auto* b : kept) {
      std::vector<CellValue> row;
      row.reserve(query.projection.vars.size());
      for (const auto& v : query.projection.vars) row.push_back(bound_to_cell(b->at(v.name)));
      rs.rows.push_back(std::move(row));
    }
  }
  return rs;
}

}  // namespace ehrq
