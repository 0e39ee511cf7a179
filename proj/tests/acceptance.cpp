// Acceptance suite: one line per criterion, nonzero exit if any fails.
// An optional --mimic-dir <path> enables the conditional real-data check.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <random>
#include <set>
#include <vector>

#include "ehrq/database.hpp"
#include "ehrq/error.hpp"
#include "ehrq/eval.hpp"
#include "ehrq/fixture.hpp"
#include "ehrq/kg.hpp"
#include "ehrq/query.hpp"
#include "ehrq/schema.hpp"
#include "ehrq/transpile.hpp"
#include "support.hpp"

using namespace ehrq;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << criterion << ": " << name
            << " (" << detail << ")\n";
  if (!pass) ++g_failures;
}

struct Fixture {
  std::filesystem::path dir;
  SchemaManifest manifest;
  SchemaGraph graph;
  Database db;
  KnowledgeGraph kg;
  std::vector<QueryTemplate> templates;
};

Fixture make_fixture(FixtureSchema schema, int patients, std::uint64_t seed,
                     const std::string& tag, bool with_kg = true) {
  Fixture f;
  f.dir = testing::temp_dir("acc_" + tag);
  gen_fixture({patients, seed, schema}, f.dir);
  f.manifest = load_manifest(f.dir / "manifest.json");
  f.graph = build_schema_graph(f.manifest);
  f.db = load_database(f.manifest, f.dir);
  if (with_kg) f.kg = build_kg(f.db);
  f.templates = load_templates(f.dir / "templates.json");
  return f;
}

std::vector<DatasetEntry> to_dataset(const std::vector<CorpusPair>& pairs) {
  std::vector<DatasetEntry> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({p.nlq, std::nullopt, p.sql_text, std::nullopt});
  return out;
}

// 1. Equivalence sweep: 1,000 sampled queries over the seed-42 nine-table
//    fixture, match_rate exactly 1.0, under 30 seconds.
void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  Fixture f = make_fixture(FixtureSchema::nine_table, 100, 42, "c1");
  auto corpus = sample_query_corpus(f.templates, f.db, 1000, 42);

  std::set<std::size_t> depths;
  for (const auto& p : corpus) depths.insert(p.sql.joins.size());
  bool spans = true;
  for (std::size_t k = 0; k <= 5; ++k) spans = spans && depths.count(k);

  EquivalenceReport rep = verify_equivalence(to_dataset(corpus), f.db, f.kg, f.graph);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "match_rate %.3f on %zu queries, joins 0-5 %s, %.1fs", rep.match_rate, rep.n,
                spans ? "covered" : "NOT covered", seconds);
  report(1, "equivalence sweep", rep.match_rate == 1.0 && rep.n == 1000 && spans && seconds < 30,
         detail);
}

// 2. Metric truth table: per-pair (LF,EX,ST) flags and exact aggregates.
void criterion_2() {
  SchemaManifest m = manifest_from_json(nlohmann::json::parse(R"({
    "tables": [{"name": "patients", "primary_key": "subject_id", "columns": [
      {"name": "subject_id", "role": "primary_key", "references": null, "datatype": "integer"},
      {"name": "name", "role": "property", "references": null, "datatype": "text"},
      {"name": "dob", "role": "property", "references": null, "datatype": "integer"},
      {"name": "gender", "role": "property", "references": null, "datatype": "text"},
      {"name": "age", "role": "property", "references": null, "datatype": "integer"}]}]
  })"));
  auto dir = testing::temp_dir("acc_c2");
  testing::write_file(dir / "patients.csv",
                      "subject_id,name,dob,gender,age\n"
                      "1,ann a,2021,f,40\n"
                      "2,bea b,2022,f,35\n"
                      "3,carl c,2021,m,60\n"
                      "4,dan d,2022,m,70\n"
                      "5,eve e,2019,f,90\n");
  Database db = load_database(m, dir);
  QueryStore store{&db, nullptr};

  const std::string gold =
      "select max ( patients.age ) from patients where patients.gender = \"f\" and "
      "patients.dob > 2020";
  const std::vector<std::string> preds = {
      "select max ( patients.age ) from patients where patients.gender = \"f\" and "
      "patients.dob > 2020",
      "select max ( patients.age ) from patients where patients.dob > 2020 and "
      "patients.gender = \"f\"",
      "select max ( patients.age ) from patients where patients.dob > 2021 and "
      "patients.gender = \"m\"",
      "select max ( patients.age ) from patients where patients.dob > 2021 and "
      "patients.diagnosis = \"f\"",
  };
  const bool expected[4][3] = {
      {true, true, true}, {false, true, true}, {false, false, true}, {false, false, false}};

  std::vector<PredictionPair> pairs;
  for (const auto& p : preds) pairs.push_back({gold, p});
  EvalReport rep = evaluate_predictions(pairs, QueryLang::sql, store);
  bool pass = rep.n == 4;
  for (std::size_t i = 0; i < 4 && pass; ++i)
    pass = rep.per_pair[i].lf == expected[i][0] && rep.per_pair[i].ex == expected[i][1] &&
           rep.per_pair[i].st == expected[i][2];
  pass = pass && rep.acc_lf == 0.25 && rep.acc_ex == 0.50 && rep.acc_st == 0.75;
  char detail[120];
  std::snprintf(detail, sizeof(detail), "acc_lf %.2f acc_ex %.2f acc_st %.2f", rep.acc_lf,
                rep.acc_ex, rep.acc_st);
  report(2, "metric truth table", pass, detail);
}

// 3. Token arithmetic: +11 split SQL tokens per join, +4 serialized SPARQL
//    tokens per hop, exactly, over a family of join depths 0..5.
void criterion_3() {
  Fixture f = make_fixture(FixtureSchema::nine_table, 5, 42, "c3", false);
  const std::vector<std::string> joins = {
      " inner join admissions on patients.subject_id = admissions.subject_id",
      " inner join diagnoses on admissions.hadm_id = diagnoses.hadm_id",
      " inner join procedures on diagnoses.diag_id = procedures.diag_id",
      " inner join d_icd_procedures on procedures.proc_id = d_icd_procedures.proc_id",
      " inner join d_icd_diagnoses on diagnoses.diag_id = d_icd_diagnoses.diag_id",
  };
  bool pass = true;
  std::size_t sql0 = 0, sparql0 = 0;
  std::string detail;
  for (std::size_t k = 0; k <= joins.size(); ++k) {
    std::string text = "select count ( patients.subject_id ) from patients";
    for (std::size_t j = 0; j < k; ++j) text += joins[j];
    text += " where patients.gender = \"f\"";
    SqlQuery q = parse_sql(text);
    const std::size_t sql_len = serialize_sql(q, Tokenization::split).size();
    const std::size_t sparql_len = serialize_sparql(sql_to_sparql(q, f.graph)).size();
    if (k == 0) {
      sql0 = sql_len;
      sparql0 = sparql_len;
    } else {
      pass = pass && sql_len == sql0 + 11 * k && sparql_len == sparql0 + 4 * k;
    }
    detail += (k ? " " : "") + std::to_string(sql_len) + "/" + std::to_string(sparql_len);
  }
  report(3, "join/hop token arithmetic", pass, "sql/sparql lengths per k: " + detail);
}

// 4. Corpus trend: per-join-bucket mean SPARQL length grows strictly slower
//    than mean SQL length for every k >= 1.
void criterion_4() {
  Fixture f = make_fixture(FixtureSchema::nine_table, 100, 42, "c4", false);
  auto corpus = sample_query_corpus(f.templates, f.db, 1000, 42);
  auto dataset = to_dataset(corpus);
  for (auto& e : dataset)
    e.sparql = join_tokens(serialize_sparql(sql_to_sparql(parse_sql(e.sql), f.graph)));
  CorpusStats stats = corpus_stats(dataset, Tokenization::split);
  bool pass = true;
  std::string detail;
  for (std::size_t k = 1; k <= 5; ++k) {
    if (!stats.by_joins.count(k) || !stats.by_joins.count(k - 1)) {
      pass = false;
      break;
    }
    const auto& prev = stats.by_joins.at(k - 1);
    const auto& cur = stats.by_joins.at(k);
    double d_sql = cur.mean_sql_len - prev.mean_sql_len;
    double d_sparql = *cur.mean_sparql_len - *prev.mean_sparql_len;
    pass = pass && d_sparql < d_sql;
    char buf[48];
    std::snprintf(buf, sizeof(buf), " k=%zu:%+.1f<%+.1f", k, d_sparql, d_sql);
    detail += buf;
  }
  report(4, "sparql grows slower per join bucket", pass, detail.empty() ? "no buckets" : detail);
}

// 5. Renormalization: strictly longer on average over a >=50%-split corpus,
//    and result-preserving across the dual-schema fixtures, 500 queries.
void criterion_5() {
  Fixture nine = make_fixture(FixtureSchema::nine_table, 100, 42, "c5_nine");
  Fixture five = make_fixture(FixtureSchema::five_table, 100, 42, "c5_five", false);
  ColumnMapping mapping = load_mapping(five.dir / "mapping_to_nine.json");
  auto corpus = sample_query_corpus(five.templates, five.db, 500, 7);

  std::size_t split_queries = 0, mismatches = 0;
  double source_tokens = 0, target_tokens = 0;
  for (const auto& pair : corpus) {
    std::set<std::string> target_tables;
    for (const auto& item : pair.sql.select_items)
      target_tables.insert(mapping.entries.at(item.column).table);
    for (const auto& cond : pair.sql.conditions)
      target_tables.insert(mapping.entries.at(cond.column).table);
    if (target_tables.size() > 1) ++split_queries;

    SqlQuery rewritten = renormalize_sql(pair.sql, mapping, nine.graph);
    source_tokens += static_cast<double>(serialize_sql(pair.sql, Tokenization::split).size());
    target_tokens += static_cast<double>(serialize_sql(rewritten, Tokenization::split).size());
    if (!results_equivalent(execute_sql(five.db, pair.sql), execute_sql(nine.db, rewritten)))
      ++mismatches;
  }
  const double mean_before = source_tokens / 500.0, mean_after = target_tokens / 500.0;
  const bool pass =
      split_queries * 2 >= corpus.size() && mean_after > mean_before && mismatches == 0;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "split %zu/500, mean tokens %.2f -> %.2f, mismatches %zu", split_queries,
                mean_before, mean_after, mismatches);
  report(5, "renormalization growth and preservation", pass, detail);
}

// 6. KG construction formula on 20 seeds plus fixed depth; the real-data
//    triple count runs only when a MIMIC-III directory is supplied.
void criterion_6(const char* mimic_dir) {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto dir = testing::temp_dir("acc_c6_" + std::to_string(seed));
    gen_fixture({25, seed, FixtureSchema::nine_table}, dir);
    SchemaManifest m = load_manifest(dir / "manifest.json");
    KnowledgeGraph kg = build_kg(load_database(m, dir));
    KgMetrics metrics = kg_metrics(kg);
    const std::size_t expected = testing::csv_cell_count_oracle(m, dir);
    if (metrics.triple_count != expected || metrics.max_depth != 5) {
      pass = false;
      detail += " seed " + std::to_string(seed) + ": " + std::to_string(metrics.triple_count) +
                " vs " + std::to_string(expected) + " depth " +
                std::to_string(metrics.max_depth);
    }
  }
  if (detail.empty()) detail = "20 seeds, counts exact, depth 5";
  if (mimic_dir) {
    try {
      SchemaManifest m = load_manifest(std::filesystem::path(mimic_dir) / "manifest.json");
      KgMetrics metrics = kg_metrics(build_kg(load_database(m, mimic_dir)));
      pass = pass && metrics.triple_count == 173096 && metrics.max_depth == 5;
      detail += "; mimic: " + std::to_string(metrics.triple_count) + " triples, depth " +
                std::to_string(metrics.max_depth);
    } catch (const Error& e) {
      pass = false;
      detail += std::string("; mimic: ") + e.what();
    }
  } else {
    detail += "; real-data count skipped (no --mimic-dir)";
  }
  report(6, "kg cell-count formula and depth", pass, detail);
}

// 7. Executor vs the nested-loop oracle: 1,000 sampled queries on a <=50-row
//    fixture, zero result mismatches.
void criterion_7() {
  Fixture f = make_fixture(FixtureSchema::nine_table, 3, 1, "c7", false);
  std::size_t max_rows = 0;
  for (const auto& t : f.db.tables) max_rows = std::max(max_rows, t.rows.size());
  auto corpus = sample_query_corpus(f.templates, f.db, 1000, 4);
  std::size_t mismatches = 0;
  for (const auto& pair : corpus)
    if (!results_equivalent(execute_sql(f.db, pair.sql), testing::brute_force_sql(f.db, pair.sql)))
      ++mismatches;
  char detail[120];
  std::snprintf(detail, sizeof(detail), "%zu mismatches over 1000 queries, largest table %zu rows",
                mismatches, max_rows);
  report(7, "sql executor vs brute-force oracle", mismatches == 0 && max_rows <= 50, detail);
}

// 8. Round-trip identity on 10,000 ASTs per language; path search equals the
//    BFS oracle on 1,000 random DAGs.
void criterion_8() {
  std::mt19937_64 rng(4242);
  std::size_t sql_failures = 0, sparql_failures = 0, path_failures = 0;
  for (int i = 0; i < 10000; ++i) {
    SqlQuery q = testing::random_sql_query(rng);
    Tokenization mode = i % 2 ? Tokenization::fused : Tokenization::split;
    if (parse_sql(join_tokens(serialize_sql(q, mode))) != q) ++sql_failures;
  }
  for (int i = 0; i < 10000; ++i) {
    SparqlQuery q = testing::random_sparql_query(rng);
    if (parse_sparql(join_tokens(serialize_sparql(q))) != q) ++sparql_failures;
  }
  for (int i = 0; i < 1000; ++i) {
    SchemaGraph g = testing::random_dag(rng);
    const int n = static_cast<int>(g.nodes.size());
    for (int from = 0; from < n; ++from) {
      for (int to = 0; to < n; ++to) {
        int expected = testing::bfs_distance(g, from, to);
        try {
          RelationPath p = shortest_relation_path(g, from, to);
          if (static_cast<int>(p.hops.size()) != expected) ++path_failures;
        } catch (const Error&) {
          if (expected >= 0) ++path_failures;
        }
      }
    }
  }
  char detail[140];
  std::snprintf(detail, sizeof(detail),
                "sql %zu, sparql %zu round-trip failures; %zu path disagreements", sql_failures,
                sparql_failures, path_failures);
  report(8, "round-trip and path properties",
         sql_failures == 0 && sparql_failures == 0 && path_failures == 0, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const char* mimic_dir = nullptr;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--mimic-dir") == 0) mimic_dir = argv[i + 1];
  try {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6(mimic_dir);
    criterion_7();
    criterion_8();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance aborted: " << e.what() << "\n";
    return 1;
  }
  std::cout << (g_failures ? "acceptance: FAILED\n" : "acceptance: all criteria passed\n");
  return g_failures ? 1 : 0;
}
