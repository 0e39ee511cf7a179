#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ehrq/database.hpp"
#include "ehrq/error.hpp"
#include "ehrq/eval.hpp"
#include "ehrq/fixture.hpp"
#include "ehrq/kg.hpp"
#include "ehrq/query.hpp"
#include "ehrq/schema.hpp"
#include "ehrq/transpile.hpp"

namespace {

using namespace ehrq;

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  out << content;
}

Tokenization parse_mode(const std::string& s) {
  if (s == "fused") return Tokenization::fused;
  if (s == "split") return Tokenization::split;
  fail(ErrorKind::parse, "tokenization must be 'fused' or 'split'");
}

struct LoadedStore {
  SchemaManifest manifest;
  SchemaGraph graph;
  Database db;
  KnowledgeGraph kg;
};

LoadedStore load_store(const std::string& manifest_path, const std::string& data_dir,
                       bool with_kg) {
  LoadedStore s;
  s.manifest = load_manifest(manifest_path);
  s.graph = build_schema_graph(s.manifest);
  s.db = load_database(s.manifest, data_dir);
  if (with_kg) s.kg = build_kg(s.db);
  return s;
}

int run(int argc, char** argv) {
  CLI::App app{"ehrq: compile an EHR-style relational database into a knowledge graph, "
               "transpile a SQL subset to SPARQL, execute both, and score predictions"};
  app.require_subcommand(1);

  // gen-fixture
  auto* gen = app.add_subcommand("gen-fixture", "generate a seeded synthetic fixture");
  int n_patients = 100;
  std::uint64_t seed = 42;
  std::string schema_name = "nine_table", out_dir;
  gen->add_option("--patients", n_patients, "number of patients")->capture_default_str();
  gen->add_option("--seed", seed, "rng seed")->capture_default_str();
  gen->add_option("--schema", schema_name, "five_table or nine_table")->capture_default_str();
  gen->add_option("--out", out_dir, "output directory")->required();
  gen->callback([&] {
    FixtureSpec spec;
    spec.n_patients = n_patients;
    spec.seed = seed;
    if (schema_name == "five_table") spec.schema = FixtureSchema::five_table;
    else if (schema_name == "nine_table") spec.schema = FixtureSchema::nine_table;
    else fail(ErrorKind::parse, "--schema must be five_table or nine_table");
    gen_fixture(spec, out_dir);
  });

  // build-kg
  auto* build = app.add_subcommand("build-kg", "compile the database into triples");
  std::string manifest_path, data_dir, triples_out;
  build->add_option("--manifest", manifest_path, "manifest json")->required();
  build->add_option("--data", data_dir, "directory with <table>.csv files")->required();
  build->add_option("--out", triples_out, "write the triple dump (tsv) here");
  build->callback([&] {
    LoadedStore s = load_store(manifest_path, data_dir, true);
    if (!triples_out.empty()) write_text(triples_out, dump_triples(s.kg));
    KgMetrics m = kg_metrics(s.kg);
    std::cout << nlohmann::json{{"triples", m.triple_count}, {"max_depth", m.max_depth}}.dump()
              << "\n";
  });

  // transpile
  auto* trans = app.add_subcommand("transpile", "translate SQL to SPARQL");
  std::string sql_text, corpus_path, corpus_out;
  trans->add_option("--manifest", manifest_path, "manifest json")->required();
  trans->add_option("--sql", sql_text, "a single query");
  trans->add_option("--corpus", corpus_path, "dataset jsonl; fills the sparql field");
  trans->add_option("--out", corpus_out, "output jsonl for --corpus");
  trans->callback([&] {
    SchemaGraph g = build_schema_graph(load_manifest(manifest_path));
    if (!sql_text.empty()) {
      std::cout << join_tokens(serialize_sparql(sql_to_sparql(parse_sql(sql_text), g))) << "\n";
      return;
    }
    if (corpus_path.empty() || corpus_out.empty())
      fail(ErrorKind::parse, "provide --sql, or --corpus with --out");
    auto entries = load_dataset(corpus_path);
    for (auto& e : entries)
      e.sparql = join_tokens(serialize_sparql(sql_to_sparql(parse_sql(e.sql), g)));
    write_dataset(corpus_out, entries);
  });

  // renormalize
  auto* renorm = app.add_subcommand("renormalize", "rewrite queries onto the target schema");
  std::string mapping_path, target_manifest;
  renorm->add_option("--mapping", mapping_path, "column mapping json")->required();
  renorm->add_option("--target-manifest", target_manifest, "target manifest json")->required();
  renorm->add_option("--sql", sql_text, "a single query");
  renorm->add_option("--corpus", corpus_path, "dataset jsonl; rewrites the sql field");
  renorm->add_option("--out", corpus_out, "output jsonl for --corpus");
  std::string renorm_mode = "split";
  renorm->add_option("--tokenization", renorm_mode, "fused or split")->capture_default_str();
  renorm->callback([&] {
    ColumnMapping mapping = load_mapping(mapping_path);
    SchemaGraph target = build_schema_graph(load_manifest(target_manifest));
    Tokenization mode = parse_mode(renorm_mode);
    if (!sql_text.empty()) {
      std::cout << join_tokens(serialize_sql(renormalize_sql(parse_sql(sql_text), mapping, target),
                                             mode))
                << "\n";
      return;
    }
    if (corpus_path.empty() || corpus_out.empty())
      fail(ErrorKind::parse, "provide --sql, or --corpus with --out");
    auto entries = load_dataset(corpus_path);
    for (auto& e : entries) {
      e.sql = join_tokens(serialize_sql(renormalize_sql(parse_sql(e.sql), mapping, target), mode));
      e.sparql.reset();
    }
    write_dataset(corpus_out, entries);
  });

  // sample-corpus
  auto* sample = app.add_subcommand("sample-corpus", "instantiate query templates");
  std::string templates_path, dataset_out;
  std::size_t corpus_n = 1000;
  sample->add_option("--manifest", manifest_path, "manifest json")->required();
  sample->add_option("--data", data_dir, "directory with <table>.csv files")->required();
  sample->add_option("--templates", templates_path, "templates json")->required();
  sample->add_option("-n,--count", corpus_n, "number of pairs")->capture_default_str();
  sample->add_option("--seed", seed, "rng seed")->capture_default_str();
  sample->add_option("--out", dataset_out, "output dataset jsonl")->required();
  sample->callback([&] {
    LoadedStore s = load_store(manifest_path, data_dir, false);
    auto pairs = sample_query_corpus(load_templates(templates_path), s.db, corpus_n, seed);
    std::vector<DatasetEntry> entries;
    entries.reserve(pairs.size());
    for (const auto& p : pairs)
      entries.push_back({p.nlq, std::nullopt, p.sql_text, std::nullopt});
    write_dataset(dataset_out, entries);
  });

  // run-sql / run-sparql
  auto* runsql = app.add_subcommand("run-sql", "execute a SQL query, print csv");
  runsql->add_option("--manifest", manifest_path, "manifest json")->required();
  runsql->add_option("--data", data_dir, "directory with <table>.csv files")->required();
  runsql->add_option("--sql", sql_text, "query text")->required();
  runsql->callback([&] {
    LoadedStore s = load_store(manifest_path, data_dir, false);
    std::cout << result_to_csv(execute_sql(s.db, parse_sql(sql_text)));
  });

  auto* runsparql = app.add_subcommand("run-sparql", "execute a SPARQL query, print csv");
  std::string sparql_text;
  runsparql->add_option("--manifest", manifest_path, "manifest json")->required();
  runsparql->add_option("--data", data_dir, "directory with <table>.csv files")->required();
  runsparql->add_option("--sparql", sparql_text, "query text")->required();
  runsparql->callback([&] {
    LoadedStore s = load_store(manifest_path, data_dir, true);
    std::cout << result_to_csv(execute_sparql(s.kg, parse_sparql(sparql_text)));
  });

  // verify-equivalence
  auto* verify = app.add_subcommand("verify-equivalence",
                                    "differentially execute a corpus over both stores");
  std::string report_out;
  verify->add_option("--manifest", manifest_path, "manifest json")->required();
  verify->add_option("--data", data_dir, "directory with <table>.csv files")->required();
  verify->add_option("--corpus", corpus_path, "dataset jsonl")->required();
  verify->add_option("--report", report_out, "write the full report json here");
  int exit_code = 0;
  verify->callback([&] {
    LoadedStore s = load_store(manifest_path, data_dir, true);
    auto corpus = load_dataset(corpus_path);
    EquivalenceReport report = verify_equivalence(corpus, s.db, s.kg, s.graph);
    char line[64];
    std::snprintf(line, sizeof(line), "match_rate %.3f\n", report.match_rate);
    std::cout << line;
    for (const auto& m : report.mismatches)
      std::cerr << "mismatch at index " << m.index << ": " << m.note << "\n";
    if (!report_out.empty()) write_text(report_out, equivalence_to_json(report).dump(2) + "\n");
    if (report.match_rate < 1.0) exit_code = 1;
  });

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score predictions with the three accuracies");
  std::string pred_path, lang_name = "sql";
  eval->add_option("--pred", pred_path, "predictions jsonl with gold/pred lines")->required();
  eval->add_option("--lang", lang_name, "sql or sparql")->capture_default_str();
  eval->add_option("--manifest", manifest_path, "manifest json")->required();
  eval->add_option("--data", data_dir, "directory with <table>.csv files")->required();
  eval->add_option("--out", report_out, "also write the report json here");
  eval->callback([&] {
    QueryLang lang;
    if (lang_name == "sql") lang = QueryLang::sql;
    else if (lang_name == "sparql") lang = QueryLang::sparql;
    else fail(ErrorKind::parse, "--lang must be sql or sparql");
    LoadedStore s = load_store(manifest_path, data_dir, lang == QueryLang::sparql);
    QueryStore store{&s.db, lang == QueryLang::sparql ? &s.kg : nullptr};
    EvalReport report = evaluate_predictions(load_predictions(pred_path), lang, store);
    std::string json = report_to_json(report).dump(2) + "\n";
    std::cout << json;
    if (!report_out.empty()) write_text(report_out, json);
  });

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "corpus length/join statistics");
  std::string stats_out_dir, stats_mode = "split", pred_lang_name = "sql";
  stats_cmd->add_option("--dataset", corpus_path, "dataset jsonl")->required();
  stats_cmd->add_option("--out", stats_out_dir, "output directory")->required();
  stats_cmd->add_option("--tokenization", stats_mode, "fused or split")->capture_default_str();
  stats_cmd->add_option("--pred", pred_path, "optional aligned predictions jsonl");
  stats_cmd->add_option("--pred-lang", pred_lang_name, "sql or sparql")->capture_default_str();
  stats_cmd->add_option("--manifest", manifest_path, "manifest json (enables acc_ex per bucket)");
  stats_cmd->add_option("--data", data_dir, "data directory (enables acc_ex per bucket)");
  stats_cmd->callback([&] {
    auto dataset = load_dataset(corpus_path);
    std::optional<std::vector<PredictionPair>> preds;
    if (!pred_path.empty()) preds = load_predictions(pred_path);
    QueryLang pred_lang = pred_lang_name == "sparql" ? QueryLang::sparql : QueryLang::sql;
    std::optional<LoadedStore> s;
    QueryStore store;
    if (!manifest_path.empty() && !data_dir.empty()) {
      s = load_store(manifest_path, data_dir, pred_lang == QueryLang::sparql);
      store.db = &s->db;
      if (pred_lang == QueryLang::sparql) store.kg = &s->kg;
    }
    CorpusStats stats = corpus_stats(dataset, parse_mode(stats_mode),
                                     preds ? &*preds : nullptr, pred_lang,
                                     s ? &store : nullptr);
    std::filesystem::create_directories(stats_out_dir);
    write_text(std::filesystem::path(stats_out_dir) / "per_query.csv", stats_to_csv(stats));
    write_text(std::filesystem::path(stats_out_dir) / "aggregates.json",
               stats_to_json(stats).dump(2) + "\n");
    write_text(std::filesystem::path(stats_out_dir) / "hist_sql.dat",
               histogram_data(stats.sql_hist));
    write_text(std::filesystem::path(stats_out_dir) / "hist_sparql.dat",
               histogram_data(stats.sparql_hist));
    write_text(std::filesystem::path(stats_out_dir) / "hist_nlq.dat",
               histogram_data(stats.nlq_hist));
    std::cout << stats_to_json(stats).dump(2) << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ehrq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
