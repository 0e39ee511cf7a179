#include "ehrq/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ehrq/error.hpp"

namespace ehrq {

namespace {

bool numbers_close(double a, double b) {
  const double diff = std::abs(a - b);
  return diff <= 1e-9 || diff <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

// Entity ids surface as text "/key/value" from the graph executor; reduce
// them to the key value so SQL and SPARQL answers compare.
CellValue normalize_result_cell(const CellValue& v) {
  const auto* s = std::get_if<std::string>(&v);
  if (!s || s->size() < 3 || (*s)[0] != '/') return v;
  auto second = s->find('/', 1);
  if (second == std::string::npos || second + 1 >= s->size()) return v;
  const std::string value = s->substr(second + 1);
  try {
    return coerce_cell(value, Datatype::integer);
  } catch (const Error&) {
  }
  try {
    return coerce_cell(value, Datatype::real);
  } catch (const Error&) {
  }
  return value;
}

bool cells_close(const CellValue& a, const CellValue& b) {
  if (is_null(a) || is_null(b)) return is_null(a) && is_null(b);
  if (is_numeric(a) && is_numeric(b)) return numbers_close(as_double(a), as_double(b));
  if (is_text(a) && is_text(b))
    return trim(lowercase(std::get<std::string>(a))) == trim(lowercase(std::get<std::string>(b)));
  return false;
}

}  // namespace

bool results_equivalent(const ResultSet& a, const ResultSet& b) {
  if (a.columns.size() != b.columns.size()) return false;
  if (a.rows.size() != b.rows.size()) return false;

  auto normalized = [](const ResultSet& rs) {
    std::vector<std::vector<CellValue>> rows = rs.rows;
    for (auto& row : rows)
      for (auto& cell : row) cell = normalize_result_cell(cell);
    std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
      for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (cell_less(x[i], y[i])) return true;
        if (cell_less(y[i], x[i])) return false;
      }
      return x.size() < y.size();
    });
    return rows;
  };
  const auto rows_a = normalized(a);
  const auto rows_b = normalized(b);
  for (std::size_t r = 0; r < rows_a.size(); ++r) {
    if (rows_a[r].size() != rows_b[r].size()) return false;
    for (std::size_t c = 0; c < rows_a[r].size(); ++c)
      if (!cells_close(rows_a[r][c], rows_b[r][c])) return false;
  }
  return true;
}

namespace {

TokenStream canonical_tokens(const std::string& text, QueryLang lang) {
  if (lang == QueryLang::sql) return serialize_sql(parse_sql(text), Tokenization::split);
  return serialize_sparql(parse_sparql(text));
}

// Masked canonical form with conjunct order canonicalized: WHERE conditions,
// patterns and filters are conjunctions, so their order carries no structure.
TokenStream structural_key(const std::string& text, QueryLang lang) {
  if (lang == QueryLang::sql) {
    SqlQuery q = parse_sql(text);
    std::vector<TokenStream> conjuncts;
    for (const auto& c : q.conditions)
      conjuncts.push_back(
          {c.column.table, ".", c.column.column, to_string(c.op), kMaskToken});
    std::sort(conjuncts.begin(), conjuncts.end());
    q.conditions.clear();
    TokenStream out = serialize_sql(q, Tokenization::split);
    if (!conjuncts.empty()) {
      out.push_back("where");
      for (std::size_t i = 0; i < conjuncts.size(); ++i) {
        if (i) out.push_back("and");
        out.insert(out.end(), conjuncts[i].begin(), conjuncts[i].end());
      }
    }
    return out;
  }

  SparqlQuery q = parse_sparql(text);
  TokenStream masked = mask_condition_values(serialize_sparql(q), QueryLang::sparql);
  // Re-split into header, pattern/filter groups, and closing brace.
  std::vector<TokenStream> groups;
  std::size_t i = 0;
  TokenStream header;
  while (i < masked.size() && masked[i] != "{") header.push_back(masked[i++]);
  header.push_back(masked[i++]);  // '{'
  while (i < masked.size() && masked[i] != "}") {
    TokenStream group;
    if (masked[i] == "filter") {
      for (int k = 0; k < 6 && i < masked.size(); ++k) group.push_back(masked[i++]);
    } else {
      for (int k = 0; k < 4 && i < masked.size(); ++k) group.push_back(masked[i++]);
    }
    groups.push_back(std::move(group));
  }
  std::sort(groups.begin(), groups.end());
  TokenStream out = std::move(header);
  for (auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  out.push_back("}");
  return out;
}

}  // namespace

bool acc_lf(const std::string& gold, const std::string& pred, QueryLang lang) {
  TokenStream gold_tokens = canonical_tokens(gold, lang);
  try {
    return canonical_tokens(pred, lang) == gold_tokens;
  } catch (const Error&) {
    return false;
  }
}

namespace {

bool acc_ex_noted(const std::string& gold, const std::string& pred, QueryLang lang,
                  const QueryStore& store, std::string* note) {
  ResultSet gold_result;
  if (lang == QueryLang::sql) {
    if (!store.db) fail(ErrorKind::eval, "sql evaluation requires a database");
    gold_result = execute_sql(*store.db, parse_sql(gold));
  } else {
    if (!store.kg) fail(ErrorKind::eval, "sparql evaluation requires a knowledge graph");
    gold_result = execute_sparql(*store.kg, parse_sparql(gold));
  }
  try {
    ResultSet pred_result = lang == QueryLang::sql
                                ? execute_sql(*store.db, parse_sql(pred))
                                : execute_sparql(*store.kg, parse_sparql(pred));
    return results_equivalent(gold_result, pred_result);
  } catch (const Error& e) {
    if (note) *note = e.what();
    return false;
  }
}

}  // namespace

bool acc_ex(const std::string& gold, const std::string& pred, QueryLang lang,
            const QueryStore& store) {
  return acc_ex_noted(gold, pred, lang, store, nullptr);
}

bool acc_st(const std::string& gold, const std::string& pred, QueryLang lang) {
  TokenStream gold_key = structural_key(gold, lang);
  try {
    return structural_key(pred, lang) == gold_key;
  } catch (const Error&) {
    return false;
  }
}

std::vector<PredictionPair> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open predictions '" + path.string() + "'");
  std::vector<PredictionPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      nlohmann::json doc = nlohmann::json::parse(line);
      out.push_back({doc.at("gold").get<std::string>(), doc.at("pred").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::file_format, path.string() + " line " + std::to_string(lineno) + ": " +
                                       e.what());
    }
  }
  return out;
}

EvalReport evaluate_predictions(const std::vector<PredictionPair>& pairs, QueryLang lang,
                                const QueryStore& store) {
  EvalReport report;
  report.n = pairs.size();
  std::size_t lf_hits = 0, ex_hits = 0, st_hits = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EvalReport::PairResult r;
    try {
      r.lf = acc_lf(pairs[i].gold, pairs[i].pred, lang);
      r.ex = acc_ex_noted(pairs[i].gold, pairs[i].pred, lang, store, &r.note);
      r.st = acc_st(pairs[i].gold, pairs[i].pred, lang);
    } catch (const Error& e) {
      // The gold query failed to parse or execute: that breaks the run's
      // preconditions, loudly.
      fail(ErrorKind::eval, "gold query at pair " + std::to_string(i) + ": " + e.what());
    }
    if (!r.note.empty()) report.failures.emplace_back(i, r.note);
    lf_hits += r.lf;
    ex_hits += r.ex;
    st_hits += r.st;
    report.per_pair.push_back(std::move(r));
  }
  if (report.n) {
    report.acc_lf = static_cast<double>(lf_hits) / static_cast<double>(report.n);
    report.acc_ex = static_cast<double>(ex_hits) / static_cast<double>(report.n);
    report.acc_st = static_cast<double>(st_hits) / static_cast<double>(report.n);
  }
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& r : report.per_pair) {
    nlohmann::json p{{"lf", r.lf}, {"ex", r.ex}, {"st", r.st}};
    if (!r.note.empty()) p["note"] = r.note;
    pairs.push_back(std::move(p));
  }
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& [index, note] : report.failures)
    failures.push_back({{"index", index}, {"note", note}});
  return nlohmann::json{{"n", report.n},       {"acc_lf", report.acc_lf},
                        {"acc_ex", report.acc_ex}, {"acc_st", report.acc_st},
                        {"pairs", pairs},      {"failures", failures}};
}

std::vector<DatasetEntry> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open dataset '" + path.string() + "'");
  std::vector<DatasetEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      nlohmann::json doc = nlohmann::json::parse(line);
      DatasetEntry e;
      e.nlq_template = doc.value("nlq_template", std::string{});
      if (doc.contains("nlq_natural") && !doc["nlq_natural"].is_null())
        e.nlq_natural = doc["nlq_natural"].get<std::string>();
      e.sql = doc.at("sql").get<std::string>();
      if (doc.contains("sparql") && !doc["sparql"].is_null())
        e.sparql = doc["sparql"].get<std::string>();
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::file_format, path.string() + " line " + std::to_string(lineno) + ": " +
                                       e.what());
    }
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  for (const auto& e : entries) {
    nlohmann::json doc{{"nlq_template", e.nlq_template},
                       {"nlq_natural", e.nlq_natural ? nlohmann::json(*e.nlq_natural)
                                                     : nlohmann::json()},
                       {"sql", e.sql},
                       {"sparql", e.sparql ? nlohmann::json(*e.sparql) : nlohmann::json()}};
    out << doc.dump() << '\n';
  }
}

EquivalenceReport verify_equivalence(const std::vector<DatasetEntry>& corpus, const Database& db,
                                     const KnowledgeGraph& kg, const SchemaGraph& g) {
  EquivalenceReport report;
  report.n = corpus.size();
  std::size_t matches = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EquivalenceReport::Mismatch mismatch;
    mismatch.index = i;
    mismatch.sql = corpus[i].sql;
    try {
      SqlQuery q = parse_sql(corpus[i].sql);
      SparqlQuery sq =
          corpus[i].sparql ? parse_sparql(*corpus[i].sparql) : sql_to_sparql(q, g);
      mismatch.sparql = join_tokens(serialize_sparql(sq));
      ResultSet sql_result = execute_sql(db, q);
      ResultSet sparql_result = execute_sparql(kg, sq);
      if (results_equivalent(sql_result, sparql_result)) {
        ++matches;
        continue;
      }
      mismatch.sql_result = result_to_csv(sql_result);
      mismatch.sparql_result = result_to_csv(sparql_result);
      mismatch.note = "results differ";
    } catch (const Error& e) {
      mismatch.note = e.what();
    }
    report.mismatches.push_back(std::move(mismatch));
  }
  report.match_rate = report.n ? static_cast<double>(matches) / static_cast<double>(report.n) : 1.0;
  return report;
}

nlohmann::json equivalence_to_json(const EquivalenceReport& report) {
  nlohmann::json mismatches = nlohmann::json::array();
  for (const auto& m : report.mismatches)
    mismatches.push_back({{"index", m.index},
                          {"sql", m.sql},
                          {"sparql", m.sparql},
                          {"sql_result", m.sql_result},
                          {"sparql_result", m.sparql_result},
                          {"note", m.note}});
  return nlohmann::json{
      {"n", report.n}, {"match_rate", report.match_rate}, {"mismatches", mismatches}};
}

namespace {

std::size_t count_joins(const TokenStream& tokens) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
    if (tokens[i] == "inner" && tokens[i + 1] == "join") ++n;
  return n;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  double sum = 0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

CorpusStats corpus_stats(const std::vector<DatasetEntry>& dataset, Tokenization mode,
                         const std::vector<PredictionPair>* predictions, QueryLang pred_lang,
                         const QueryStore* store) {
  if (predictions && predictions->size() != dataset.size())
    fail(ErrorKind::file_format, "predictions and dataset have different lengths");

  CorpusStats stats;
  std::vector<double> sql_lens, sparql_lens, nlq_lens;
  struct BucketAccum {
    std::vector<double> sql, sparql, hops;
    std::size_t lf = 0, ex = 0, st = 0, n_pred = 0;
  };
  std::map<std::size_t, BucketAccum> buckets;

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& entry = dataset[i];
    CorpusStats::Record rec;
    TokenStream sql_tokens;
    try {
      sql_tokens = serialize_sql(parse_sql(entry.sql), mode);
    } catch (const Error& e) {
      fail(ErrorKind::file_format, "dataset entry " + std::to_string(i) + ": " + e.what());
    }
    rec.sql_len = sql_tokens.size();
    rec.n_joins = count_joins(sql_tokens);
    sql_lens.push_back(static_cast<double>(rec.sql_len));
    if (entry.sparql) {
      try {
        SparqlQuery sq = parse_sparql(*entry.sparql);
        rec.sparql_len = serialize_sparql(sq).size();
        rec.n_hops = sq.patterns.size();
      } catch (const Error& e) {
        fail(ErrorKind::file_format, "dataset entry " + std::to_string(i) + ": " + e.what());
      }
      sparql_lens.push_back(static_cast<double>(*rec.sparql_len));
    }
    const std::string& nlq = entry.nlq_natural ? *entry.nlq_natural : entry.nlq_template;
    if (!nlq.empty()) {
      rec.nlq_len = split_line(nlq).size();
      nlq_lens.push_back(static_cast<double>(*rec.nlq_len));
    }

    auto& bucket = buckets[rec.n_joins];
    bucket.sql.push_back(static_cast<double>(rec.sql_len));
    if (rec.sparql_len) bucket.sparql.push_back(static_cast<double>(*rec.sparql_len));
    if (rec.n_hops) bucket.hops.push_back(static_cast<double>(*rec.n_hops));
    if (predictions) {
      const auto& pair = (*predictions)[i];
      ++bucket.n_pred;
      bucket.lf += acc_lf(pair.gold, pair.pred, pred_lang);
      bucket.st += acc_st(pair.gold, pair.pred, pred_lang);
      if (store) bucket.ex += acc_ex(pair.gold, pair.pred, pred_lang, *store);
    }

    stats.sql_hist[rec.sql_len / 5 * 5] += 1;
    if (rec.sparql_len) stats.sparql_hist[*rec.sparql_len / 5 * 5] += 1;
    if (rec.nlq_len) stats.nlq_hist[*rec.nlq_len / 5 * 5] += 1;
    stats.records.push_back(rec);
  }

  stats.mean_sql_len = mean(sql_lens);
  if (!sparql_lens.empty()) stats.mean_sparql_len = mean(sparql_lens);
  if (!nlq_lens.empty()) stats.mean_nlq_len = mean(nlq_lens);
  for (auto& [joins, accum] : buckets) {
    CorpusStats::Bucket b;
    b.n = accum.sql.size();
    b.mean_sql_len = mean(accum.sql);
    if (!accum.sparql.empty()) b.mean_sparql_len = mean(accum.sparql);
    if (!accum.hops.empty()) b.mean_hops = mean(accum.hops);
    if (accum.n_pred) {
      b.acc_lf = static_cast<double>(accum.lf) / static_cast<double>(accum.n_pred);
      b.acc_st = static_cast<double>(accum.st) / static_cast<double>(accum.n_pred);
      if (store) b.acc_ex = static_cast<double>(accum.ex) / static_cast<double>(accum.n_pred);
    }
    stats.by_joins[joins] = b;
  }
  return stats;
}

nlohmann::json stats_to_json(const CorpusStats& stats) {
  nlohmann::json buckets = nlohmann::json::object();
  for (const auto& [joins, b] : stats.by_joins) {
    nlohmann::json jb{{"n", b.n}, {"mean_sql_len", b.mean_sql_len}};
    if (b.mean_sparql_len) jb["mean_sparql_len"] = *b.mean_sparql_len;
    if (b.mean_hops) jb["mean_hops"] = *b.mean_hops;
    if (b.acc_lf) jb["acc_lf"] = *b.acc_lf;
    if (b.acc_ex) jb["acc_ex"] = *b.acc_ex;
    if (b.acc_st) jb["acc_st"] = *b.acc_st;
    buckets[std::to_string(joins)] = std::move(jb);
  }
  nlohmann::json out{{"n", stats.records.size()},
                     {"mean_sql_len", stats.mean_sql_len},
                     {"by_joins", buckets}};
  if (stats.mean_sparql_len) out["mean_sparql_len"] = *stats.mean_sparql_len;
  if (stats.mean_nlq_len) out["mean_nlq_len"] = *stats.mean_nlq_len;
  return out;
}

std::string stats_to_csv(const CorpusStats& stats) {
  std::string out = "sql_len,sparql_len,nlq_len,n_joins,n_hops\n";
  for (const auto& r : stats.records) {
    out += std::to_string(r.sql_len);
    out += ',';
    out += r.sparql_len ? std::to_string(*r.sparql_len) : "";
    out += ',';
    out += r.nlq_len ? std::to_string(*r.nlq_len) : "";
    out += ',';
    out += std::to_string(r.n_joins);
    out += ',';
    out += r.n_hops ? std::to_string(*r.n_hops) : "";
    out += '\n';
  }
  return out;
}

std::string histogram_data(const std::map<std::size_t, std::size_t>& hist) {
  std::string out = "# bin_low count\n";
  if (hist.empty()) return out;
  const std::size_t max_bin = hist.rbegin()->first;
  for (std::size_t bin = 0; bin <= max_bin; bin += 5) {
    auto it = hist.find(bin);
    out += std::to_string(bin) + " " + std::to_string(it == hist.end() ? 0 : it->second) + "\n";
  }
  return out;
}

}  // namespace ehrq
