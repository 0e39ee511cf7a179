#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehrq/database.hpp"
#include "ehrq/kg.hpp"
#include "ehrq/query.hpp"
#include "ehrq/transpile.hpp"

namespace ehrq {

/// Multiset equality of result rows: same arity, text compared exactly
/// (already lowercased/trimmed), numerics within relative 1e-9 (absolute
/// 1e-9 near zero), and entity ids ("/subject_id/12") normalized to their
/// key value so both executors agree.
bool results_equivalent(const ResultSet& a, const ResultSet& b);

struct QueryStore {
  const Database* db = nullptr;
  const KnowledgeGraph* kg = nullptr;
};

/// Token-exact match of the canonical serializations. The gold query must
/// parse; an unparseable prediction is false.
bool acc_lf(const std::string& gold, const std::string& pred, QueryLang lang);

/// Answer match under results_equivalent. The gold query must execute; a
/// prediction that fails to parse or execute is false.
bool acc_ex(const std::string& gold, const std::string& pred, QueryLang lang,
            const QueryStore& store);

/// Structure-only match: condition values masked and conjunct order
/// canonicalized (WHERE conditions in SQL, patterns and filters in SPARQL are
/// an unordered conjunction), so reordered conditions with different values
/// still match.
bool acc_st(const std::string& gold, const std::string& pred, QueryLang lang);

struct PredictionPair {
  std::string gold;
  std::string pred;
};

std::vector<PredictionPair> load_predictions(const std::filesystem::path& path);

struct EvalReport {
  std::size_t n = 0;
  double acc_lf = 0, acc_ex = 0, acc_st = 0;
  struct PairResult {
    bool lf = false, ex = false, st = false;
    std::string note;  // empty when clean
  };
  std::vector<PairResult> per_pair;
  std::vector<std::pair<std::size_t, std::string>> failures;
};

EvalReport evaluate_predictions(const std::vector<PredictionPair>& pairs, QueryLang lang,
                                const QueryStore& store);
nlohmann::json report_to_json(const EvalReport& report);

struct DatasetEntry {
  std::string nlq_template;
  std::optional<std::string> nlq_natural;
  std::string sql;
  std::optional<std::string> sparql;
};

std::vector<DatasetEntry> load_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const std::vector<DatasetEntry>& entries);

struct EquivalenceReport {
  std::size_t n = 0;
  double match_rate = 0;
  struct Mismatch {
    std::size_t index = 0;
    std::string sql, sparql;
    std::string sql_result, sparql_result;
    std::string note;
  };
  std::vector<Mismatch> mismatches;
};

/// Differential check: execute_sql(db, q) vs execute_sparql(kg, t(q)) for
/// every corpus entry. Entries that already carry a sparql form use it as-is;
/// otherwise the query is transpiled. Failures become report content.
EquivalenceReport verify_equivalence(const std::vector<DatasetEntry>& corpus, const Database& db,
                                     const KnowledgeGraph& kg, const SchemaGraph& g);
nlohmann::json equivalence_to_json(const EquivalenceReport& report);

struct CorpusStats {
  struct Record {
    std::size_t sql_len = 0;
    std::optional<std::size_t> sparql_len;
    std::optional<std::size_t> nlq_len;
    std::size_t n_joins = 0;  // adjacent (inner, join) token pairs
    std::optional<std::size_t> n_hops;  // SPARQL pattern count
  };
  std::vector<Record> records;
  double mean_sql_len = 0;
  std::optional<double> mean_sparql_len;
  std::optional<double> mean_nlq_len;
  std::map<std::size_t, std::size_t> sql_hist;     // bin low -> count, width 5
  std::map<std::size_t, std::size_t> sparql_hist;
  std::map<std::size_t, std::size_t> nlq_hist;
  struct Bucket {
    std::size_t n = 0;
    double mean_sql_len = 0;
    std::optional<double> mean_sparql_len;
    std::optional<double> mean_hops;
    std::optional<double> acc_lf, acc_ex, acc_st;  // when predictions supplied
  };
  std::map<std::size_t, Bucket> by_joins;
};

CorpusStats corpus_stats(const std::vector<DatasetEntry>& dataset, Tokenization mode,
                         const std::vector<PredictionPair>* predictions = nullptr,
                         QueryLang pred_lang = QueryLang::sql,
                         const QueryStore* store = nullptr);
nlohmann::json stats_to_json(const CorpusStats& stats);
std::string stats_to_csv(const CorpusStats& stats);
std::string histogram_data(const std::map<std::size_t, std::size_t>& hist);

}  // namespace ehrq
