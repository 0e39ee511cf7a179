#include <doctest.h>

#include <random>

#include "ehrq/error.hpp"
#include "ehrq/query.hpp"
#include "support.hpp"

using namespace ehrq;

namespace {

const char* kDrugCountQuery =
    "select count ( prescriptions.timestep ) from patients inner join admissions on "
    "patients.subject_id = admissions.subject_id inner join prescriptions on "
    "admissions.hadm_id = prescriptions.hadm_id where prescriptions.drug = \"antihypertensive\"";

}  // namespace

TEST_CASE("parse_sql handles the chained drug-count query") {
  SqlQuery q = parse_sql(kDrugCountQuery);
  CHECK(q.joins.size() == 2);
  CHECK(q.conditions.size() == 1);
  CHECK(q.from_table == "patients");
  REQUIRE(q.select_items.size() == 1);
  CHECK(q.select_items[0].agg == AggFn::count);
  CHECK(q.select_items[0].column == ColumnRef{"prescriptions", "timestep"});
  CHECK(q.conditions[0].value == CellValue{std::string("antihypertensive")});
}

TEST_CASE("parse_sql trivial aggregate") {
  SqlQuery q = parse_sql("select max ( patients.age ) from patients");
  CHECK(q.joins.empty());
  CHECK(q.conditions.empty());
}

TEST_CASE("fused and split spellings parse identically") {
  CHECK(parse_sql("select patients.age from patients") ==
        parse_sql("select patients . age from patients"));
  CHECK(parse_sql("SELECT PATIENTS.AGE FROM PATIENTS") ==
        parse_sql("select patients.age from patients"));
}

TEST_CASE("syntax errors carry a position") {
  try {
    parse_sql("select from patients");
    FAIL("expected SqlSyntaxError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::sql_syntax);
    CHECK(std::string(e.what()).find("position") != std::string::npos);
  }
}

TEST_CASE("unsupported sql features are named") {
  for (const char* text : {
           "select distinct patients.age from patients",
           "select patients.age from patients where patients.age > 1 or patients.age < 0",
           "select patients.age from patients where patients.name like \"a\"",
           "select patients.age from patients group by patients.age",
       }) {
    try {
      parse_sql(text);
      FAIL("expected UnsupportedFeature for: ", text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::unsupported_feature);
    }
  }
}

TEST_CASE("join must link to an earlier table") {
  CHECK_THROWS_AS(
      parse_sql("select a.x from a inner join b on c.x = b.x"),
      Error);
  CHECK_THROWS_AS(
      parse_sql("select a.x from a inner join b on a.x = a.y"),
      Error);
}

TEST_CASE("serialize_sql split mode matches the reference token list") {
  SqlQuery q = parse_sql(
      "select max ( patients.age ) from patients where patients.gender = \"f\" and "
      "patients.dob > 2020");
  TokenStream expected = {"select", "max", "(", "patients", ".", "age",   ")",
                          "from",   "patients", "where", "patients", ".", "gender",
                          "=",      "\"f\"",    "and",   "patients", ".", "dob",
                          ">",      "2020"};
  CHECK(serialize_sql(q, Tokenization::split) == expected);
}

TEST_CASE("one join adds exactly eleven split tokens") {
  SqlQuery base = parse_sql("select patients.name from patients");
  SqlQuery joined = parse_sql(
      "select patients.name from patients inner join admissions on patients.subject_id = "
      "admissions.subject_id");
  CHECK(serialize_sql(joined, Tokenization::split).size() ==
        serialize_sql(base, Tokenization::split).size() + 11);
}

TEST_CASE("no where token without conditions") {
  TokenStream tokens = serialize_sql(parse_sql("select a.b from a"), Tokenization::split);
  for (const auto& t : tokens) CHECK(t != "where");
}

TEST_CASE("sql round-trip on random asts, both tokenizations") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    SqlQuery q = testing::random_sql_query(rng);
    Tokenization mode = i % 2 ? Tokenization::fused : Tokenization::split;
    SqlQuery back = parse_sql(join_tokens(serialize_sql(q, mode)));
    CHECK(back == q);
  }
}

TEST_CASE("split minus fused equals twice the column references") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    SqlQuery q = testing::random_sql_query(rng);
    std::size_t refs = q.select_items.size() + 2 * q.joins.size() + q.conditions.size();
    CHECK(serialize_sql(q, Tokenization::split).size() ==
          serialize_sql(q, Tokenization::fused).size() + 2 * refs);
  }
}

TEST_CASE("parse_sparql handles the intro equivalent") {
  SparqlQuery q = parse_sparql(
      "select ( count ( ?timestep ) as ?agg ) where { ?subject_id </admissions> ?hadm_id. "
      "?hadm_id </prescriptions> ?rx. ?rx </drug> \"antihypertensive\". ?rx </timestep> "
      "?timestep. }");
  CHECK(q.patterns.size() == 4);
  CHECK(q.projection.agg == AggFn::count);
  CHECK(q.filters.empty());
}

TEST_CASE("glued and spaced terminators parse the same") {
  SparqlQuery glued = parse_sparql("select ?name where { ?s </name> ?name. }");
  SparqlQuery spaced = parse_sparql("select ?name where { ?s </name> ?name . }");
  CHECK(glued == spaced);
  // numeric object with glued terminator
  SparqlQuery num = parse_sparql("select ?s where { ?s </dob> 2020. }");
  CHECK(num.patterns[0].object == PatternTerm{CellValue{std::int64_t{2020}}});
}

TEST_CASE("simple sparql round-trips") {
  const std::string text = "select ?name where { ?s </name> ?name . }";
  SparqlQuery q = parse_sparql(text);
  CHECK(join_tokens(serialize_sparql(q)) == text);
}

TEST_CASE("each hop adds four serialized tokens") {
  SparqlQuery one = parse_sparql("select ?a where { ?s </r> ?a . }");
  SparqlQuery two = parse_sparql("select ?a where { ?s </r> ?a . ?a </q> ?b . }");
  CHECK(serialize_sparql(two).size() == serialize_sparql(one).size() + 4);
}

TEST_CASE("unbound projection variable rejected") {
  try {
    parse_sparql("select ?nope where { ?s </name> ?name . }");
    FAIL("expected UnboundProjectionVariable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unbound_projection_variable);
  }
}

TEST_CASE("disconnected pattern variables rejected") {
  CHECK_THROWS_AS(parse_sparql("select ?a where { ?a </r> ?b . ?c </r> ?d . }"), Error);
}

TEST_CASE("sparql round-trip on random asts") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    SparqlQuery q = testing::random_sparql_query(rng);
    SparqlQuery back = parse_sparql(join_tokens(serialize_sparql(q)));
    CHECK(back == q);
  }
}

TEST_CASE("mask_condition_values masks where values only") {
  TokenStream tokens = serialize_sql(
      parse_sql("select max ( patients.age ) from patients where patients.gender = \"f\" and "
                "patients.dob > 2020"),
      Tokenization::split);
  TokenStream masked = mask_condition_values(tokens, QueryLang::sql);
  TokenStream expected = tokens;
  expected[14] = kMaskToken;
  expected[20] = kMaskToken;
  CHECK(masked == expected);
}

TEST_CASE("join on columns are never masked") {
  TokenStream tokens = serialize_sql(
      parse_sql("select a.x from a inner join b on a.k = b.k where b.y = 1"),
      Tokenization::fused);
  TokenStream masked = mask_condition_values(tokens, QueryLang::sql);
  std::size_t mask_count = 0;
  for (const auto& t : masked) mask_count += t == kMaskToken;
  CHECK(mask_count == 1);
  CHECK(masked[masked.size() - 1] == kMaskToken);
}

TEST_CASE("masking is idempotent and preserves token count") {
  TokenStream tokens = serialize_sql(parse_sql(kDrugCountQuery), Tokenization::split);
  TokenStream once = mask_condition_values(tokens, QueryLang::sql);
  CHECK(once.size() == tokens.size());
  CHECK(mask_condition_values(once, QueryLang::sql) == once);

  TokenStream sparql = serialize_sparql(parse_sparql(
      "select ?v where { ?s </a> \"x\" . ?s </b> ?v . filter ( ?v > 3 ) }"));
  TokenStream masked = mask_condition_values(sparql, QueryLang::sparql);
  CHECK(masked.size() == sparql.size());
  CHECK(mask_condition_values(masked, QueryLang::sparql) == masked);
}

TEST_CASE("sparql masking covers pattern objects, ground subjects and filter values") {
  TokenStream tokens = serialize_sparql(parse_sparql(
      "select ?v where { </subject_id/5> </admissions> ?h . ?h </flag> \"ok\" . ?h </n> ?v . "
      "filter ( ?v <= 9 ) }"));
  TokenStream masked = mask_condition_values(tokens, QueryLang::sparql);
  std::size_t mask_count = 0;
  for (const auto& t : masked) mask_count += t == kMaskToken;
  CHECK(mask_count == 3);  // ground subject, literal object, filter value
  for (const auto& t : masked) {
    CHECK(t != "\"ok\"");
    CHECK(t != "9");
    CHECK(t != "</subject_id/5>");
  }
}
