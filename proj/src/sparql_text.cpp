#include <charconv>
#include <map>
#include <set>

#include "ehrq/error.hpp"
#include "ehrq/query.hpp"

namespace ehrq {
namespace sparql {
namespace {

struct Token {
  enum class Kind { word, number, string, variable, angle, punct, end };
  Kind kind = Kind::end;
  std::string text;  // variables without '?', angles without '<>'
  CellValue number;
  std::size_t pos = 0;
};

[[noreturn]] void syntax_error(const Token& t, const std::string& expected) {
  fail(ErrorKind::sparql_syntax,
       "expected " + expected + " at position " + std::to_string(t.pos) +
           (t.kind == Token::Kind::end ? " (end of input)" : " near '" + t.text + "'"));
}

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_ident = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (c == '?') {
      std::size_t end = i + 1;
      while (end < text.size() && is_ident(text[end])) ++end;
      if (end == i + 1) fail(ErrorKind::sparql_syntax, "empty variable name");
      t.kind = Token::Kind::variable;
      t.text = lowercase(text.substr(i + 1, end - i - 1));
      i = end;
    } else if (c == '<') {
      if (i + 1 < text.size() && text[i + 1] == '/') {
        std::size_t end = text.find('>', i);
        if (end == std::string_view::npos)
          fail(ErrorKind::sparql_syntax, "unterminated '<' at position " + std::to_string(i));
        t.kind = Token::Kind::angle;
        t.text = lowercase(text.substr(i + 1, end - i - 1));
        i = end + 1;
      } else if (i + 1 < text.size() && text[i + 1] == '=') {
        t.kind = Token::Kind::punct;
        t.text = "<=";
        i += 2;
      } else {
        t.kind = Token::Kind::punct;
        t.text = "<";
        ++i;
      }
    } else if (c == '>') {
      t.kind = Token::Kind::punct;
      if (i + 1 < text.size() && text[i + 1] == '=') {
        t.text = ">=";
        i += 2;
      } else {
        t.text = ">";
        ++i;
      }
    } else if (c == '"') {
      std::size_t end = text.find('"', i + 1);
      if (end == std::string_view::npos)
        fail(ErrorKind::sparql_syntax, "unterminated string at position " + std::to_string(i));
      t.kind = Token::Kind::string;
      t.text = lowercase(text.substr(i + 1, end - i - 1));
      i = end + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < text.size() &&
                std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      // A '.' is part of the number only when a digit follows, so a glued
      // terminator ("2020.") lexes as number + '.'.
      std::size_t end = i + 1;
      bool is_float = false;
      while (end < text.size()) {
        if (std::isdigit(static_cast<unsigned char>(text[end]))) {
          ++end;
        } else if (text[end] == '.' && end + 1 < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[end + 1]))) {
          is_float = true;
          end += 2;
        } else {
          break;
        }
      }
      t.kind = Token::Kind::number;
      t.text = std::string(text.substr(i, end - i));
      if (is_float) {
        double v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        t.number = v;
      } else {
        std::int64_t v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        t.number = v;
      }
      i = end;
    } else if (is_ident(c)) {
      std::size_t end = i;
      while (end < text.size() && is_ident(text[end])) ++end;
      t.kind = Token::Kind::word;
      t.text = lowercase(text.substr(i, end - i));
      i = end;
    } else if (c == '{' || c == '}' || c == '(' || c == ')' || c == '.' || c == '=') {
      t.kind = Token::Kind::punct;
      t.text = std::string(1, c);
      ++i;
    } else {
      fail(ErrorKind::sparql_syntax, "unexpected character '" + std::string(1, c) +
                                         "' at position " + std::to_string(i));
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{});
  return out;
}

bool is_predicate(const std::string& angle) {
  // "/name": a single path segment. Entity refs carry a second slash.
  return angle.size() > 1 && angle[0] == '/' && angle.find('/', 1) == std::string::npos;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  SparqlQuery parse() {
    SparqlQuery q;
    expect_word("select");
    if (cur().kind == Token::Kind::punct && cur().text == "(") {
      next();
      q.projection.agg = agg();
      expect_punct("(");
      if (peek_word("distinct"))
        fail(ErrorKind::unsupported_feature, "'distinct' is not supported");
      q.projection.vars.push_back(variable());
      expect_punct(")");
      expect_word("as");
      variable();  // output name, canonically ?agg
      expect_punct(")");
    } else {
      while (cur().kind == Token::Kind::variable) q.projection.vars.push_back(variable());
      if (q.projection.vars.empty()) syntax_error(cur(), "projection variable");
    }
    expect_word("where");
    expect_punct("{");
    while (cur().kind == Token::Kind::variable || cur().kind == Token::Kind::angle)
      q.patterns.push_back(pattern());
    while (peek_word("filter")) {
      next();
      expect_punct("(");
      SparqlFilter f;
      f.var = variable();
      f.op = cmp_op();
      f.value = term("filter value");
      if (std::holds_alternative<Variable>(f.value))
        syntax_error(cur(), "filter value");
      expect_punct(")");
      q.filters.push_back(std::move(f));
    }
    expect_punct("}");
    if (cur().kind != Token::Kind::end) syntax_error(cur(), "end of query");
    validate(q);
    return q;
  }

 private:
  static void validate(const SparqlQuery& q) {
    std::set<std::string> pattern_vars;
    for (const auto& p : q.patterns) {
      if (const auto* v = std::get_if<Variable>(&p.subject)) pattern_vars.insert(v->name);
      if (const auto* v = std::get_if<Variable>(&p.object)) pattern_vars.insert(v->name);
    }
    for (const auto& v : q.projection.vars)
      if (!pattern_vars.count(v.name))
        fail(ErrorKind::unbound_projection_variable,
             "?" + v.name + " does not appear in any pattern");
    for (const auto& f : q.filters)
      if (!pattern_vars.count(f.var.name))
        fail(ErrorKind::sparql_syntax, "filter variable ?" + f.var.name +
                                           " does not appear in any pattern");
    // Pattern variables must form one connected component.
    std::map<std::string, std::string> parent;
    auto find = [&](auto&& self, const std::string& x) -> std::string {
      auto it = parent.find(x);
      if (it == parent.end() || it->second == x) return x;
      return it->second = self(self, it->second);
    };
    for (const auto& p : q.patterns) {
      const auto* s = std::get_if<Variable>(&p.subject);
      const auto* o = std::get_if<Variable>(&p.object);
      if (s && o) parent[find(find, s->name)] = find(find, o->name);
    }
    std::set<std::string> roots;
    for (const auto& v : pattern_vars) roots.insert(find(find, v));
    if (roots.size() > 1)
      fail(ErrorKind::sparql_syntax, "pattern variables are not connected");
  }

  const Token& cur() const { return tokens_[index_]; }
  void next() { ++index_; }
  bool peek_word(std::string_view w) const {
    return cur().kind == Token::Kind::word && cur().text == w;
  }
  void expect_word(std::string_view w) {
    if (!peek_word(w)) syntax_error(cur(), "'" + std::string(w) + "'");
    next();
  }
  void expect_punct(std::string_view p) {
    if (cur().kind != Token::Kind::punct || cur().text != p)
      syntax_error(cur(), "'" + std::string(p) + "'");
    next();
  }

  AggFn agg() {
    if (cur().kind == Token::Kind::word) {
      if (cur().text == "count") return next(), AggFn::count;
      if (cur().text == "max") return next(), AggFn::max;
      if (cur().text == "min") return next(), AggFn::min;
      if (cur().text == "avg") return next(), AggFn::avg;
    }
    syntax_error(cur(), "aggregate function");
  }

  Variable variable() {
    if (cur().kind != Token::Kind::variable) syntax_error(cur(), "variable");
    Variable v{cur().text};
    next();
    return v;
  }

  CmpOp cmp_op() {
    if (cur().kind != Token::Kind::punct) syntax_error(cur(), "comparison operator");
    const std::string op = cur().text;
    next();
    if (op == "=") return CmpOp::eq;
    if (op == "<") return CmpOp::lt;
    if (op == ">") return CmpOp::gt;
    if (op == "<=") return CmpOp::le;
    if (op == ">=") return CmpOp::ge;
    fail(ErrorKind::sparql_syntax, "bad comparison operator '" + op + "'");
  }

  PatternTerm term(const std::string& what) {
    if (cur().kind == Token::Kind::variable) {
      PatternTerm t = Variable{cur().text};
      next();
      return t;
    }
    if (cur().kind == Token::Kind::angle) {
      if (is_predicate(cur().text))
        fail(ErrorKind::sparql_syntax, "'" + cur().text + "' is not an entity reference");
      PatternTerm t = EntityRef{cur().text};
      next();
      return t;
    }
    if (cur().kind == Token::Kind::string) {
      PatternTerm t = CellValue{cur().text};
      next();
      return t;
    }
    if (cur().kind == Token::Kind::number) {
      PatternTerm t = cur().number;
      next();
      return t;
    }
    syntax_error(cur(), what);
  }

  TriplePattern pattern() {
    TriplePattern p;
    p.subject = term("pattern subject");
    if (std::holds_alternative<CellValue>(p.subject))
      fail(ErrorKind::sparql_syntax, "pattern subject must be a variable or entity");
    if (cur().kind != Token::Kind::angle || !is_predicate(cur().text))
      syntax_error(cur(), "predicate");
    p.predicate = cur().text;
    next();
    p.object = term("pattern object");
    expect_punct(".");
    return p;
  }

  std::vector<Token> tokens_;
  std::size_t index_ = 0;
};

std::string term_token(const PatternTerm& t) {
  if (const auto* v = std::get_if<Variable>(&t)) return "?" + v->name;
  if (const auto* e = std::get_if<EntityRef>(&t)) {
    // entity references must stay single whitespace-tokenizable tokens
    if (e->id.find_first_of(" \t\n>") != std::string::npos)
      fail(ErrorKind::sparql_syntax, "entity id '" + e->id + "' is not a single token");
    return "<" + e->id + ">";
  }
  return value_token(std::get<CellValue>(t));
}

}  // namespace
}  // namespace sparql

SparqlQuery parse_sparql(std::string_view text) { return sparql::Parser(text).parse(); }

TokenStream serialize_sparql(const SparqlQuery& q) {
  TokenStream out;
  out.push_back("select");
  if (q.projection.agg) {
    out.push_back("(");
    out.push_back(to_string(*q.projection.agg));
    out.push_back("(");
    out.push_back("?" + q.projection.vars.at(0).name);
    out.push_back(")");
    out.push_back("as");
    out.push_back("?agg");
    out.push_back(")");
  } else {
    for (const auto& v : q.projection.vars) out.push_back("?" + v.name);
  }
  out.push_back("where");
  out.push_back("{");
  for (const auto& p : q.patterns) {
    out.push_back(sparql::term_token(p.subject));
    out.push_back("<" + p.predicate + ">");
    out.push_back(sparql::term_token(p.object));
    out.push_back(".");
  }
  for (const auto& f : q.filters) {
    out.push_back("filter");
    out.push_back("(");
    out.push_back("?" + f.var.name);
    out.push_back(to_string(f.op));
    out.push_back(sparql::term_token(f.value));
    out.push_back(")");
  }
  out.push_back("}");
  return out;
}

namespace {

bool is_variable_token(const std::string& t) { return !t.empty() && t[0] == '?'; }

// A glued terminator ("?x." / "\"f\".") counts as part of the previous token.
bool has_glued_dot(const std::string& t) {
  return t.size() > 1 && t.back() == '.' && t != "<=" && !is_variable_token(t.substr(0, 1));
}

}  // namespace

TokenStream mask_condition_values(const TokenStream& tokens, QueryLang lang) {
  // Precondition: the stream parses. Already-masked streams are passed
  // through the (idempotent) scan without re-validation.
  bool already_masked = false;
  for (const auto& t : tokens)
    if (t.find(kMaskToken) != std::string::npos) already_masked = true;
  const std::string line = join_tokens(tokens);
  if (lang == QueryLang::sql) {
    if (!already_masked) parse_sql(line);
    TokenStream out = tokens;
    // After WHERE the grammar is <col> <op> <value> (and ...)*, in either
    // tokenization, so values are exactly the tokens after an operator.
    std::size_t where = out.size();
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i] == "where") {
        where = i;
        break;
      }
    static const std::set<std::string> ops = {"=", "<", ">", "<=", ">="};
    for (std::size_t i = where; i + 1 < out.size(); ++i)
      if (ops.count(out[i])) out[i + 1] = kMaskToken;
    return out;
  }

  if (!already_masked) parse_sparql(line);
  TokenStream out = tokens;
  std::size_t i = 0;
  while (i < out.size() && out[i] != "{") ++i;
  ++i;
  while (i < out.size() && out[i] != "}") {
    if (out[i] == "filter") {
      // filter ( ?v op val )
      if (i + 4 < out.size() && !is_variable_token(out[i + 4])) out[i + 4] = kMaskToken;
      i += 6;
    } else {
      // subject predicate object [.]
      if (!is_variable_token(out[i])) out[i] = kMaskToken;
      std::size_t obj = i + 2;
      if (obj < out.size()) {
        std::string& o = out[obj];
        if (has_glued_dot(o) && o[0] != '?') {
          o = std::string(kMaskToken) + ".";
        } else if (!is_variable_token(o) && !(o.size() > 1 && o[0] == '?')) {
          if (o != ".") o = kMaskToken;
        }
      }
      // advance over 3 tokens plus a standalone terminator when present
      i += 3;
      if (i < out.size() && out[i] == ".") ++i;
    }
  }
  return out;
}

}  // namespace ehrq
