#include <cctype>
#include <charconv>
#include <set>

#include "ehrq/error.hpp"
#include "ehrq/query.hpp"

namespace ehrq {

const char* to_string(AggFn fn) {
  switch (fn) {
    case AggFn::count: return "count";
    case AggFn::max: return "max";
    case AggFn::min: return "min";
    case AggFn::avg: return "avg";
  }
  return "?";
}

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::eq: return "=";
    case CmpOp::lt: return "<";
    case CmpOp::gt: return ">";
    case CmpOp::le: return "<=";
    case CmpOp::ge: return ">=";
  }
  return "?";
}

std::string join_tokens(const TokenStream& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

TokenStream split_line(std::string_view line) {
  TokenStream out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '"') {  // quoted literal, keeps internal spaces
      std::size_t end = line.find('"', i + 1);
      if (end == std::string_view::npos) end = line.size() - 1;
      out.emplace_back(line.substr(i, end - i + 1));
      i = end + 1;
    } else {
      std::size_t end = i;
      while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
      out.emplace_back(line.substr(i, end - i));
      i = end;
    }
  }
  return out;
}

namespace sql {
namespace {

struct Token {
  enum class Kind { word, number, string, punct, end };
  Kind kind = Kind::end;
  std::string text;    // lowercased; strings without quotes
  CellValue number;    // Kind::number only
  std::size_t pos = 0;
};

[[noreturn]] void syntax_error(const Token& t, const std::string& expected) {
  fail(ErrorKind::sql_syntax,
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
    if (c == '"') {
      std::size_t end = text.find('"', i + 1);
      if (end == std::string_view::npos)
        fail(ErrorKind::sql_syntax, "unterminated string at position " + std::to_string(i));
      t.kind = Token::Kind::string;
      t.text = lowercase(text.substr(i + 1, end - i - 1));
      i = end + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < text.size() &&
                std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
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
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc())
          fail(ErrorKind::sql_syntax, "bad number '" + t.text + "'");
        t.number = v;
      }
      i = end;
    } else if (is_ident(c)) {
      std::size_t end = i;
      while (end < text.size() && is_ident(text[end])) ++end;
      t.kind = Token::Kind::word;
      t.text = lowercase(text.substr(i, end - i));
      i = end;
    } else if (c == '<' || c == '>') {
      t.kind = Token::Kind::punct;
      if (i + 1 < text.size() && text[i + 1] == '=') {
        t.text = std::string(1, c) + "=";
        i += 2;
      } else {
        t.text = std::string(1, c);
        ++i;
      }
    } else if (c == '(' || c == ')' || c == '.' || c == ',' || c == '=') {
      t.kind = Token::Kind::punct;
      t.text = std::string(1, c);
      ++i;
    } else {
      fail(ErrorKind::sql_syntax, "unexpected character '" + std::string(1, c) +
                                      "' at position " + std::to_string(i));
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{});
  return out;
}

const std::set<std::string> kUnsupported = {"distinct", "or",    "like",  "group", "order",
                                            "limit",    "union", "outer", "left",  "right",
                                            "having",   "not"};

const std::set<std::string> kReserved = {"select", "from", "where", "inner", "join", "on",
                                         "and",    "count", "max",  "min",   "avg"};

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(lex(text)) {}

  SqlQuery parse() {
    SqlQuery q;
    expect_word("select");
    q.select_items.push_back(select_item());
    while (accept_punct(",")) q.select_items.push_back(select_item());
    if (q.select_items.size() > 1)
      for (const auto& item : q.select_items)
        if (item.agg)
          fail(ErrorKind::unsupported_feature, "aggregates must be the only select item");
    expect_word("from");
    q.from_table = identifier("table name");
    std::set<std::string> introduced{q.from_table};
    while (peek_word("inner")) {
      next();
      expect_word("join");
      SqlJoin join;
      join.table = identifier("table name");
      if (introduced.count(join.table))
        fail(ErrorKind::sql_syntax, "table '" + join.table + "' joined twice");
      expect_word("on");
      join.on_left = column_ref();
      expect_punct("=");
      join.on_right = column_ref();
      const bool left_is_new = join.on_left.table == join.table;
      const bool right_is_new = join.on_right.table == join.table;
      if (left_is_new == right_is_new)
        fail(ErrorKind::sql_syntax, "join on clause must link '" + join.table +
                                        "' to an earlier table");
      const std::string& other = left_is_new ? join.on_right.table : join.on_left.table;
      if (!introduced.count(other))
        fail(ErrorKind::sql_syntax, "join references table '" + other +
                                        "' before it is introduced");
      introduced.insert(join.table);
      q.joins.push_back(std::move(join));
    }
    if (peek_word("where")) {
      next();
      q.conditions.push_back(condition());
      while (peek_word("and")) {
        next();
        q.conditions.push_back(condition());
      }
    }
    check_unsupported();
    if (cur().kind != Token::Kind::end) syntax_error(cur(), "end of query");
    for (const auto& item : q.select_items)
      if (!introduced.count(item.column.table))
        fail(ErrorKind::sql_syntax, "selected table '" + item.column.table +
                                        "' is not in the from/join chain");
    for (const auto& c : q.conditions)
      if (!introduced.count(c.column.table))
        fail(ErrorKind::sql_syntax, "condition table '" + c.column.table +
                                        "' is not in the from/join chain");
    return q;
  }

 private:
  const Token& cur() const { return tokens_[index_]; }
  void next() { ++index_; }

  bool peek_word(std::string_view w) const {
    return cur().kind == Token::Kind::word && cur().text == w;
  }
  bool accept_punct(std::string_view p) {
    if (cur().kind == Token::Kind::punct && cur().text == p) {
      next();
      return true;
    }
    return false;
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) syntax_error(cur(), "'" + std::string(p) + "'");
  }
  void expect_word(std::string_view w) {
    check_unsupported();
    if (!peek_word(w)) syntax_error(cur(), "'" + std::string(w) + "'");
    next();
  }
  void check_unsupported() const {
    if (cur().kind == Token::Kind::word && kUnsupported.count(cur().text))
      fail(ErrorKind::unsupported_feature, "'" + cur().text + "' is not supported");
  }
  std::string identifier(const std::string& what) {
    check_unsupported();
    if (cur().kind != Token::Kind::word || kReserved.count(cur().text))
      syntax_error(cur(), what);
    std::string s = cur().text;
    next();
    return s;
  }

  std::optional<AggFn> peek_agg() const {
    if (cur().kind != Token::Kind::word) return std::nullopt;
    if (cur().text == "count") return AggFn::count;
    if (cur().text == "max") return AggFn::max;
    if (cur().text == "min") return AggFn::min;
    if (cur().text == "avg") return AggFn::avg;
    return std::nullopt;
  }

  ColumnRef column_ref() {
    ColumnRef ref;
    ref.table = identifier("column reference");
    expect_punct(".");
    ref.column = identifier("column name");
    return ref;
  }

  SelectItem select_item() {
    check_unsupported();
    SelectItem item;
    if (auto agg = peek_agg()) {
      item.agg = *agg;
      next();
      expect_punct("(");
      item.column = column_ref();
      expect_punct(")");
    } else {
      item.column = column_ref();
    }
    return item;
  }

  SqlCondition condition() {
    check_unsupported();
    SqlCondition c;
    c.column = column_ref();
    check_unsupported();
    if (cur().kind != Token::Kind::punct) syntax_error(cur(), "comparison operator");
    const std::string op = cur().text;
    if (op == "=") c.op = CmpOp::eq;
    else if (op == "<") c.op = CmpOp::lt;
    else if (op == ">") c.op = CmpOp::gt;
    else if (op == "<=") c.op = CmpOp::le;
    else if (op == ">=") c.op = CmpOp::ge;
    else syntax_error(cur(), "comparison operator");
    next();
    if (cur().kind == Token::Kind::string) {
      c.value = cur().text;
      next();
    } else if (cur().kind == Token::Kind::number) {
      c.value = cur().number;
      next();
    } else {
      syntax_error(cur(), "condition value");
    }
    return c;
  }

  std::vector<Token> tokens_;
  std::size_t index_ = 0;
};

}  // namespace
}  // namespace sql

SqlQuery parse_sql(std::string_view text) { return sql::Parser(text).parse(); }

namespace {

void emit_column(TokenStream& out, const ColumnRef& ref, Tokenization mode) {
  if (mode == Tokenization::fused) {
    out.push_back(ref.table + "." + ref.column);
  } else {
    out.push_back(ref.table);
    out.push_back(".");
    out.push_back(ref.column);
  }
}

}  // namespace

TokenStream serialize_sql(const SqlQuery& q, Tokenization mode) {
  TokenStream out;
  out.push_back("select");
  for (std::size_t i = 0; i < q.select_items.size(); ++i) {
    if (i) out.push_back(",");
    const auto& item = q.select_items[i];
    if (item.agg) {
      out.push_back(to_string(*item.agg));
      out.push_back("(");
      emit_column(out, item.column, mode);
      out.push_back(")");
    } else {
      emit_column(out, item.column, mode);
    }
  }
  out.push_back("from");
  out.push_back(q.from_table);
  for (const auto& join : q.joins) {
    out.push_back("inner");
    out.push_back("join");
    out.push_back(join.table);
    out.push_back("on");
    emit_column(out, join.on_left, mode);
    out.push_back("=");
    emit_column(out, join.on_right, mode);
  }
  if (!q.conditions.empty()) {
    out.push_back("where");
    for (std::size_t i = 0; i < q.conditions.size(); ++i) {
      if (i) out.push_back("and");
      const auto& c = q.conditions[i];
      emit_column(out, c.column, mode);
      out.push_back(to_string(c.op));
      out.push_back(value_token(c.value));
    }
  }
  return out;
}

}  // namespace ehrq
