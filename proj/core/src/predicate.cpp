#include "bounty/predicate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "bounty/error.hpp"
#include "bounty/numeric_text.hpp"

namespace bounty {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::eq: return "==";
    case CompareOp::ne: return "!=";
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
  }
  return "?";
}

namespace {

bool literal_less(const Literal& a, const Literal& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (const auto* x = std::get_if<double>(&a)) return *x < std::get<double>(b);
  return std::get<std::string>(a) < std::get<std::string>(b);
}

bool literal_equal(const Literal& a, const Literal& b) {
  return !literal_less(a, b) && !literal_less(b, a);
}

}  // namespace

Predicate Predicate::always_true() { return Predicate{}; }

Predicate Predicate::compare(std::string feature, CompareOp op, Literal value) {
  Predicate p;
  p.kind_ = Kind::compare;
  p.feature_ = std::move(feature);
  p.op_ = op;
  p.value_ = std::move(value);
  return p;
}

Predicate Predicate::member_of(std::string feature, std::vector<Literal> values) {
  std::stable_sort(values.begin(), values.end(), literal_less);
  values.erase(std::unique(values.begin(), values.end(), literal_equal), values.end());
  Predicate p;
  p.kind_ = Kind::member_of;
  p.feature_ = std::move(feature);
  p.values_ = std::move(values);
  return p;
}

Predicate Predicate::all_of(std::vector<Predicate> children) {
  Predicate p;
  p.kind_ = Kind::all_of;
  p.children_ = std::move(children);
  return p;
}

Predicate Predicate::any_of(std::vector<Predicate> children) {
  Predicate p;
  p.kind_ = Kind::any_of;
  p.children_ = std::move(children);
  return p;
}

Predicate Predicate::negation(Predicate child) {
  Predicate p;
  p.kind_ = Kind::negation;
  p.children_.push_back(std::move(child));
  return p;
}

std::size_t Predicate::depth() const {
  std::size_t deepest = 0;
  for (const auto& c : children_) deepest = std::max(deepest, c.depth());
  return deepest + 1;
}

std::size_t Predicate::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children_) n += c.node_count();
  return n;
}

bool Predicate::operator==(const Predicate& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::always_true:
      return true;
    case Kind::compare:
      return feature_ == other.feature_ && op_ == other.op_ && value_ == other.value_;
    case Kind::member_of:
      return feature_ == other.feature_ && values_ == other.values_;
    case Kind::all_of:
    case Kind::any_of:
    case Kind::negation:
      return children_ == other.children_;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Surface syntax

namespace {

enum class Tok {
  end, ident, number, string, lparen, rparen, lbrace, rbrace, comma,
  op, kw_true, kw_and, kw_or, kw_not, kw_in,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double number = 0.0;
  CompareOp op = CompareOp::eq;
  std::size_t column = 1;
};

[[noreturn]] void syntax_error(std::size_t column, const std::string& what) {
  throw Error(Errc::syntax_error, "syntax error at column " + std::to_string(column) + ": " + what);
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    Token t;
    t.column = pos_ + 1;
    if (pos_ >= text_.size()) return t;
    const char c = text_[pos_];
    switch (c) {
      case '(': ++pos_; t.kind = Tok::lparen; return t;
      case ')': ++pos_; t.kind = Tok::rparen; return t;
      case '{': ++pos_; t.kind = Tok::lbrace; return t;
      case '}': ++pos_; t.kind = Tok::rbrace; return t;
      case ',': ++pos_; t.kind = Tok::comma; return t;
      default: break;
    }
    if (c == '=' || c == '!' || c == '<' || c == '>') return lex_op(t);
    if (c == '"') return lex_string(t);
    if (c == '`') return lex_quoted_ident(t);
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.') return lex_number(t);
    if (is_ident_start(c)) {
      const auto start = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
      t.text = std::string(text_.substr(start, pos_ - start));
      if (t.text == "TRUE") t.kind = Tok::kw_true;
      else if (t.text == "AND") t.kind = Tok::kw_and;
      else if (t.text == "OR") t.kind = Tok::kw_or;
      else if (t.text == "NOT") t.kind = Tok::kw_not;
      else if (t.text == "IN") t.kind = Tok::kw_in;
      else t.kind = Tok::ident;
      return t;
    }
    syntax_error(t.column, std::string("unexpected character '") + c + "'");
  }

 private:
  Token lex_op(Token t) {
    const char c = text_[pos_];
    const bool has_eq = pos_ + 1 < text_.size() && text_[pos_ + 1] == '=';
    t.kind = Tok::op;
    if (c == '=') {
      if (!has_eq) syntax_error(t.column, "expected '=='");
      t.op = CompareOp::eq;
    } else if (c == '!') {
      if (!has_eq) syntax_error(t.column, "expected '!='");
      t.op = CompareOp::ne;
    } else if (c == '<') {
      t.op = has_eq ? CompareOp::le : CompareOp::lt;
    } else {
      t.op = has_eq ? CompareOp::ge : CompareOp::gt;
    }
    pos_ += has_eq ? 2 : 1;
    return t;
  }

  Token lex_string(Token t) {
    ++pos_;
    std::string value;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_];
      if (c == '\\') {
        if (pos_ + 1 >= text_.size()) break;
        const char e = text_[pos_ + 1];
        if (e == '"' || e == '\\') value.push_back(e);
        else if (e == 'n') value.push_back('\n');
        else if (e == 't') value.push_back('\t');
        else syntax_error(pos_ + 1, "unknown escape sequence");
        pos_ += 2;
        continue;
      }
      value.push_back(c);
      ++pos_;
    }
    if (pos_ >= text_.size()) syntax_error(t.column, "unterminated string literal");
    ++pos_;
    t.kind = Tok::string;
    t.text = std::move(value);
    return t;
  }

  Token lex_quoted_ident(Token t) {
    ++pos_;
    std::string value;
    for (;;) {
      if (pos_ >= text_.size()) syntax_error(t.column, "unterminated quoted identifier");
      if (text_[pos_] == '`') {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '`') {
          value.push_back('`');
          pos_ += 2;
          continue;
        }
        ++pos_;
        break;
      }
      value.push_back(text_[pos_++]);
    }
    if (value.empty()) syntax_error(t.column, "empty identifier");
    t.kind = Tok::ident;
    t.text = std::move(value);
    return t;
  }

  Token lex_number(Token t) {
    const auto start = pos_;
    if (text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    const auto body = text_.substr(start, pos_ - start);
    auto value = parse_number(body);
    if (!value) syntax_error(t.column, "malformed number '" + std::string(body) + "'");
    t.kind = Tok::number;
    t.number = *value;
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view text, std::size_t max_depth) : lexer_(text), max_depth_(max_depth) {
    advance();
  }

  Predicate parse() {
    auto p = parse_or();
    if (current_.kind != Tok::end) syntax_error(current_.column, "unexpected trailing input");
    return p;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  void expect(Tok kind, const char* what) {
    if (current_.kind != kind) syntax_error(current_.column, std::string("expected ") + what);
    advance();
  }

  void enter() {
    if (++nesting_ > max_depth_) {
      throw Error(Errc::limit_exceeded, "predicate nesting exceeds depth limit " +
                                            std::to_string(max_depth_));
    }
  }

  Predicate parse_or() {
    std::vector<Predicate> terms;
    terms.push_back(parse_and());
    while (current_.kind == Tok::kw_or) {
      advance();
      terms.push_back(parse_and());
    }
    if (terms.size() == 1) return std::move(terms.front());
    return Predicate::any_of(std::move(terms));
  }

  Predicate parse_and() {
    std::vector<Predicate> terms;
    terms.push_back(parse_unary());
    while (current_.kind == Tok::kw_and) {
      advance();
      terms.push_back(parse_unary());
    }
    if (terms.size() == 1) return std::move(terms.front());
    return Predicate::all_of(std::move(terms));
  }

  Predicate parse_unary() {
    if (current_.kind == Tok::kw_not) {
      advance();
      enter();
      auto child = parse_unary();
      --nesting_;
      return Predicate::negation(std::move(child));
    }
    return parse_primary();
  }

  Literal parse_literal() {
    if (current_.kind == Tok::number) {
      Literal v = current_.number;
      advance();
      return v;
    }
    if (current_.kind == Tok::string) {
      Literal v = current_.text;
      advance();
      return v;
    }
    syntax_error(current_.column, "expected a number or string literal");
  }

  Predicate parse_primary() {
    switch (current_.kind) {
      case Tok::kw_true:
        advance();
        return Predicate::always_true();
      case Tok::lparen: {
        advance();
        enter();
        auto inner = parse_or();
        --nesting_;
        expect(Tok::rparen, "')'");
        return inner;
      }
      case Tok::ident: {
        std::string feature = current_.text;
        advance();
        if (current_.kind == Tok::op) {
          const auto op = current_.op;
          advance();
          return Predicate::compare(std::move(feature), op, parse_literal());
        }
        if (current_.kind == Tok::kw_in) {
          advance();
          expect(Tok::lbrace, "'{'");
          std::vector<Literal> values;
          values.push_back(parse_literal());
          while (current_.kind == Tok::comma) {
            advance();
            values.push_back(parse_literal());
          }
          expect(Tok::rbrace, "'}'");
          return Predicate::member_of(std::move(feature), std::move(values));
        }
        syntax_error(current_.column, "expected a comparison operator or IN after '" + feature + "'");
      }
      case Tok::end:
        syntax_error(current_.column, "unexpected end of input");
      default:
        syntax_error(current_.column, "expected TRUE, NOT, '(' or a feature name");
    }
  }

  Lexer lexer_;
  Token current_;
  std::size_t max_depth_;
  std::size_t nesting_ = 0;
};

bool is_keyword(std::string_view s) {
  return s == "TRUE" || s == "AND" || s == "OR" || s == "NOT" || s == "IN";
}

std::string ident_text(const std::string& name) {
  bool plain = !name.empty() && is_ident_start(name[0]) && !is_keyword(name);
  for (char c : name) plain = plain && is_ident_char(c);
  if (plain) return name;
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out.push_back('`');
    out.push_back(c);
  }
  out.push_back('`');
  return out;
}

std::string literal_text(const Literal& value) {
  if (const auto* d = std::get_if<double>(&value)) return format_number(*d);
  std::string out = "\"";
  for (char c : std::get<std::string>(value)) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

void write_text(const Predicate& p, std::string& out) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::always_true:
      out += "TRUE";
      return;
    case K::compare:
      out += ident_text(p.feature());
      out.push_back(' ');
      out += to_string(p.op());
      out.push_back(' ');
      out += literal_text(p.value());
      return;
    case K::member_of: {
      out += ident_text(p.feature());
      out += " IN {";
      bool first = true;
      for (const auto& v : p.values()) {
        if (!first) out += ", ";
        first = false;
        out += literal_text(v);
      }
      out.push_back('}');
      return;
    }
    case K::all_of:
    case K::any_of: {
      const bool conj = p.kind() == K::all_of;
      bool first = true;
      for (const auto& c : p.children()) {
        if (!first) out += conj ? " AND " : " OR ";
        first = false;
        // AND binds tighter than OR; a same-kind child keeps its parentheses
        // so the tree shape survives a round trip.
        const bool wrap = c.kind() == K::any_of || (conj && c.kind() == K::all_of);
        if (wrap) {
          out.push_back('(');
          write_text(c, out);
          out.push_back(')');
        } else {
          write_text(c, out);
        }
      }
      return;
    }
    case K::negation: {
      out += "NOT ";
      const auto& c = p.children().front();
      if (c.kind() == K::all_of || c.kind() == K::any_of) {
        out.push_back('(');
        write_text(c, out);
        out.push_back(')');
      } else {
        write_text(c, out);
      }
      return;
    }
  }
}

}  // namespace

Predicate parse_predicate(std::string_view text, std::size_t max_depth) {
  return Parser(text, max_depth).parse();
}

std::string to_text(const Predicate& predicate) {
  std::string out;
  write_text(predicate, out);
  return out;
}

// ---------------------------------------------------------------------------
// JSON tree form

namespace {

nlohmann::json literal_json(const Literal& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

Literal literal_from_json(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw Error(Errc::syntax_error, "predicate constant must be a number or string");
}

CompareOp op_from_text(const std::string& s) {
  if (s == "==") return CompareOp::eq;
  if (s == "!=") return CompareOp::ne;
  if (s == "<") return CompareOp::lt;
  if (s == "<=") return CompareOp::le;
  if (s == ">") return CompareOp::gt;
  if (s == ">=") return CompareOp::ge;
  throw Error(Errc::syntax_error, "unknown comparison operator '" + s + "'");
}

Predicate from_json_at(const nlohmann::json& doc, std::size_t depth, std::size_t max_depth) {
  if (depth > max_depth) {
    throw Error(Errc::limit_exceeded,
                "predicate nesting exceeds depth limit " + std::to_string(max_depth));
  }
  if (!doc.is_object() || !doc.contains("op") || !doc["op"].is_string()) {
    throw Error(Errc::syntax_error, "predicate node must be an object with a string 'op'");
  }
  const auto op = doc["op"].get<std::string>();
  try {
    if (op == "true") return Predicate::always_true();
    if (op == "cmp") {
      return Predicate::compare(doc.at("feature").get<std::string>(),
                                op_from_text(doc.at("cmp").get<std::string>()),
                                literal_from_json(doc.at("value")));
    }
    if (op == "in") {
      std::vector<Literal> values;
      for (const auto& v : doc.at("values")) values.push_back(literal_from_json(v));
      return Predicate::member_of(doc.at("feature").get<std::string>(), std::move(values));
    }
    if (op == "and" || op == "or") {
      std::vector<Predicate> children;
      for (const auto& c : doc.at("args")) children.push_back(from_json_at(c, depth + 1, max_depth));
      return op == "and" ? Predicate::all_of(std::move(children))
                         : Predicate::any_of(std::move(children));
    }
    if (op == "not") return Predicate::negation(from_json_at(doc.at("arg"), depth + 1, max_depth));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::syntax_error, std::string("malformed predicate node: ") + e.what());
  }
  throw Error(Errc::syntax_error, "unknown predicate op '" + op + "'");
}

}  // namespace

nlohmann::json to_json(const Predicate& p) {
  using K = Predicate::Kind;
  switch (p.kind()) {
    case K::always_true:
      return {{"op", "true"}};
    case K::compare:
      return {{"op", "cmp"}, {"feature", p.feature()}, {"cmp", std::string(to_string(p.op()))},
              {"value", literal_json(p.value())}};
    case K::member_of: {
      nlohmann::json values = nlohmann::json::array();
      for (const auto& v : p.values()) values.push_back(literal_json(v));
      return {{"op", "in"}, {"feature", p.feature()}, {"values", std::move(values)}};
    }
    case K::all_of:
    case K::any_of: {
      nlohmann::json args = nlohmann::json::array();
      for (const auto& c : p.children()) args.push_back(to_json(c));
      return {{"op", p.kind() == K::all_of ? "and" : "or"}, {"args", std::move(args)}};
    }
    case K::negation:
      return {{"op", "not"}, {"arg", to_json(p.children().front())}};
  }
  return nullptr;
}

Predicate predicate_from_json(const nlohmann::json& doc, std::size_t max_depth) {
  return from_json_at(doc, 1, max_depth);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

std::size_t resolve(const Dataset& dataset, const std::string& name) {
  auto index = dataset.schema().find(name);
  if (!index) throw Error(Errc::unknown_feature, "unknown feature '" + name + "'");
  return *index;
}

GroupMask eval_compare(const Predicate& p, const Dataset& dataset) {
  const auto f = resolve(dataset, p.feature());
  const auto n = dataset.rows();
  std::vector<std::uint8_t> bits(n, 0);
  if (dataset.schema().feature(f).kind == FeatureKind::numeric) {
    const auto* rhs = std::get_if<double>(&p.value());
    if (!rhs) throw Error(Errc::type_mismatch, "string constant on numeric feature '" + p.feature() + "'");
    const auto col = dataset.numeric(f);
    const double c = *rhs;
    switch (p.op()) {
      case CompareOp::eq: for (std::size_t i = 0; i < n; ++i) bits[i] = col[i] == c; break;
      case CompareOp::ne: for (std::size_t i = 0; i < n; ++i) bits[i] = col[i] != c; break;
      case CompareOp::lt: for (std::size_t i = 0; i < n; ++i) bits[i] = col[i] < c; break;
      case CompareOp::le: for (std::size_t i = 0; i < n; ++i) bits[i] = col[i] <= c; break;
      case CompareOp::gt: for (std::size_t i = 0; i < n; ++i) bits[i] = col[i] > c; break;
      case CompareOp::ge: for (std::size_t i = 0; i < n; ++i) bits[i] = col[i] >= c; break;
    }
    return GroupMask(std::move(bits));
  }
  const auto* rhs = std::get_if<std::string>(&p.value());
  if (!rhs || (p.op() != CompareOp::eq && p.op() != CompareOp::ne)) {
    throw Error(Errc::type_mismatch, "invalid comparison on categorical feature '" + p.feature() + "'");
  }
  const auto code = dataset.schema().category_code(f, *rhs).value_or(-1);
  const auto col = dataset.codes(f);
  const bool want_equal = p.op() == CompareOp::eq;
  for (std::size_t i = 0; i < n; ++i) bits[i] = (col[i] == code) == want_equal;
  return GroupMask(std::move(bits));
}

GroupMask eval_member(const Predicate& p, const Dataset& dataset) {
  const auto f = resolve(dataset, p.feature());
  const auto n = dataset.rows();
  std::vector<std::uint8_t> bits(n, 0);
  const auto& spec = dataset.schema().feature(f);
  if (spec.kind == FeatureKind::numeric) {
    std::vector<double> set;
    for (const auto& v : p.values()) {
      const auto* d = std::get_if<double>(&v);
      if (!d) throw Error(Errc::type_mismatch, "string constant on numeric feature '" + p.feature() + "'");
      set.push_back(*d);
    }
    std::sort(set.begin(), set.end());
    const auto col = dataset.numeric(f);
    for (std::size_t i = 0; i < n; ++i) bits[i] = std::binary_search(set.begin(), set.end(), col[i]);
    return GroupMask(std::move(bits));
  }
  std::vector<std::uint8_t> allowed(spec.allowed_values.size(), 0);
  for (const auto& v : p.values()) {
    const auto* s = std::get_if<std::string>(&v);
    if (!s) throw Error(Errc::type_mismatch, "numeric constant on categorical feature '" + p.feature() + "'");
    if (auto code = dataset.schema().category_code(f, *s)) allowed[static_cast<std::size_t>(*code)] = 1;
  }
  const auto col = dataset.codes(f);
  for (std::size_t i = 0; i < n; ++i) bits[i] = allowed[static_cast<std::size_t>(col[i])];
  return GroupMask(std::move(bits));
}

}  // namespace

GroupMask eval_predicate(const Predicate& predicate, const Dataset& dataset) {
  using K = Predicate::Kind;
  switch (predicate.kind()) {
    case K::always_true:
      return GroupMask(dataset.rows(), true);
    case K::compare:
      return eval_compare(predicate, dataset);
    case K::member_of:
      return eval_member(predicate, dataset);
    case K::all_of: {
      GroupMask mask(dataset.rows(), true);
      for (const auto& c : predicate.children()) mask &= eval_predicate(c, dataset);
      return mask;
    }
    case K::any_of: {
      GroupMask mask(dataset.rows(), false);
      for (const auto& c : predicate.children()) mask |= eval_predicate(c, dataset);
      return mask;
    }
    case K::negation:
      return !eval_predicate(predicate.children().front(), dataset);
  }
  return GroupMask(dataset.rows(), false);
}

}  // namespace bounty
