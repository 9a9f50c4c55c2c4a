#include "arena/callexpr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace arena::callexpr {

std::string literal_type_name(const Literal& v) {
  switch (v.index()) {
    case 0: return "string";
    case 1: return "int";
    case 2: return "float";
    default: return "bool";
  }
}

std::string render_literal(const Literal& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    std::string out = "\"";
    for (char c : *s) {
      switch (c) {
        case '\\': out += "\\\\"; break;
        case '"': out += "\\\""; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default: out.push_back(c);
      }
    }
    out.push_back('"');
    return out;
  }
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    // Shortest repr that round-trips, always with a '.' or exponent so it
    // re-parses as a float.
    std::string s = json(*d).dump();
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
  }
  return std::get<bool>(v) ? "True" : "False";
}

json literal_to_json(const Literal& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

Literal literal_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  throw std::invalid_argument("literal must be a string, number or boolean");
}

std::optional<double> as_number(const Literal& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

std::string CallExpr::dotted() const {
  std::string out;
  for (const auto& p : path) {
    if (!out.empty()) out.push_back('.');
    out += p;
  }
  return out;
}

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  std::size_t pos() const { return pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(what + " at column " + std::to_string(pos_ + 1), pos_);
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    skip_ws();
    if (!is_ident_start(peek())) fail("expected identifier");
    std::size_t b = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(b, pos_ - b));
  }

  Literal literal() {
    skip_ws();
    char c = peek();
    if (c == '"' || c == '\'') return string_literal();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' ||
        c == '.') {
      return number_literal();
    }
    if (is_ident_start(c)) {
      std::size_t b = pos_;
      std::string word = ident();
      if (word == "True") return true;
      if (word == "False") return false;
      pos_ = b;
      fail("expected literal, found identifier '" + word + "'");
    }
    fail("expected literal");
  }

  // Used to distinguish `name=literal` from a positional literal.
  bool looking_at_keyword() {
    skip_ws();
    if (!is_ident_start(peek())) return false;
    std::size_t p = pos_;
    while (p < s_.size() && is_ident_char(s_[p])) ++p;
    std::string_view word = s_.substr(pos_, p - pos_);
    if (word == "True" || word == "False") {
      std::size_t q = p;
      while (q < s_.size() && (s_[q] == ' ' || s_[q] == '\t')) ++q;
      return q < s_.size() && s_[q] == '=' && (q + 1 >= s_.size() || s_[q + 1] != '=');
    }
    return true;
  }

 private:
  Literal string_literal() {
    const char quote = s_[pos_];
    // Reject triple-quoted strings outright.
    if (pos_ + 2 < s_.size() && s_[pos_ + 1] == quote && s_[pos_ + 2] == quote) {
      fail("triple-quoted strings are not allowed");
    }
    ++pos_;
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated string literal");
      char c = s_[pos_++];
      if (c == quote) break;
      if (c == '\\') {
        if (at_end()) fail("unterminated escape");
        char e = s_[pos_++];
        switch (e) {
          case '\\': out.push_back('\\'); break;
          case '\'': out.push_back('\''); break;
          case '"': out.push_back('"'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          default:
            // Unknown escapes keep the backslash, as in Python.
            out.push_back('\\');
            out.push_back(e);
        }
        continue;
      }
      out.push_back(c);
    }
    return out;
  }

  Literal number_literal() {
    std::size_t b = pos_;
    if (peek() == '-' || peek() == '+') ++pos_;
    bool is_real = false;
    bool digits = false;
    while (!at_end()) {
      char c = s_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        digits = true;
        ++pos_;
      } else if (c == '.') {
        is_real = true;
        ++pos_;
      } else if ((c == 'e' || c == 'E') && digits) {
        is_real = true;
        ++pos_;
        if (peek() == '-' || peek() == '+') ++pos_;
      } else {
        break;
      }
    }
    if (!digits) {
      pos_ = b;
      fail("malformed number");
    }
    if (!at_end() && is_ident_char(s_[pos_])) fail("malformed number");
    std::string text(s_.substr(b, pos_ - b));
    if (!text.empty() && text[0] == '+') text.erase(0, 1);
    if (!is_real) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        pos_ = b;
        fail("integer literal out of range");
      }
      return v;
    }
    char* end = nullptr;
    double d = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || !std::isfinite(d)) {
      pos_ = b;
      fail("malformed number");
    }
    return d;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

CallExpr parse_statement(std::string_view text) {
  Cursor cur(text);
  CallExpr call;
  call.path.push_back(cur.ident());
  cur.skip_ws();
  while (cur.peek() == '.') {
    cur.expect('.');
    call.path.push_back(cur.ident());
    cur.skip_ws();
  }
  cur.expect('(');
  cur.skip_ws();
  bool seen_keyword = false;
  if (cur.peek() != ')') {
    while (true) {
      if (cur.looking_at_keyword()) {
        std::string name = cur.ident();
        cur.skip_ws();
        if (cur.peek() != '=') cur.fail("expected '=' after keyword '" + name + "'");
        cur.expect('=');
        Literal value = cur.literal();
        for (const auto& [k, _] : call.kwargs) {
          if (k == name) cur.fail("duplicate keyword argument '" + name + "'");
        }
        call.kwargs.emplace_back(std::move(name), std::move(value));
        seen_keyword = true;
      } else {
        if (seen_keyword) cur.fail("positional argument after keyword argument");
        call.args.push_back(cur.literal());
      }
      cur.skip_ws();
      if (cur.peek() == ',') {
        cur.expect(',');
        cur.skip_ws();
        if (cur.peek() == ')') break;
        continue;
      }
      break;
    }
  }
  cur.expect(')');
  cur.skip_ws();
  if (!cur.at_end() && cur.peek() != '#') cur.fail("unexpected trailing input");
  return call;
}

std::vector<std::string> split_statements(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      current.push_back(c);
      if (c == '\\' && i + 1 < text.size()) {
        current.push_back(text[++i]);
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') quote = c;
    if (c == ';') {
      out.push_back(trim(current));
      current.clear();
      continue;
    }
    current.push_back(c);
  }
  if (!trim(current).empty()) out.push_back(trim(current));
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

}  // namespace arena::callexpr
