#include "plsgd/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "plsgd/errors.hpp"

namespace plsgd::toml {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Document run() {
    Document doc;
    std::string table;
    while (pos_ < text_.size()) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      const char ch = text_[pos_];
      if (ch == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      if (ch == '#') {
        skip_comment();
        continue;
      }
      if (ch == '[') {
        ++pos_;
        skip_blank();
        table = read_key();
        skip_blank();
        expect(']', table);
        end_of_line(table);
        if (!tables_.insert(table).second) {
          throw ConfigError(table, "table defined twice (line " +
                                       std::to_string(line_) + ")");
        }
        continue;
      }
      const std::string key = read_key();
      const std::string full = table.empty() ? key : table + "." + key;
      skip_blank();
      expect('=', full);
      skip_blank();
      Value v = read_value(full);
      v.line = line_;
      end_of_line(full);
      if (!doc.emplace(full, std::move(v)).second) {
        throw ConfigError(full, "duplicate key");
      }
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(key.empty() ? "line " + std::to_string(line_) : key,
                      what + " (line " + std::to_string(line_) + ")");
  }

  void skip_blank() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  void skip_comment() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

  void expect(char c, const std::string& key) {
    if (pos_ >= text_.size() || text_[pos_] != c) {
      fail(key, std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  void end_of_line(const std::string& key) {
    skip_blank();
    if (pos_ < text_.size() && text_[pos_] == '#') skip_comment();
    if (pos_ < text_.size() && text_[pos_] != '\n') {
      fail(key, "unexpected trailing characters");
    }
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string read_key() {
    std::string key;
    for (;;) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && bare_char(text_[pos_])) ++pos_;
      if (pos_ == start) fail(key, "expected a key");
      key.append(text_.substr(start, pos_ - start));
      skip_blank();
      if (pos_ < text_.size() && text_[pos_] == '.') {
        ++pos_;
        skip_blank();
        key.push_back('.');
        continue;
      }
      return key;
    }
  }

  Value read_value(const std::string& key) {
    if (pos_ >= text_.size()) fail(key, "missing value");
    const char c = text_[pos_];
    if (c == '"') return Value{read_string(key)};
    if (c == '[') {
      ++pos_;
      Array items;
      for (;;) {
        skip_ws_and_newlines();
        if (pos_ < text_.size() && text_[pos_] == ']') {
          ++pos_;
          break;
        }
        Value item = read_value(key);
        if (item.is_array()) fail(key, "nested arrays are not supported");
        item.line = line_;
        items.push_back(std::move(item));
        skip_ws_and_newlines();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        skip_ws_and_newlines();
        expect(']', key);
        break;
      }
      return Value{std::move(items)};
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
           text_[pos_] != '\n' && text_[pos_] != '#' && text_[pos_] != ' ' &&
           text_[pos_] != '\t' && text_[pos_] != '\r') {
      ++pos_;
    }
    return scalar(key, text_.substr(start, pos_ - start));
  }

  void skip_ws_and_newlines() {
    for (;;) {
      skip_blank();
      if (pos_ < text_.size() && text_[pos_] == '\n') {
        ++pos_;
        ++line_;
      } else if (pos_ < text_.size() && text_[pos_] == '#') {
        skip_comment();
      } else {
        return;
      }
    }
  }

  std::string read_string(const std::string& key) {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\n') fail(key, "unterminated string");
      if (c == '\\') {
        if (pos_ >= text_.size()) fail(key, "unterminated escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(key, "unsupported escape");
        }
      }
      out.push_back(c);
    }
    expect('"', key);
    return out;
  }

  Value scalar(const std::string& key, std::string_view token) {
    if (token.empty()) fail(key, "missing value");
    if (token == "true") return Value{true};
    if (token == "false") return Value{false};
    std::string clean;
    for (char c : token) {
      if (c != '_') clean.push_back(c);
    }
    std::string_view body = clean;
    const bool negative = !body.empty() && body[0] == '-';
    std::string_view unsigned_body = body;
    if (!unsigned_body.empty() && (unsigned_body[0] == '+' || unsigned_body[0] == '-')) {
      unsigned_body.remove_prefix(1);
    }
    if (unsigned_body == "inf") {
      return Value{negative ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity()};
    }
    if (unsigned_body == "nan") return Value{std::numeric_limits<double>::quiet_NaN()};
    if (body.size() > 2 && body.substr(0, 2) == "0x") {
      std::uint64_t u = 0;
      auto [p, ec] = std::from_chars(body.data() + 2, body.data() + body.size(), u, 16);
      if (ec != std::errc() || p != body.data() + body.size()) fail(key, "bad hex integer");
      if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        fail(key, "hex integer out of range");
      }
      return Value{static_cast<std::int64_t>(u)};
    }
    const std::string_view digits =
        (!body.empty() && body[0] == '+') ? body.substr(1) : body;
    const bool looks_float = digits.find_first_of(".eE") != std::string_view::npos;
    if (!looks_float) {
      std::int64_t i = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
      if (ec == std::errc() && p == digits.data() + digits.size()) return Value{i};
      fail(key, "cannot parse value '" + std::string(token) + "'");
    }
    double d = 0.0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
    if (ec != std::errc() || p != digits.data() + digits.size()) {
      fail(key, "cannot parse value '" + std::string(token) + "'");
    }
    return Value{d};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> tables_;
};

}  // namespace

Document parse(std::string_view text) { return Parser(text).run(); }

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, p);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace plsgd::toml
