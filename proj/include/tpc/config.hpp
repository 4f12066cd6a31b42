#pragma once

// Experiment configuration: a small TOML subset (top-level keys, [table] and
// [table.sub] headers, strings, integers, floats, booleans, one-line arrays,
// '#' comments) parsed into JSON, and a reader that enforces types, ranges and
// strict rejection of keys nobody consumed.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpc/errors.hpp"

namespace tpc {

namespace detail {

class TomlParser {
 public:
  TomlParser(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    std::size_t start = 0;
    while (start <= text_.size()) {
      std::size_t end = text_.find('\n', start);
      if (end == std::string_view::npos) end = text_.size();
      ++line_;
      line_text_ = text_.substr(start, end - start);
      pos_ = 0;
      skip_ws();
      if (!at_end() && peek() != '#') {
        if (peek() == '[')
          table = &open_table(root);
        else
          parse_pair(*table);
        skip_ws();
        if (!at_end() && peek() != '#') fail("unexpected trailing characters");
      }
      start = end + 1;
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + what);
  }

  bool at_end() const { return pos_ >= line_text_.size(); }
  char peek() const { return line_text_[pos_]; }
  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  static bool bare_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

  std::string bare_key() {
    skip_ws();
    const std::size_t b = pos_;
    while (!at_end() && bare_char(peek())) ++pos_;
    if (pos_ == b) fail("expected a key");
    return std::string(line_text_.substr(b, pos_ - b));
  }

  nlohmann::json& open_table(nlohmann::json& root) {
    ++pos_;
    nlohmann::json* t = &root;
    std::string path;
    for (;;) {
      const std::string k = bare_key();
      path += (path.empty() ? "" : ".") + k;
      if (t->contains(k) && !(*t)[k].is_object()) fail("table '" + path + "' redefines a value");
      t = &(*t)[k];
      if (t->is_null()) *t = nlohmann::json::object();
      skip_ws();
      if (!at_end() && peek() == '.') {
        ++pos_;
        continue;
      }
      break;
    }
    expect(']');
    if (!defined_tables_.insert(path).second) fail("table '" + path + "' defined twice");
    return *t;
  }

  void parse_pair(nlohmann::json& table) {
    const std::string k = bare_key();
    expect('=');
    skip_ws();
    if (table.contains(k)) fail("duplicate key '" + k + "'");
    table[k] = value();
  }

  nlohmann::json value() {
    skip_ws();
    if (at_end()) fail("missing value");
    const char c = peek();
    if (c == '"') return string_value();
    if (c == '[') return array_value();
    const std::size_t b = pos_;
    while (!at_end() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
           peek() != '#')
      ++pos_;
    const std::string tok(line_text_.substr(b, pos_ - b));
    if (tok == "true") return true;
    if (tok == "false") return false;
    return number(tok);
  }

  nlohmann::json number(std::string tok) {
    if (tok.empty()) fail("missing value");
    std::erase(tok, '_');
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "+inf" ||
                          tok == "-inf" || tok == "nan";
    const char* first = tok.data() + (tok.front() == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    if (is_float) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last) fail("malformed number '" + tok + "'");
      return v;
    }
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) fail("malformed value '" + tok + "'");
    return v;
  }

  nlohmann::json string_value() {
    ++pos_;
    std::string out;
    for (;;) {
      if (at_end()) fail("unterminated string");
      const char c = peek();
      ++pos_;
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (at_end()) fail("unterminated escape");
      switch (const char e = peek(); ++pos_, e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail(std::string("unsupported escape '\\") + e + "'");
      }
    }
  }

  nlohmann::json array_value() {
    ++pos_;
    nlohmann::json arr = nlohmann::json::array();
    for (;;) {
      skip_ws();
      if (at_end()) fail("unterminated array (arrays must fit on one line)");
      if (peek() == ']') {
        ++pos_;
        break;
      }
      nlohmann::json v = value();
      if (v.is_array()) fail("nested arrays are not supported");
      if (!arr.empty() && !same_kind(arr.front(), v)) fail("mixed types in array");
      arr.push_back(std::move(v));
      skip_ws();
      if (!at_end() && peek() == ',') ++pos_;
      else if (at_end() || peek() != ']') fail("expected ',' or ']'");
    }
    return arr;
  }

  static bool same_kind(const nlohmann::json& a, const nlohmann::json& b) {
    return (a.is_number() && b.is_number()) || a.type() == b.type();
  }

  std::string_view text_;
  std::string source_;
  std::string_view line_text_;
  std::size_t pos_ = 0;
  int line_ = 0;
  std::set<std::string> defined_tables_;
};

}  // namespace detail

inline nlohmann::json parse_config_text(std::string_view text, std::string source = "<config>") {
  return detail::TomlParser(text, std::move(source)).parse();
}

inline nlohmann::json parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

/// Typed view of one table. Every key read is marked consumed; unconsumed
/// keys are reported by ConfigReader::finish.
class ConfigTable {
 public:
  ConfigTable(const nlohmann::json* node, std::string path, std::set<std::string>* consumed)
      : node_(node), path_(std::move(path)), consumed_(consumed) {}

  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  double number(const std::string& key, double fallback, double lo = -std::numeric_limits<double>::infinity(),
                double hi = std::numeric_limits<double>::infinity()) const {
    const auto* v = lookup(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(key, "expected a number");
    return in_range(key, v->get<double>(), lo, hi);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t lo = 0,
                       std::int64_t hi = std::numeric_limits<std::int64_t>::max()) const {
    const auto* v = lookup(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(key, "expected an integer");
    const auto x = v->get<std::int64_t>();
    if (x < lo || x > hi) fail(key, "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                        std::to_string(hi) + "]");
    return x;
  }

  bool boolean(const std::string& key, bool fallback) const {
    const auto* v = lookup(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(key, "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback,
                     const std::vector<std::string>& allowed = {}) const {
    const auto* v = lookup(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(key, "expected a string");
    auto s = v->get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
      fail(key, "'" + s + "' is not one of: " + opts);
    }
    return s;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback,
                              double lo = -std::numeric_limits<double>::infinity(),
                              double hi = std::numeric_limits<double>::infinity()) const {
    const auto* v = lookup(key);
    if (!v) return fallback;
    if (!v->is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(in_range(key, e.get<double>(), lo, hi));
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) const {
    const auto* v = lookup(key);
    if (!v) return fallback;
    if (!v->is_array()) fail(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *v) {
      if (!e.is_string()) fail(key, "expected an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(qualified(key) + ": " + what);
  }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const nlohmann::json* lookup(const std::string& key) const {
    if (!has(key)) return nullptr;
    const auto& v = (*node_)[key];
    if (v.is_object()) fail(key, "expected a value, found a table");
    consumed_->insert(qualified(key));
    return &v;
  }

  double in_range(const std::string& key, double x, double lo, double hi) const {
    if (!(x >= lo && x <= hi)) {
      std::ostringstream os;
      os << "value " << x << " outside [" << lo << ", " << hi << "]";
      fail(key, os.str());
    }
    return x;
  }

  const nlohmann::json* node_;
  std::string path_;
  std::set<std::string>* consumed_;
};

class ConfigReader {
 public:
  explicit ConfigReader(nlohmann::json root) : root_(std::move(root)) {
    if (!root_.is_object()) throw ConfigError("config root must be a table");
  }

  ConfigTable root() { return {&root_, "", &consumed_}; }

  /// A missing table reads as empty, so every key takes its default.
  ConfigTable table(const std::string& path) {
    const nlohmann::json* node = &root_;
    std::string walked;
    std::size_t b = 0;
    while (node && b <= path.size()) {
      const std::size_t e = std::min(path.find('.', b), path.size());
      const std::string k = path.substr(b, e - b);
      walked += (walked.empty() ? "" : ".") + k;
      if (!node->contains(k)) {
        node = nullptr;
        break;
      }
      node = &(*node)[k];
      if (!node->is_object()) throw ConfigError(walked + ": expected a table");
      b = e + 1;
    }
    if (node) tables_.insert(path);
    return {node, path, &consumed_};
  }

  /// Throws ConfigError naming every key or table that was never read.
  void finish() const {
    std::vector<std::string> unknown;
    collect(root_, "", unknown);
    if (unknown.empty()) return;
    std::string msg = "unknown config key";
    msg += unknown.size() > 1 ? "s: " : ": ";
    for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", " : "") + unknown[i];
    throw ConfigError(msg);
  }

  const nlohmann::json& json() const { return root_; }

 private:
  void collect(const nlohmann::json& node, const std::string& path, std::vector<std::string>& out) const {
    for (const auto& [k, v] : node.items()) {
      const std::string q = path.empty() ? k : path + "." + k;
      if (v.is_object()) {
        if (!tables_.count(q) && !has_prefix(q)) out.push_back("[" + q + "]");
        else collect(v, q, out);
      } else if (!consumed_.count(q)) {
        out.push_back(q);
      }
    }
  }

  bool has_prefix(const std::string& q) const {
    for (const auto& t : tables_)
      if (t.size() > q.size() && t.compare(0, q.size(), q) == 0 && t[q.size()] == '.') return true;
    return false;
  }

  nlohmann::json root_;
  std::set<std::string> consumed_;
  std::set<std::string> tables_;
};

}  // namespace tpc
