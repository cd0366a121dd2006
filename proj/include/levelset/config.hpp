#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "levelset/error.hpp"

namespace lsk {

// A small TOML subset: [table] headers, key = value, '#' comments.
// Values are numbers, booleans, "strings", or flat arrays of those.
using ConfigScalar = std::variant<double, bool, std::string>;

struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<ConfigScalar>> v;
  int line = 0;
};

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>") {
    Config c;
    c.origin_ = origin;
    std::istringstream in(text);
    std::string raw, table;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string s = strip(strip_comment(raw));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') c.fail(line, "unterminated table header");
        table = strip(s.substr(1, s.size() - 2));
        if (table.empty() || !valid_key(table)) c.fail(line, "bad table name '" + table + "'");
        if (!c.tables_.insert(table).second) c.fail(line, "duplicate table [" + table + "]");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) c.fail(line, "expected key = value");
      const std::string key = strip(s.substr(0, eq));
      if (!valid_key(key)) c.fail(line, "bad key '" + key + "'");
      const std::string full = table.empty() ? key : table + "." + key;
      if (c.values_.count(full)) c.fail(line, "duplicate key '" + full + "'");
      ConfigValue v{c.parse_value(strip(s.substr(eq + 1)), line), line};
      c.values_.emplace(full, std::move(v));
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& origin() const { return origin_; }

  double number(const std::string& key) const { return as<double>(key, "a number"); }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
  int integer(const std::string& key) const {
    const double d = number(key);
    if (d != static_cast<double>(static_cast<long long>(d)) || d > 1e9 || d < -1e9)
      throw ConfigError(where(key) + "'" + key + "' must be an integer");
    return static_cast<int>(d);
  }
  int integer(const std::string& key, int fallback) const { return has(key) ? integer(key) : fallback; }
  bool boolean(const std::string& key, bool fallback) const { return has(key) ? as<bool>(key, "true or false") : fallback; }
  std::string string(const std::string& key) const { return as<std::string>(key, "a string"); }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }
  std::vector<double> numbers(const std::string& key) const {
    const auto& arr = array(key);
    std::vector<double> out;
    for (const auto& s : arr) {
      if (!std::holds_alternative<double>(s)) throw ConfigError(where(key) + "'" + key + "' must hold numbers");
      out.push_back(std::get<double>(s));
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& key) const {
    const auto& arr = array(key);
    std::vector<std::string> out;
    for (const auto& s : arr) {
      if (!std::holds_alternative<std::string>(s)) throw ConfigError(where(key) + "'" + key + "' must hold strings");
      out.push_back(std::get<std::string>(s));
    }
    return out;
  }

  // Every key not read so far; reading marks keys as known.
  std::vector<std::string> unread() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!read_.count(k)) out.push_back(k);
    return out;
  }
  void mark_read(const std::string& key) const { read_.insert(key); }
  // Marks every key under a table as read.
  void ignore_table(const std::string& table) const {
    for (const auto& [k, v] : values_)
      if (k.rfind(table + ".", 0) == 0) read_.insert(k);
  }
  void reject_unknown() const {
    const auto u = unread();
    if (!u.empty()) throw ConfigError(where(u.front()) + "unknown key '" + u.front() + "'");
  }

 private:
  std::map<std::string, ConfigValue> values_;
  std::set<std::string> tables_;
  mutable std::set<std::string> read_;
  std::string origin_;

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

  std::string where(const std::string& key) const {
    auto it = values_.find(key);
    return origin_ + (it != values_.end() ? ":" + std::to_string(it->second.line) : std::string()) + ": ";
  }

  const ConfigValue& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
    read_.insert(key);
    return it->second;
  }

  template <class T>
  const T& as(const std::string& key, const char* what) const {
    const auto& v = get(key);
    if (auto* p = std::get_if<T>(&v.v)) return *p;
    throw ConfigError(where(key) + "'" + key + "' must be " + what);
  }

  const std::vector<ConfigScalar>& array(const std::string& key) const {
    return as<std::vector<ConfigScalar>>(key, "an array");
  }

  static std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  static std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
      if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
  }

  static bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char ch : k)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) return false;
    return k.front() != '.' && k.back() != '.';
  }

  ConfigScalar parse_scalar(const std::string& s, int line) const {
    if (s.empty()) fail(line, "missing value");
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '"') {
      if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
      std::string out;
      for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '\\' && i + 2 < s.size()) {
          const char n = s[++i];
          out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
        } else {
          out += s[i];
        }
      }
      return out;
    }
    std::string num;
    for (char ch : s)
      if (ch != '_') num += ch;
    if (!num.empty() && num.front() == '+') num.erase(0, 1);
    double d = 0.0;
    const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
    if (ec != std::errc() || p != num.data() + num.size()) fail(line, "cannot parse value '" + s + "'");
    return d;
  }

  decltype(ConfigValue::v) parse_value(const std::string& s, int line) const {
    if (!s.empty() && s.front() == '[') {
      if (s.back() != ']') fail(line, "arrays must close on the same line");
      std::vector<ConfigScalar> arr;
      std::string item;
      bool quoted = false;
      const std::string body = s.substr(1, s.size() - 2);
      for (std::size_t i = 0; i <= body.size(); ++i) {
        const char ch = i < body.size() ? body[i] : ',';
        if (ch == '"') quoted = !quoted;
        if (ch == ',' && !quoted) {
          const std::string t = strip(item);
          if (!t.empty()) arr.push_back(parse_scalar(t, line));
          else if (i < body.size()) fail(line, "empty array element");
          item.clear();
        } else {
          item += ch;
        }
      }
      return arr;
    }
    ConfigScalar sc = parse_scalar(s, line);
    return std::visit([](auto&& x) -> decltype(ConfigValue::v) { return x; }, sc);
  }
};

}  // namespace lsk
