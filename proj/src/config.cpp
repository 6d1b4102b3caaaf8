#include "mmcache/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mmcache {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const std::size_t a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : raw) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  const std::string last = trim(cur);
  if (!last.empty() || !out.empty()) {
    if (!last.empty()) out.push_back(last);
  }
  return out;
}

double to_f64(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument("config key '" + key + "': bad number '" + s + "'");
  return v;
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::string Config::get_str(const std::string& key, const std::string& def) const {
  const auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double Config::get_f64(const std::string& key, double def) const {
  const auto it = values_.find(key);
  return it == values_.end() ? def : to_f64(key, it->second);
}

std::int64_t Config::get_i64(const std::string& key, std::int64_t def) const {
  // Values like "4e8" are accepted for byte counts, so parse via double
  // when an integer parse does not consume the whole token.
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  const double v = to_f64(key, it->second);
  return static_cast<std::int64_t>(v);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  return static_cast<std::uint64_t>(to_f64(key, it->second));
}

bool Config::get_bool(const std::string& key, bool def) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config key '" + key + "': bad boolean '" + v + "'");
}

std::vector<std::string> Config::get_str_list(const std::string& key, const std::string& def) const {
  return split_list(get_str(key, def));
}

std::vector<double> Config::get_f64_list(const std::string& key, const std::string& def) const {
  std::vector<double> out;
  for (const auto& tok : get_str_list(key, def)) out.push_back(to_f64(key, tok));
  return out;
}

std::vector<std::int64_t> Config::get_i64_list(const std::string& key, const std::string& def) const {
  std::vector<std::int64_t> out;
  for (const auto& tok : get_str_list(key, def)) out.push_back(static_cast<std::int64_t>(to_f64(key, tok)));
  return out;
}

std::vector<std::uint64_t> Config::get_u64_list(const std::string& key, const std::string& def) const {
  std::vector<std::uint64_t> out;
  for (const auto& tok : get_str_list(key, def)) out.push_back(static_cast<std::uint64_t>(to_f64(key, tok)));
  return out;
}

}  // namespace mmcache
