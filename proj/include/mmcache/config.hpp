#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mmcache {

// Flat key-value configuration: one `section.key = value` per line, '#'
// comments. Unset keys fall back to the defaults passed at the call site.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_str(const std::string& key, const std::string& def) const;
  double get_f64(const std::string& key, double def) const;
  std::int64_t get_i64(const std::string& key, std::int64_t def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;

  // Comma-separated lists; empty string means empty list.
  std::vector<std::string> get_str_list(const std::string& key, const std::string& def) const;
  std::vector<double> get_f64_list(const std::string& key, const std::string& def) const;
  std::vector<std::int64_t> get_i64_list(const std::string& key, const std::string& def) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key, const std::string& def) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace mmcache
