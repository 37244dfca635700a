#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace qtf::config {

/// key=value lines, '#' comments. Flags override file values; file values
/// override defaults.
class KeyValues {
 public:
  static KeyValues load(const std::string& path);
  static KeyValues parse(std::istream& in);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace qtf::config
