#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdlab {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Sectioned key = value text configuration. Lines starting with '#' (or
/// inline ' #') are comments; values in list context are whitespace-separated.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long get_long(const std::string& section, const std::string& key) const;
  long get_long(const std::string& section, const std::string& key, long fallback) const;
  std::vector<double> get_vector(const std::string& section, const std::string& key) const;
  std::vector<double> get_vector(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;
  /// All values under a key repeated across lines is not supported; lists of
  /// strings use whitespace separation like numeric vectors.
  std::vector<std::string> get_strings(const std::string& section,
                                       const std::string& key) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
};

}  // namespace pdlab
