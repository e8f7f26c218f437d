#include "pdlab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pdlab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      cfg.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    cfg.data_[section][key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

std::vector<std::string> Config::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, kv] : data_) out.push_back(name);
  return out;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end()) throw ConfigError("missing section [" + section + "]");
  const auto k = s->second.find(key);
  if (k == s->second.end())
    throw ConfigError("missing key '" + key + "' in section [" + section + "]");
  return k->second;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string raw = get_string(section, key);
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0')
    throw ConfigError("key '" + key + "' in [" + section + "] is not a number: " + raw);
  return v;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long Config::get_long(const std::string& section, const std::string& key) const {
  const double v = get_double(section, key);
  const long l = static_cast<long>(v);
  if (static_cast<double>(l) != v)
    throw ConfigError("key '" + key + "' in [" + section + "] is not an integer");
  return l;
}

long Config::get_long(const std::string& section, const std::string& key, long fallback) const {
  return has(section, key) ? get_long(section, key) : fallback;
}

std::vector<double> Config::get_vector(const std::string& section,
                                       const std::string& key) const {
  std::istringstream in(get_string(section, key));
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw ConfigError("key '" + key + "' in [" + section + "] has non-numeric entry: " + tok);
    out.push_back(v);
  }
  return out;
}

std::vector<double> Config::get_vector(const std::string& section, const std::string& key,
                                       const std::vector<double>& fallback) const {
  return has(section, key) ? get_vector(section, key) : fallback;
}

std::vector<std::string> Config::get_strings(const std::string& section,
                                             const std::string& key) const {
  std::istringstream in(get_string(section, key));
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace pdlab
