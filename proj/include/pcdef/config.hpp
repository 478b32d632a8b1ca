#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pcdef/common.hpp"

namespace pcdef {

// Thrown for malformed config files and for unknown or ill-typed keys.
class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Flat key-value config with [section] headers, '#' comments, one
// `key = value` pair per line. Every key must be consumed by the reader;
// unknown keys are reported as errors so a typo cannot silently change an
// experiment.
class Config {
public:
  static Config parse_string(const std::string& text, const std::string& origin = "<config>") {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = strip(line);
      if (s.empty() || s[0] == '#') continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw config_error(origin + ":" + std::to_string(line_no) +
                             ": unterminated section header");
        section = strip(s.substr(1, s.size() - 2));
        if (section.empty())
          throw config_error(origin + ":" + std::to_string(line_no) + ": empty section name");
        cfg.sections_[section];
        continue;
      }
      std::size_t eq = s.find('=');
      if (eq == std::string::npos)
        throw config_error(origin + ":" + std::to_string(line_no) +
                           ": expected 'key = value', got '" + s + "'");
      std::string key = strip(s.substr(0, eq));
      std::string value = strip(s.substr(eq + 1));
      if (key.empty())
        throw config_error(origin + ":" + std::to_string(line_no) + ": empty key");
      auto& sec = cfg.sections_[section];
      if (sec.count(key))
        throw config_error(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                           qualify(section, key) + "'");
      sec[key] = value;
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
  }

  bool has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key);
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    consumed_.insert({section, key});
    return sections_.at(section).at(key);
  }

  std::string require_string(const std::string& section, const std::string& key) const {
    if (!has(section, key))
      throw config_error(origin_ + ": missing required key '" + qualify(section, key) + "'");
    consumed_.insert({section, key});
    return sections_.at(section).at(key);
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_double(section, key, get_string(section, key, ""));
  }

  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    return parse_u64(section, key, get_string(section, key, ""));
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get_string(section, key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error(origin_ + ": key '" + qualify(section, key) +
                       "' expects a boolean, got '" + v + "'");
  }

  std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                      std::vector<double> fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    for (const std::string& item : split_list(get_string(section, key, "")))
      out.push_back(parse_double(section, key, item));
    return out;
  }

  std::vector<std::uint64_t> get_u64_list(const std::string& section, const std::string& key,
                                          std::vector<std::uint64_t> fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<std::uint64_t> out;
    for (const std::string& item : split_list(get_string(section, key, "")))
      out.push_back(parse_u64(section, key, item));
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& section, const std::string& key,
                                           std::vector<std::string> fallback) const {
    if (!has(section, key)) return fallback;
    return split_list(get_string(section, key, ""));
  }

  // Norm orders accept "inf".
  double get_norm_order(const std::string& section, const std::string& key,
                        double fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get_string(section, key, "");
    if (v == "inf") return inf_norm_order;
    return parse_double(section, key, v);
  }

  // Every key present in the file must have been read by now.
  void ensure_consumed() const {
    std::vector<std::string> unknown;
    for (const auto& [section, kv] : sections_)
      for (const auto& [key, value] : kv)
        if (!consumed_.count({section, key})) unknown.push_back(qualify(section, key));
    if (!unknown.empty()) {
      std::string msg = origin_ + ": unknown key(s):";
      for (const std::string& k : unknown) msg += " '" + k + "'";
      throw config_error(msg);
    }
  }

private:
  static std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::string qualify(const std::string& section, const std::string& key) {
    return section.empty() ? key : section + "." + key;
  }

  static std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::string s = strip(item);
      if (!s.empty()) out.push_back(s);
    }
    return out;
  }

  double parse_double(const std::string& section, const std::string& key,
                      const std::string& v) const {
    try {
      std::size_t pos = 0;
      double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing junk");
      return x;
    } catch (const std::exception&) {
      throw config_error(origin_ + ": key '" + qualify(section, key) +
                         "' expects a number, got '" + v + "'");
    }
  }

  std::uint64_t parse_u64(const std::string& section, const std::string& key,
                          const std::string& v) const {
    try {
      std::size_t pos = 0;
      unsigned long long x = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing junk");
      return x;
    } catch (const std::exception&) {
      throw config_error(origin_ + ": key '" + qualify(section, key) +
                         "' expects an unsigned integer, got '" + v + "'");
    }
  }

  std::string origin_ = "<config>";
  std::map<std::string, std::map<std::string, std::string>> sections_;
  mutable std::set<std::pair<std::string, std::string>> consumed_;
};

}  // namespace pcdef
