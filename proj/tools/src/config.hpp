#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gridlab/types.hpp>

namespace gridlab::cli {

// A validation failure tied to one config key ("section.key").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& msg)
      : std::runtime_error(key + ": " + msg), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Sectioned key = value text. Sections and keys are kept sorted, so
// to_text(parse(s)) is canonical and parse(to_text(d)) == d.
class ConfigDoc {
 public:
  using Section = std::map<std::string, std::string>;

  static ConfigDoc parse(const std::string& text);
  static ConfigDoc load(const std::string& path);
  std::string to_text() const;

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, std::string value);
  const std::map<std::string, Section>& sections() const { return sections_; }
  std::vector<std::string> sections_with_prefix(const std::string& prefix) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& section, const std::string& key,
                         std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;
  // Rows separated by ';', entries by ','.
  Matrix get_matrix(const std::string& section, const std::string& key, int rows,
                    int cols) const;
  Vector get_vector(const std::string& section, const std::string& key, int size) const;

  bool operator==(const ConfigDoc&) const = default;

 private:
  std::map<std::string, Section> sections_;
};

std::string key_name(const std::string& section, const std::string& key);

}  // namespace gridlab::cli
