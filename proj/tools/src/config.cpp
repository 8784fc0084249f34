#include "config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gridlab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

double parse_double(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(key, "expected a number, got an empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError(key, "expected a number, got '" + t + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

std::string key_name(const std::string& section, const std::string& key) {
  return "[" + section + "] " + key;
}

ConfigDoc ConfigDoc::parse(const std::string& text) {
  ConfigDoc doc;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) throw ConfigError(where, "invalid section name");
      doc.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected key = value");
    if (section.empty()) throw ConfigError(where, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) throw ConfigError(where, "invalid key name '" + key + "'");
    auto& sec = doc.sections_[section];
    if (sec.count(key) != 0) {
      throw ConfigError(key_name(section, key), "duplicate key");
    }
    sec[key] = trim(line.substr(eq + 1));
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ConfigDoc::to_text() const {
  std::string out;
  bool first = true;
  for (const auto& [name, sec] : sections_) {
    if (!first) out += "\n";
    first = false;
    out += "[" + name + "]\n";
    for (const auto& [k, v] : sec) out += k + " = " + v + "\n";
  }
  return out;
}

bool ConfigDoc::has_section(const std::string& section) const {
  return sections_.count(section) != 0;
}

bool ConfigDoc::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) != 0;
}

void ConfigDoc::set(const std::string& section, const std::string& key,
                    std::string value) {
  sections_[section][key] = std::move(value);
}

std::vector<std::string> ConfigDoc::sections_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, sec] : sections_) {
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  }
  return out;
}

std::string ConfigDoc::get_string(const std::string& section,
                                  const std::string& key) const {
  if (!has(section, key)) throw ConfigError(key_name(section, key), "missing required key");
  return sections_.at(section).at(key);
}

std::string ConfigDoc::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  return has(section, key) ? sections_.at(section).at(key) : fallback;
}

double ConfigDoc::get_double(const std::string& section, const std::string& key) const {
  return parse_double(get_string(section, key), key_name(section, key));
}

double ConfigDoc::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ConfigDoc::get_int(const std::string& section, const std::string& key) const {
  const std::string name = key_name(section, key);
  const std::string t = get_string(section, key);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError(name, "expected an integer, got '" + t + "'");
  }
  return v;
}

std::int64_t ConfigDoc::get_int(const std::string& section, const std::string& key,
                                std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t ConfigDoc::get_uint(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string t = get_string(section, key);
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t.front() == '-' || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError(key_name(section, key),
                      "expected a nonnegative integer, got '" + t + "'");
  }
  return v;
}

bool ConfigDoc::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string t = get_string(section, key);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key_name(section, key), "expected true or false, got '" + t + "'");
}

std::vector<double> ConfigDoc::get_list(const std::string& section,
                                        const std::string& key) const {
  const std::string name = key_name(section, key);
  std::vector<double> out;
  for (const auto& item : split(get_string(section, key), ',')) {
    out.push_back(parse_double(item, name));
  }
  return out;
}

Matrix ConfigDoc::get_matrix(const std::string& section, const std::string& key,
                             int rows, int cols) const {
  const std::string name = key_name(section, key);
  const auto row_texts = split(get_string(section, key), ';');
  if (static_cast<int>(row_texts.size()) != rows) {
    throw ConfigError(name, "expected " + std::to_string(rows) + " rows separated by ';'");
  }
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto items = split(row_texts[static_cast<std::size_t>(i)], ',');
    if (static_cast<int>(items.size()) != cols) {
      throw ConfigError(name, "expected " + std::to_string(cols) + " entries per row");
    }
    for (int j = 0; j < cols; ++j) {
      out(i, j) = parse_double(items[static_cast<std::size_t>(j)], name);
    }
  }
  return out;
}

Vector ConfigDoc::get_vector(const std::string& section, const std::string& key,
                             int size) const {
  const auto values = get_list(section, key);
  if (static_cast<int>(values.size()) != size) {
    throw ConfigError(key_name(section, key),
                      "expected " + std::to_string(size) + " comma-separated entries");
  }
  return Eigen::Map<const Vector>(values.data(), size);
}

}  // namespace gridlab::cli
