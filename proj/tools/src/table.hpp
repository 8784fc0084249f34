#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridlab::cli {

// 17 significant digits, '.' decimal separator.
std::string num(double v);
std::string num(std::int64_t v);
std::string num(std::uint64_t v);
inline std::string num(int v) { return num(static_cast<std::int64_t>(v)); }

// RFC 4180 field quoting.
std::string csv_field(const std::string& field);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string to_csv() const;
};

}  // namespace gridlab::cli
