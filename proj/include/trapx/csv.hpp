#pragma once
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace trapx {

// 12 significant digits, '.' decimal separator, no locale dependence.
std::string format_sig12(double v);

// FNV-1a 64-bit, used to stamp every CSV with its manifest hash.
std::uint64_t fnv1a_hash(std::string_view s);
std::string hash_hex(std::uint64_t h);

using Cell = std::variant<double, std::string>;

// One output table.  Emission layout, fully deterministic (no timestamps):
//   # <comment lines, units first, manifest hash second>
//   name,name,...
//   data rows
class CsvTable {
 public:
  CsvTable(std::vector<std::string> names, std::vector<std::string> units);

  void comment(std::string line);             // emitted after units/hash
  void row(std::vector<Cell> cells);          // size must match columns
  int rows() const { return static_cast<int>(rows_.size()); }

  std::string str(std::uint64_t manifest_hash) const;
  void write(const std::string& path, std::uint64_t manifest_hash) const;

 private:
  std::vector<std::string> names_, units_, comments_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace trapx
