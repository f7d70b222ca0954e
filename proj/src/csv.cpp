#include "trapx/csv.hpp"

#include <cstdio>
#include <fstream>

#include "trapx/errors.hpp"

namespace trapx {

std::string format_sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::uint64_t fnv1a_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> names,
                   std::vector<std::string> units)
    : names_(std::move(names)), units_(std::move(units)) {
  if (names_.empty() || names_.size() != units_.size())
    throw UsageError("csv table needs matching column names and units");
}

void CsvTable::comment(std::string line) {
  comments_.push_back(std::move(line));
}

void CsvTable::row(std::vector<Cell> cells) {
  if (cells.size() != names_.size())
    throw UsageError("csv row width does not match the columns");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str(std::uint64_t manifest_hash) const {
  std::string out;
  out += "# units:";
  for (std::size_t i = 0; i < names_.size(); ++i)
    out += (i ? ", " : " ") + names_[i] + " [" + units_[i] + "]";
  out += "\n# manifest: fnv1a:" + hash_hex(manifest_hash) + "\n";
  for (const auto& c : comments_) out += "# " + c + "\n";
  for (std::size_t i = 0; i < names_.size(); ++i)
    out += (i ? "," : "") + names_[i];
  out += "\n";
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ",";
      if (const double* d = std::get_if<double>(&r[i]))
        out += format_sig12(*d);
      else
        out += std::get<std::string>(r[i]);
    }
    out += "\n";
  }
  return out;
}

void CsvTable::write(const std::string& path,
                     std::uint64_t manifest_hash) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open for writing: " + path);
  f << str(manifest_hash);
}

}  // namespace trapx
