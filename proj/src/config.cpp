#include "trapx/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "trapx/constants.hpp"
#include "trapx/csv.hpp"
#include "trapx/errors.hpp"

namespace trapx {

namespace {
std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace

const std::map<std::string, std::string>& Config::defaults() {
  static const std::map<std::string, std::string> d = {
      {"atom.mass_kg", format_sig12(kRb87MassKg)},
      {"laser.wavelength_m", "1.06e-06"},
      {"beam.waist_m", "3e-06"},
      {"trap.f0z_hz", "2500"},
      {"trap.ffz_hz", "250"},
      {"protocol.kind", "invariant"},
      {"protocol.tf_s", "0.001"},
      {"protocol.allow_repulsive", "false"},
      {"state.n", "0"},
      {"state.nu", "0"},
      {"grid.nz", "0"},   // 0 = size from the task
      {"grid.nr", "0"},
      {"grid.dt_s", "0"},  // 0 = stability-capped default step
  };
  return d;
}

Config Config::from_defaults() {
  Config c;
  c.values_ = defaults();
  return c;
}

Config Config::parse_text(const std::string& text) {
  Config c = from_defaults();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file: " + path);
  std::ostringstream body;
  body << f.rdbuf();
  return parse_text(body.str());
}

void Config::set(const std::string& key, const std::string& value) {
  if (defaults().find(key) == defaults().end())
    throw UsageError("unknown config key: " + key);
  if (value.empty()) throw UsageError("empty value for config key: " + key);
  values_[key] = value;
}

void Config::merge(const Config& overrides) {
  for (const auto& [k, v] : overrides.values_)
    if (v != defaults().at(k)) values_[k] = v;
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key: " + key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw UsageError("config key " + key + ": not a number: " + v);
  return x;
}

int Config::get_int(const std::string& key) const {
  double x = get_double(key);
  int i = static_cast<int>(x);
  if (double(i) != x)
    throw UsageError("config key " + key + ": not an integer");
  return i;
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config key " + key + ": not a boolean: " + v);
}

std::string Config::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace trapx
