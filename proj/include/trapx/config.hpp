#pragma once
#include <map>
#include <string>
#include <vector>

namespace trapx {

// Flat `key = value` text with dotted keys; '#' starts a comment.  Unknown
// keys are rejected so typos fail loudly.  Later assignments win, which is
// also how command-line overrides are applied.
class Config {
 public:
  static const std::map<std::string, std::string>& defaults();

  static Config from_defaults();
  static Config parse_text(const std::string& text);
  static Config parse_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  void merge(const Config& overrides);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // Deterministic key = value dump of the resolved configuration.
  std::string canonical_text() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace trapx
