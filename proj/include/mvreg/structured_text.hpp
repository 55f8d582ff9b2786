#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mvreg {

// Brace-delimited key/value document used by config files and manifests:
//
//   scene {
//     n_scans = 8
//     gt { pose = 1 0 0 0 1 0 0 0 1 0 0 0 }
//   }
//
// Keys may repeat; order is preserved. '#' starts a comment.
struct StNode {
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::pair<std::string, StNode>> children;

  bool has(const std::string& key) const;
  // First value for key; throws std::out_of_range when absent.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  std::vector<std::string> get_all(const std::string& key) const;
  const StNode* child(const std::string& key) const;  // nullptr when absent

  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);
  StNode& add_child(const std::string& key);
};

StNode parse_structured_text(const std::string& text);
StNode load_structured_file(const std::string& path);
void write_structured_text(std::ostream& out, const StNode& node, int indent = 0);
void save_structured_file(const std::string& path, const StNode& node);

// 17-significant-digit decimal rendering; round-trips doubles exactly.
std::string format_double(double v);

}  // namespace mvreg
