#include "mvreg/structured_text.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mvreg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void parse_into(StNode& node, std::istream& in, int& line_no, bool top_level) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "}") {
      if (top_level) throw std::runtime_error("structured text: unmatched '}' at line " +
                                              std::to_string(line_no));
      return;
    }
    if (line.back() == '{') {
      const std::string key = trim(line.substr(0, line.size() - 1));
      if (key.empty())
        throw std::runtime_error("structured text: block without key at line " +
                                 std::to_string(line_no));
      StNode child;
      parse_into(child, in, line_no, false);
      node.children.emplace_back(key, std::move(child));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("structured text: expected 'key = value' or 'key {' at line " +
                               std::to_string(line_no));
    node.values.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (!top_level)
    throw std::runtime_error("structured text: missing closing '}' at end of input");
}

}  // namespace

bool StNode::has(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return true;
  return false;
}

const std::string& StNode::get(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  throw std::out_of_range("structured text: missing key '" + key + "'");
}

std::string StNode::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

std::vector<std::string> StNode::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values)
    if (k == key) out.push_back(v);
  return out;
}

const StNode* StNode::child(const std::string& key) const {
  for (const auto& [k, c] : children)
    if (k == key) return &c;
  return nullptr;
}

double StNode::get_double(const std::string& key) const {
  const std::string& s = get(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("structured text: key '" + key + "' is not a number: '" + s + "'");
  }
}

long long StNode::get_int(const std::string& key) const {
  const std::string& s = get(key);
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("structured text: key '" + key + "' is not an integer: '" + s + "'");
  }
}

void StNode::set(const std::string& key, const std::string& value) {
  values.emplace_back(key, value);
}

void StNode::set_double(const std::string& key, double value) { set(key, format_double(value)); }

void StNode::set_int(const std::string& key, long long value) { set(key, std::to_string(value)); }

StNode& StNode::add_child(const std::string& key) {
  children.emplace_back(key, StNode{});
  return children.back().second;
}

StNode parse_structured_text(const std::string& text) {
  std::istringstream in(text);
  StNode root;
  int line_no = 0;
  parse_into(root, in, line_no, true);
  return root;
}

StNode load_structured_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_structured_text(buf.str());
}

void write_structured_text(std::ostream& out, const StNode& node, int indent) {
  const std::string pad(2 * indent, ' ');
  for (const auto& [k, v] : node.values) out << pad << k << " = " << v << "\n";
  for (const auto& [k, c] : node.children) {
    out << pad << k << " {\n";
    write_structured_text(out, c, indent + 1);
    out << pad << "}\n";
  }
}

void save_structured_file(const std::string& path, const StNode& node) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_structured_text(out, node);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace mvreg
