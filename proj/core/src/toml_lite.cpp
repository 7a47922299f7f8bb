#include "tlbee/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tlbee {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& tok) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
    return tok.substr(1, tok.size() - 2);
  return tok;
}

std::vector<std::string> split_array(const std::string& body, int line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool in_str = false;
  for (char ch : body) {
    if (ch == '"') in_str = !in_str;
    if (ch == ',' && !in_str) {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  const std::string t = trim(cur);
  if (!t.empty()) out.push_back(t);
  if (in_str)
    throw std::runtime_error("toml: unterminated string on line " +
                             std::to_string(line_no));
  return out;
}

}  // namespace

TomlLite TomlLite::parse_string(const std::string& text) {
  TomlLite toml;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("toml: malformed section on line " +
                                 std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("toml: expected key = value on line " +
                               std::to_string(line_no));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::runtime_error("toml: empty key or value on line " +
                               std::to_string(line_no));
    if (!section.empty()) key = section + "." + key;
    if (val.front() == '[') {
      if (val.back() != ']')
        throw std::runtime_error("toml: unterminated array on line " +
                                 std::to_string(line_no));
      toml.values_[key] = split_array(val.substr(1, val.size() - 2), line_no);
    } else {
      toml.values_[key] = {val};
    }
  }
  return toml;
}

TomlLite TomlLite::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("toml: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool TomlLite::has(const std::string& key) const {
  return values_.count(key) != 0;
}

static const std::vector<std::string>* find_or_null(
    const std::map<std::string, std::vector<std::string>>& m,
    const std::string& key) {
  const auto it = m.find(key);
  return it == m.end() ? nullptr : &it->second;
}

double TomlLite::get_number(const std::string& key) const {
  const auto* v = find_or_null(values_, key);
  if (v == nullptr || v->size() != 1)
    throw std::runtime_error("toml: missing scalar key '" + key + "'");
  try {
    std::size_t pos = 0;
    const double x = std::stod(v->front(), &pos);
    if (pos != v->front().size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("toml: key '" + key + "' is not a number");
  }
}

double TomlLite::get_number_or(const std::string& key, double fallback) const {
  return has(key) ? get_number(key) : fallback;
}

long long TomlLite::get_int(const std::string& key) const {
  const double x = get_number(key);
  const auto i = static_cast<long long>(x);
  if (static_cast<double>(i) != x)
    throw std::runtime_error("toml: key '" + key + "' is not an integer");
  return i;
}

long long TomlLite::get_int_or(const std::string& key,
                               long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool TomlLite::get_bool_or(const std::string& key, bool fallback) const {
  const auto* v = find_or_null(values_, key);
  if (v == nullptr) return fallback;
  if (v->size() == 1 && v->front() == "true") return true;
  if (v->size() == 1 && v->front() == "false") return false;
  throw std::runtime_error("toml: key '" + key + "' is not a boolean");
}

std::string TomlLite::get_string(const std::string& key) const {
  const auto* v = find_or_null(values_, key);
  if (v == nullptr || v->size() != 1)
    throw std::runtime_error("toml: missing string key '" + key + "'");
  return unquote(v->front());
}

std::string TomlLite::get_string_or(const std::string& key,
                                    const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::vector<double> TomlLite::get_number_list(const std::string& key) const {
  const auto* v = find_or_null(values_, key);
  if (v == nullptr)
    throw std::runtime_error("toml: missing list key '" + key + "'");
  std::vector<double> out;
  for (const std::string& tok : *v) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::runtime_error("toml: non-numeric entry in '" + key + "'");
    }
  }
  return out;
}

std::vector<std::string> TomlLite::get_string_list(
    const std::string& key) const {
  const auto* v = find_or_null(values_, key);
  if (v == nullptr)
    throw std::runtime_error("toml: missing list key '" + key + "'");
  std::vector<std::string> out;
  for (const std::string& tok : *v) out.push_back(unquote(tok));
  return out;
}

}  // namespace tlbee
