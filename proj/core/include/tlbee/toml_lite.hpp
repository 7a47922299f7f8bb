#ifndef TLBEE_TOML_LITE_HPP
#define TLBEE_TOML_LITE_HPP

#include <map>
#include <string>
#include <vector>

namespace tlbee {

/// Minimal TOML subset: [section] headers, key = value pairs, values of
/// type string, number, boolean, or flat array; # comments.  Keys are
/// flattened to "section.key".
class TomlLite {
 public:
  static TomlLite parse_file(const std::string& path);
  static TomlLite parse_string(const std::string& text);

  bool has(const std::string& key) const;
  double get_number(const std::string& key) const;
  double get_number_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key,
                            const std::string& fallback) const;
  std::vector<double> get_number_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;

  const std::map<std::string, std::vector<std::string>>& raw() const {
    return values_;
  }

 private:
  // every value is stored as its token list (singletons for scalars)
  std::map<std::string, std::vector<std::string>> values_;
};

}  // namespace tlbee

#endif  // TLBEE_TOML_LITE_HPP
