#ifndef SGP_TEXTIO_HPP
#define SGP_TEXTIO_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgp {

// Line-oriented key-value document: "key = value" per line, '#' comments.
// Arrays are whitespace-separated values. Keys keep insertion order so
// re-serialization is byte-stable.
class Document {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& kv : items_) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    items_.emplace_back(key, value);
  }

  void set_int(const std::string& key, long long v) { set(key, std::to_string(v)); }

  void set_double(const std::string& key, double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    set(key, os.str());
  }

  template <typename It>
  void set_array(const std::string& key, It begin, It end) {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (It it = begin; it != end; ++it) {
      if (!first) os << ' ';
      os << *it;
      first = false;
    }
    set(key, os.str());
  }

  template <typename T>
  void set_array(const std::string& key, const std::vector<T>& v) {
    set_array(key, v.begin(), v.end());
  }

  bool has(const std::string& key) const {
    for (const auto& kv : items_)
      if (kv.first == key) return true;
    return false;
  }

  const std::string& get(const std::string& key) const {
    for (const auto& kv : items_)
      if (kv.first == key) return kv.second;
    throw std::runtime_error("document: missing key '" + key + "'");
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    for (const auto& kv : items_)
      if (kv.first == key) return kv.second;
    return fallback;
  }

  long long get_int(const std::string& key) const { return std::stoll(get(key)); }
  double get_double(const std::string& key) const { return std::stod(get(key)); }

  std::vector<double> get_doubles(const std::string& key) const {
    std::istringstream is(get(key));
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    return out;
  }

  std::vector<int> get_ints(const std::string& key) const {
    std::istringstream is(get(key));
    std::vector<int> out;
    int v;
    while (is >> v) out.push_back(v);
    return out;
  }

  std::string to_string() const {
    std::ostringstream os;
    for (const auto& kv : items_) os << kv.first << " = " << kv.second << '\n';
    return os.str();
  }

  void save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << to_string();
  }

  static Document parse(std::istream& in) {
    Document doc;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("document: malformed line '" + line + "'");
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      auto trim = [](std::string& s) {
        auto b = s.find_first_not_of(" \t");
        auto e = s.find_last_not_of(" \t");
        s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
      };
      trim(key);
      trim(value);
      doc.items_.emplace_back(key, value);
    }
    return doc;
  }

  static Document load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    return parse(f);
  }

  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

}  // namespace sgp

#endif
