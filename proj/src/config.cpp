#include "semrank/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "semrank/errors.hpp"

namespace semrank {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string cleaned = trim(line);
    if (cleaned.empty()) continue;
    std::size_t eq = cleaned.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(line_no) + " is not key=value");
    std::string key = trim(cleaned.substr(0, eq));
    std::string value = trim(cleaned.substr(eq + 1));
    if (key.empty())
      throw DataError("empty key in config at line " + std::to_string(line_no));
    config.values_[key] = value;
  }
  return config;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  auto raw = get(key);
  if (!raw) return std::nullopt;
  try {
    return std::stod(*raw);
  } catch (const std::exception&) {
    throw DataError("config value for " + key + " is not a number: " + *raw);
  }
}

std::optional<long> KeyValueConfig::get_int(const std::string& key) const {
  auto raw = get(key);
  if (!raw) return std::nullopt;
  try {
    return std::stol(*raw);
  } catch (const std::exception&) {
    throw DataError("config value for " + key + " is not an integer: " + *raw);
  }
}

}  // namespace semrank
