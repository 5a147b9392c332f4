#include "irscrlb/kv_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace irscrlb {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::invalid_argument("config key '" + key + "': " + message), key_(std::move(key)) {}

std::vector<KvEntry> parse_kv(std::string_view text) {
  std::vector<KvEntry> entries;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "line " + std::to_string(line_no) + " has no '='");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + " has an empty key");
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    entries.push_back({std::move(key), std::move(value), line_no});
  }
  return entries;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double kv_to_double(const KvEntry& entry) {
  const std::string& v = entry.value;
  if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto* first = v.data();
  const auto* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || v.empty()) {
    throw ConfigError(entry.key, "expected a number, got '" + v + "'");
  }
  return out;
}

std::int64_t kv_to_int(const KvEntry& entry) {
  std::int64_t out = 0;
  const auto* last = entry.value.data() + entry.value.size();
  auto [ptr, ec] = std::from_chars(entry.value.data(), last, out);
  if (ec != std::errc{} || ptr != last || entry.value.empty()) {
    throw ConfigError(entry.key, "expected an integer, got '" + entry.value + "'");
  }
  return out;
}

std::uint64_t kv_to_uint(const KvEntry& entry) {
  std::uint64_t out = 0;
  const auto* last = entry.value.data() + entry.value.size();
  auto [ptr, ec] = std::from_chars(entry.value.data(), last, out);
  if (ec != std::errc{} || ptr != last || entry.value.empty()) {
    throw ConfigError(entry.key, "expected a non-negative integer, got '" + entry.value + "'");
  }
  return out;
}

std::vector<std::string> kv_to_list(const KvEntry& entry) {
  std::vector<std::string> out;
  std::string token;
  for (char c : entry.value) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) out.push_back(std::move(token));
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (!token.empty()) out.push_back(std::move(token));
  return out;
}

std::vector<double> kv_to_doubles(const KvEntry& entry) {
  std::vector<double> out;
  for (auto& tok : kv_to_list(entry)) out.push_back(kv_to_double({entry.key, tok, entry.line}));
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace irscrlb
