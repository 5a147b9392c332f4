#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace irscrlb {

/// Raised for malformed or unknown configuration keys. what() names the key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Flat `key = value` text. `#` starts a comment; blank lines are ignored;
/// duplicate keys are rejected.
std::vector<KvEntry> parse_kv(std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

double kv_to_double(const KvEntry& entry);
std::int64_t kv_to_int(const KvEntry& entry);
std::uint64_t kv_to_uint(const KvEntry& entry);
/// Splits on commas and/or whitespace.
std::vector<std::string> kv_to_list(const KvEntry& entry);
std::vector<double> kv_to_doubles(const KvEntry& entry);

/// Shortest text that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace irscrlb
