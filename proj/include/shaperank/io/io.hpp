#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace shaperank::io {

// Shortest decimal rendering that parses back to the same double, so files
// are byte-stable across reruns and lossless across a read/write cycle.
// Non-finite values spell out as inf/-inf/nan.
std::string format_double(double v);
double parse_double(const std::string& text);  // throws InputError
int parse_int(const std::string& text);        // throws InputError

// 64-bit FNV-1a, used to stamp outputs with the config they came from.
std::uint64_t fnv1a64(const std::string& data);

// Flat configuration: one `dotted.key = value` per line, '#' starts a
// comment, later duplicates win. serialize() emits sorted keys and
// round-trips losslessly.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);
  std::string serialize() const;

  // 16 hex digits of fnv1a64(serialize()); the provenance stamp.
  std::string hash() const;

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated integer list, e.g. "100,300,500".
  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// CSV with a versioned magic line and sorted `# key=value` provenance
// comments ahead of the header row. Cells containing separators are quoted
// RFC-style.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> provenance;

  void add_row(std::vector<std::string> row);  // throws on width mismatch
};

inline constexpr const char* kCsvMagic = "# shaperank csv v1";

std::string format_table(const Table& table);
Table parse_table(const std::string& text);  // throws InputError

// File helpers; errors name the offending path. Writes go to a temporary
// sibling first and land via rename, so partial outputs never appear, and
// parent directories are created on demand.
std::string read_text(const std::filesystem::path& path);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

}  // namespace shaperank::io
