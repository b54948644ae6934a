#include "shaperank/io/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "shaperank/core/error.hpp"

namespace shaperank::io {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  if (!current.empty()) lines.push_back(current);
  return lines;
}

std::string quote_cell(const std::string& cell) {
  if (cell.find_first_of("\n\r") != std::string::npos)
    throw InputError("table cell contains a line break");
  if (cell.find_first_of(",\"") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

// One CSV record; handles quoted cells with doubled quotes.
std::vector<std::string> split_record(const std::string& line, int line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && cell.empty()) {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (quoted)
    throw InputError("csv line " + std::to_string(line_no) + ": unterminated quote");
  cells.push_back(cell);
  return cells;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  const std::string t = trim(text);
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw InputError("not a number: '" + text + "'");
  return value;
}

int parse_int(const std::string& text) {
  const std::string t = trim(text);
  int value = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw InputError("not an integer: '" + text + "'");
  return value;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Config Config::parse(const std::string& text) {
  Config config;
  const auto lines = split_lines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(i + 1) +
                       ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw InputError("config line " + std::to_string(i + 1) + ": empty key");
    config.values_[key] = value;
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  try {
    return parse(read_text(path));
  } catch (const InputError& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [key, value] : values_) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  }
  return out;
}

std::string Config::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize())));
  return buf;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_double(it->second);
  } catch (const InputError&) {
    throw InputError("config key '" + key + "': not a number: '" + it->second + "'");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_int(it->second);
  } catch (const InputError&) {
    throw InputError("config key '" + key + "': not an integer: '" + it->second + "'");
  }
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string t = trim(it->second);
  std::uint64_t value = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw InputError("config key '" + key + "': not an unsigned integer: '" +
                     it->second + "'");
  return value;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string t = trim(it->second);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw InputError("config key '" + key + "': not a boolean: '" + it->second + "'");
}

std::vector<int> Config::get_int_list(const std::string& key,
                                      const std::vector<int>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  std::string item;
  std::stringstream ss(it->second);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(parse_int(item));
    } catch (const InputError&) {
      throw InputError("config key '" + key + "': not an integer list: '" +
                       it->second + "'");
    }
  }
  if (out.empty())
    throw InputError("config key '" + key + "': empty list");
  return out;
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size())
    throw InputError("table row has " + std::to_string(row.size()) +
                     " cells, expected " + std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::string format_table(const Table& table) {
  if (table.columns.empty()) throw InputError("table has no columns");
  std::string out = kCsvMagic;
  out += "\n";
  for (const auto& [key, value] : table.provenance) {
    out += "# ";
    out += key;
    out += "=";
    out += value;
    out += "\n";
  }
  for (size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out += ",";
    out += quote_cell(table.columns[j]);
  }
  out += "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw InputError("table row width mismatch");
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) out += ",";
      out += quote_cell(row[j]);
    }
    out += "\n";
  }
  return out;
}

Table parse_table(const std::string& text) {
  const auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != kCsvMagic)
    throw InputError(std::string("csv: missing magic line '") + kCsvMagic + "'");
  Table table;
  size_t i = 1;
  for (; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    if (line[0] != '#') break;
    const std::string body = trim(line.substr(1));
    const size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw InputError("csv line " + std::to_string(i + 1) +
                       ": malformed provenance comment '" + line + "'");
    table.provenance[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
  }
  if (i >= lines.size()) throw InputError("csv: missing header row");
  table.columns = split_record(lines[i], static_cast<int>(i + 1));
  for (++i; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto cells = split_record(lines[i], static_cast<int>(i + 1));
    if (cells.size() != table.columns.size())
      throw InputError("csv line " + std::to_string(i + 1) + ": expected " +
                       std::to_string(table.columns.size()) + " cells, got " +
                       std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputError("read failed for " + path.string());
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path parent = path.parent_path();
  std::error_code ec;
  if (!parent.empty()) {
    std::filesystem::create_directories(parent, ec);
    if (ec) throw InputError("cannot create directory " + parent.string());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw InputError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot move output into place at " + path.string());
  }
}

void write_table(const std::filesystem::path& path, const Table& table) {
  write_text_atomic(path, format_table(table));
}

Table read_table(const std::filesystem::path& path) {
  try {
    return parse_table(read_text(path));
  } catch (const InputError& e) {
    const std::string what = e.what();
    if (what.find(path.string()) != std::string::npos) throw;
    throw InputError(path.string() + ": " + what);
  }
}

}  // namespace shaperank::io
