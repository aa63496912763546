#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace goursat {

double parse_double(const std::string& text);
long long parse_integer(const std::string& text);
std::vector<double> parse_double_list(const std::string& text, char separator = ',');

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// 17 significant digits in scientific notation, so values round-trip exactly.
std::string format_double(double value);

// SHA-1 of "blob <size>\0<content>", i.e. what `git hash-object` prints.
std::string git_blob_hash(const std::string& content);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const std::vector<double>& row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

// Ordered key=value text used for configs and manifests.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Parses `key=value` lines; `#` starts a comment. Later keys override earlier ones.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace goursat
