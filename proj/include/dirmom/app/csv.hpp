#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dirmom::app {

/// Distinct categories of input-file violations; every FormatError carries one
/// plus the 1-based line it was detected on (0 when not tied to a line).
enum class FormatErrorKind {
  empty_file,
  unterminated_quote,
  bad_header,
  column_count,
  empty_field,
  not_a_number,
  probability_out_of_range,
  probability_row_sum,
  duplicate_prediction,
  inconsistent_models,
  too_few_models,
  duplicate_label,
  label_not_integer,
  label_out_of_range,
  missing_label,
  bad_degenerate_flag,
  nonpositive_alpha,
  alphas_unsorted,
  duplicate_sample,
};

std::string_view to_string(FormatErrorKind kind);

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorKind kind, std::size_t line, const std::string& what);

  FormatErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  FormatErrorKind kind_;
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 parsing: quoted fields may hold commas, doubled quotes and line
/// breaks; CRLF and LF endings are both accepted. Blank lines are skipped.
std::vector<CsvRecord> parse_csv(std::string_view text);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view value);

/// 17 significant digits: every double round-trips exactly.
std::string format_double(double value);

/// Parses a finite decimal. Throws FormatError(not_a_number).
double parse_double(std::string_view text, std::size_t line, std::string_view column);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace dirmom::app
