#include "dirmom/app/csv.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <system_error>

namespace dirmom::app {

std::string_view to_string(FormatErrorKind kind) {
  switch (kind) {
    case FormatErrorKind::empty_file: return "empty_file";
    case FormatErrorKind::unterminated_quote: return "unterminated_quote";
    case FormatErrorKind::bad_header: return "bad_header";
    case FormatErrorKind::column_count: return "column_count";
    case FormatErrorKind::empty_field: return "empty_field";
    case FormatErrorKind::not_a_number: return "not_a_number";
    case FormatErrorKind::probability_out_of_range: return "probability_out_of_range";
    case FormatErrorKind::probability_row_sum: return "probability_row_sum";
    case FormatErrorKind::duplicate_prediction: return "duplicate_prediction";
    case FormatErrorKind::inconsistent_models: return "inconsistent_models";
    case FormatErrorKind::too_few_models: return "too_few_models";
    case FormatErrorKind::duplicate_label: return "duplicate_label";
    case FormatErrorKind::label_not_integer: return "label_not_integer";
    case FormatErrorKind::label_out_of_range: return "label_out_of_range";
    case FormatErrorKind::missing_label: return "missing_label";
    case FormatErrorKind::bad_degenerate_flag: return "bad_degenerate_flag";
    case FormatErrorKind::nonpositive_alpha: return "nonpositive_alpha";
    case FormatErrorKind::alphas_unsorted: return "alphas_unsorted";
    case FormatErrorKind::duplicate_sample: return "duplicate_sample";
  }
  return "unknown";
}

namespace {

std::string describe(FormatErrorKind kind, std::size_t line, const std::string& what) {
  std::ostringstream os;
  if (line > 0) {
    os << "line " << line << ": ";
  }
  os << what << " [" << to_string(kind) << "]";
  return os.str();
}

}  // namespace

FormatError::FormatError(FormatErrorKind kind, std::size_t line, const std::string& what)
    : std::runtime_error(describe(kind, line, what)), kind_(kind), line_(line) {}

std::vector<CsvRecord> parse_csv(std::string_view text) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  std::size_t line = 1;
  bool in_quotes = false;
  bool record_started = false;
  std::size_t quote_line = 0;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    // A record consisting of a single empty field is a blank line.
    if (!(current.fields.size() == 1 && current.fields[0].empty())) {
      records.push_back(std::move(current));
    }
    current = CsvRecord{};
    record_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (!record_started) {
      current.line = line;
      record_started = true;
    }
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') {
          ++line;
        }
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        quote_line = line;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') {
          ++i;
        }
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) {
    throw FormatError(FormatErrorKind::unterminated_quote, quote_line, "unterminated quoted field");
  }
  if (record_started) {
    end_record();
  }
  return records;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(value);
  }
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') {
      out.push_back('"');
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, std::size_t line, std::string_view column) {
  // from_chars rejects a leading '+', which some exporters emit.
  std::string_view body = text;
  if (!body.empty() && body.front() == '+') {
    body.remove_prefix(1);
  }
  double value = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), value);
  if (body.empty() || res.ec != std::errc() || res.ptr != body.data() + body.size() ||
      !std::isfinite(value)) {
    throw FormatError(FormatErrorKind::not_a_number, line,
                      "column '" + std::string(column) + "': '" + std::string(text) +
                          "' is not a finite number");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) {
    throw IoError("error while reading '" + path.string() + "'");
  }
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open '" + tmp.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw IoError("error while writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw std::runtime_error("sha256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace dirmom::app
