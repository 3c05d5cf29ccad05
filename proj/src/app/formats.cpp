#include "dirmom/app/formats.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "dirmom/app/csv.hpp"

namespace dirmom::app {
namespace {

using Kind = FormatErrorKind;

// Checks `header` is <lead...>,<prefix>0,...,<prefix>{K-1} and returns K.
std::size_t check_header(const CsvRecord& header, const std::vector<std::string>& lead,
                         std::string_view prefix) {
  const std::string expected = [&] {
    std::string s;
    for (const auto& l : lead) {
      s += l + ",";
    }
    return s + std::string(prefix) + "0,...," + std::string(prefix) + "{K-1} with K >= 2";
  }();
  if (header.fields.size() < lead.size() + 2) {
    throw FormatError(Kind::bad_header, header.line, "header must be " + expected);
  }
  for (std::size_t i = 0; i < lead.size(); ++i) {
    if (header.fields[i] != lead[i]) {
      throw FormatError(Kind::bad_header, header.line,
                        "header column " + std::to_string(i + 1) + " must be '" + lead[i] +
                            "', got '" + header.fields[i] + "'");
    }
  }
  const std::size_t k = header.fields.size() - lead.size();
  for (std::size_t j = 0; j < k; ++j) {
    const std::string want = std::string(prefix) + std::to_string(j);
    if (header.fields[lead.size() + j] != want) {
      throw FormatError(Kind::bad_header, header.line,
                        "header column '" + header.fields[lead.size() + j] + "' should be '" +
                            want + "'");
    }
  }
  return k;
}

void check_columns(const CsvRecord& rec, std::size_t expected) {
  if (rec.fields.size() != expected) {
    throw FormatError(Kind::column_count, rec.line,
                      "expected " + std::to_string(expected) + " columns, got " +
                          std::to_string(rec.fields.size()));
  }
}

void check_nonempty(const CsvRecord& rec, std::size_t col, std::string_view name) {
  if (rec.fields[col].empty()) {
    throw FormatError(Kind::empty_field, rec.line, "column '" + std::string(name) + "' is empty");
  }
}

std::vector<CsvRecord> records_with_header(std::string_view text) {
  auto records = parse_csv(text);
  if (records.empty()) {
    throw FormatError(Kind::empty_file, 0, "file is empty (a header row is required)");
  }
  return records;
}

struct SampleRows {
  std::size_t first_line = 0;
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;  // (model index, probs)
  std::vector<char> seen;
};

}  // namespace

PredictionsTable parse_predictions(std::string_view text, std::optional<std::size_t> models_limit) {
  const auto records = records_with_header(text);
  const std::size_t k = check_header(records.front(), {"sample_id", "model_id"}, "p_");

  PredictionsTable table;
  table.num_classes = k;
  std::unordered_map<std::string, std::size_t> model_index;
  std::map<std::string, SampleRows> samples;

  for (std::size_t r = 1; r < records.size(); ++r) {
    const CsvRecord& rec = records[r];
    check_columns(rec, 2 + k);
    check_nonempty(rec, 0, "sample_id");
    check_nonempty(rec, 1, "model_id");
    std::vector<double> probs(k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::string col = "p_" + std::to_string(j);
      probs[j] = parse_double(rec.fields[2 + j], rec.line, col);
      if (probs[j] < 0.0 || probs[j] > 1.0) {
        throw FormatError(Kind::probability_out_of_range, rec.line,
                          "column '" + col + "' value " + rec.fields[2 + j] + " outside [0, 1]");
      }
      sum += probs[j];
    }
    const double gap = std::abs(sum - 1.0);
    if (gap > kRowSumHardLimit || !(sum > 0.0)) {
      throw FormatError(Kind::probability_row_sum, rec.line,
                        "probabilities sum to " + format_double(sum));
    }
    if (gap > kRowSumTolerance) {
      for (double& p : probs) {
        p /= sum;
      }
      table.warnings.push_back("line " + std::to_string(rec.line) + ": probabilities sum to " +
                               format_double(sum) + "; renormalized");
    }

    const auto [it, inserted] = model_index.try_emplace(rec.fields[1], model_index.size());
    if (inserted) {
      table.model_ids.push_back(rec.fields[1]);
    }
    const std::size_t midx = it->second;
    auto& sample = samples[rec.fields[0]];
    if (sample.rows.empty()) {
      sample.first_line = rec.line;
    }
    if (sample.seen.size() <= midx) {
      sample.seen.resize(midx + 1, 0);
    }
    if (sample.seen[midx]) {
      throw FormatError(Kind::duplicate_prediction, rec.line,
                        "duplicate row for sample '" + rec.fields[0] + "', model '" +
                            rec.fields[1] + "'");
    }
    sample.seen[midx] = 1;
    sample.rows.emplace_back(midx, std::move(probs));
  }

  const std::size_t all_models = table.model_ids.size();
  for (const auto& [id, sample] : samples) {
    if (sample.rows.size() != all_models) {
      throw FormatError(Kind::inconsistent_models, sample.first_line,
                        "sample '" + id + "' has " + std::to_string(sample.rows.size()) +
                            " models, expected " + std::to_string(all_models));
    }
  }

  std::size_t keep = all_models;
  if (models_limit) {
    if (*models_limit == 0) {
      throw std::invalid_argument("models limit must be >= 1");
    }
    keep = std::min(keep, *models_limit);
    table.model_ids.resize(keep);
  }

  table.sample_ids.reserve(samples.size());
  table.probabilities.reserve(samples.size());
  for (auto& [id, sample] : samples) {
    std::vector<double> matrix(keep * k);
    for (auto& [midx, probs] : sample.rows) {
      if (midx < keep) {
        std::copy(probs.begin(), probs.end(), matrix.begin() + static_cast<std::ptrdiff_t>(midx * k));
      }
    }
    table.sample_ids.push_back(id);
    table.probabilities.push_back(std::move(matrix));
  }
  return table;
}

std::string format_predictions(const PredictionsTable& table) {
  std::ostringstream os;
  os << "sample_id,model_id";
  for (std::size_t j = 0; j < table.num_classes; ++j) {
    os << ",p_" << j;
  }
  os << '\n';
  for (std::size_t i = 0; i < table.sample_ids.size(); ++i) {
    for (std::size_t m = 0; m < table.model_ids.size(); ++m) {
      os << csv_field(table.sample_ids[i]) << ',' << csv_field(table.model_ids[m]);
      for (std::size_t j = 0; j < table.num_classes; ++j) {
        os << ',' << format_double(table.probabilities[i][m * table.num_classes + j]);
      }
      os << '\n';
    }
  }
  return os.str();
}

LabelsTable parse_labels(std::string_view text, std::size_t num_classes) {
  const auto records = records_with_header(text);
  const CsvRecord& header = records.front();
  if (header.fields.size() != 2 || header.fields[0] != "sample_id" || header.fields[1] != "label") {
    throw FormatError(Kind::bad_header, header.line, "header must be sample_id,label");
  }
  LabelsTable table;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const CsvRecord& rec = records[r];
    check_columns(rec, 2);
    check_nonempty(rec, 0, "sample_id");
    const std::string& raw = rec.fields[1];
    std::size_t label = 0;
    const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), label);
    if (raw.empty() || res.ec != std::errc() || res.ptr != raw.data() + raw.size()) {
      throw FormatError(Kind::label_not_integer, rec.line,
                        "label '" + raw + "' is not a nonnegative integer");
    }
    if (label >= num_classes) {
      throw FormatError(Kind::label_out_of_range, rec.line,
                        "label " + raw + " outside [0, " + std::to_string(num_classes) + ")");
    }
    if (!table.labels.emplace(rec.fields[0], label).second) {
      throw FormatError(Kind::duplicate_label, rec.line,
                        "duplicate label for sample '" + rec.fields[0] + "'");
    }
  }
  return table;
}

std::string format_labels(const LabelsTable& table) {
  std::ostringstream os;
  os << "sample_id,label\n";
  for (const auto& [id, label] : table.labels) {
    os << csv_field(id) << ',' << label << '\n';
  }
  return os.str();
}

AlphasTable parse_alphas(std::string_view text) {
  const auto records = records_with_header(text);
  AlphasTable table;
  table.num_classes = check_header(records.front(), {"sample_id", "degenerate"}, "a_");
  const std::size_t k = table.num_classes;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const CsvRecord& rec = records[r];
    check_columns(rec, 2 + k);
    check_nonempty(rec, 0, "sample_id");
    AlphaRow row;
    row.sample_id = rec.fields[0];
    if (rec.fields[1] == "0" || rec.fields[1] == "1") {
      row.degenerate = rec.fields[1] == "1";
    } else {
      throw FormatError(Kind::bad_degenerate_flag, rec.line,
                        "degenerate flag must be 0 or 1, got '" + rec.fields[1] + "'");
    }
    row.alpha.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::string col = "a_" + std::to_string(j);
      row.alpha[j] = parse_double(rec.fields[2 + j], rec.line, col);
      if (!(row.alpha[j] > 0.0)) {
        throw FormatError(Kind::nonpositive_alpha, rec.line,
                          "column '" + col + "' must be > 0, got " + rec.fields[2 + j]);
      }
    }
    if (!table.rows.empty()) {
      const std::string& prev = table.rows.back().sample_id;
      if (prev == row.sample_id) {
        throw FormatError(Kind::duplicate_sample, rec.line,
                          "duplicate sample '" + row.sample_id + "'");
      }
      if (row.sample_id < prev) {
        throw FormatError(Kind::alphas_unsorted, rec.line,
                          "rows must be sorted by sample_id ('" + row.sample_id + "' after '" +
                              prev + "')");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_alphas(const AlphasTable& table) {
  std::ostringstream os;
  os << "sample_id,degenerate";
  for (std::size_t j = 0; j < table.num_classes; ++j) {
    os << ",a_" << j;
  }
  os << '\n';
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const AlphaRow& row = table.rows[i];
    if (i > 0 && !(table.rows[i - 1].sample_id < row.sample_id)) {
      throw std::invalid_argument("format_alphas: rows must be strictly sorted by sample_id");
    }
    if (row.alpha.size() != table.num_classes) {
      throw std::invalid_argument("format_alphas: row width does not match K");
    }
    os << csv_field(row.sample_id) << ',' << (row.degenerate ? '1' : '0');
    for (double a : row.alpha) {
      os << ',' << format_double(a);
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::size_t> labels_for(const LabelsTable& labels,
                                    const std::vector<std::string>& sample_ids) {
  std::vector<std::size_t> out;
  out.reserve(sample_ids.size());
  for (const auto& id : sample_ids) {
    const auto it = labels.labels.find(id);
    if (it == labels.labels.end()) {
      throw FormatError(Kind::missing_label, 0, "no label for sample '" + id + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace dirmom::app
