#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// On-disk tables exchanged by the command-line tool.
//
//   predictions: sample_id,model_id,p_0,...,p_{K-1}
//   labels:      sample_id,label
//   alphas:      sample_id,degenerate,a_0,...,a_{K-1}
//
// All three have a mandatory header row. Parsers report violations as
// FormatError with the offending line number.
namespace dirmom::app {

/// Rows whose probabilities miss unit sum by more than this are renormalized
/// with a warning...
inline constexpr double kRowSumTolerance = 1e-6;
/// ...and rejected beyond this.
inline constexpr double kRowSumHardLimit = 1e-3;

struct PredictionsTable {
  std::size_t num_classes = 0;
  std::vector<std::string> model_ids;   // first-appearance order
  std::vector<std::string> sample_ids;  // sorted
  // Per sample (aligned with sample_ids): model_ids.size() x K, row-major.
  std::vector<std::vector<double>> probabilities;
  std::vector<std::string> warnings;

  std::size_t num_models() const { return model_ids.size(); }
};

/// `models_limit` keeps only the first M model ids in file order.
PredictionsTable parse_predictions(std::string_view text,
                                   std::optional<std::size_t> models_limit = std::nullopt);
std::string format_predictions(const PredictionsTable& table);

struct LabelsTable {
  std::map<std::string, std::size_t> labels;
};

/// Labels must be integers in [0, num_classes).
LabelsTable parse_labels(std::string_view text, std::size_t num_classes);
std::string format_labels(const LabelsTable& table);

struct AlphaRow {
  std::string sample_id;
  bool degenerate = false;
  std::vector<double> alpha;
};

struct AlphasTable {
  std::size_t num_classes = 0;
  std::vector<AlphaRow> rows;  // sorted by sample_id
};

AlphasTable parse_alphas(std::string_view text);
/// Throws std::invalid_argument when rows are not sorted by sample_id.
std::string format_alphas(const AlphasTable& table);

/// Returns the label for every id in `sample_ids`; throws
/// FormatError(missing_label) naming the first id without one.
std::vector<std::size_t> labels_for(const LabelsTable& labels,
                                    const std::vector<std::string>& sample_ids);

}  // namespace dirmom::app
