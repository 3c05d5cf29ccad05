#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dirmom/calibration.hpp"
#include "dirmom/selective.hpp"
#include "json.hpp"

// JSON serialization of evaluation results. Keys keep insertion order and
// numbers use the shortest round-trip decimal form, so equal inputs always
// produce identical bytes.
namespace dirmom::app {

using Json = nlohmann::ordered_json;

/// Finite values become numbers; infinities and NaN become the strings
/// "inf", "-inf" and "nan" (JSON has no literal for them).
Json json_number(double v);

Json to_json(const calibration::PredictiveMetrics& m);
Json to_json(const std::vector<calibration::ReliabilityBin>& bins);
Json to_json(const calibration::ConfidenceHistograms& h, double threshold);
Json to_json(const selective::VarianceHistograms& h);
Json to_json(const selective::ThresholdCalibration& t);

/// {metrics, bins, histograms} for one calibration report; ece sits inside
/// metrics next to accuracy, macro_f1 and nll.
Json calibration_sections(const calibration::CalibrationReport& report);

struct InputDigest {
  std::string name;    // file name without directories
  std::string sha256;
};

Json provenance(const std::vector<InputDigest>& inputs, Json settings,
                std::optional<std::uint64_t> seed);

/// Two-space indentation and a trailing newline.
std::string dump(const Json& doc);

}  // namespace dirmom::app
