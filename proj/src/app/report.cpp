#include "dirmom/app/report.hpp"

#include <cmath>

#ifndef DIRMOM_VERSION
#define DIRMOM_VERSION "unknown"
#endif

namespace dirmom::app {

Json json_number(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  return v;
}

Json to_json(const calibration::PredictiveMetrics& m) {
  Json j;
  j["n"] = m.n;
  j["accuracy"] = json_number(m.accuracy);
  j["macro_f1"] = json_number(m.macro_f1);
  j["nll"] = json_number(m.nll);
  return j;
}

Json to_json(const std::vector<calibration::ReliabilityBin>& bins) {
  Json arr = Json::array();
  for (const auto& b : bins) {
    Json j;
    j["lower"] = json_number(b.lower);
    j["upper"] = json_number(b.upper);
    j["count"] = b.count;
    // Accuracy and confidence are undefined for an empty bin.
    j["accuracy"] = b.occupied() ? json_number(b.accuracy) : Json(nullptr);
    j["confidence"] = b.occupied() ? json_number(b.confidence) : Json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr;
}

Json to_json(const calibration::ConfidenceHistograms& h, double threshold) {
  Json j;
  j["correct"] = h.correct;
  j["incorrect"] = h.incorrect;
  j["conf_threshold"] = json_number(threshold);
  j["high_conf_error_rate"] = json_number(h.high_conf_error_rate);
  return j;
}

Json to_json(const selective::VarianceHistograms& h) {
  Json j;
  Json edges = Json::array();
  for (double e : h.log10_edges) {
    edges.push_back(json_number(e));
  }
  j["log10_edges"] = std::move(edges);
  j["correct"] = h.correct;
  j["incorrect"] = h.incorrect;
  return j;
}

Json to_json(const selective::ThresholdCalibration& t) {
  Json j;
  j["tau"] = json_number(t.tau);
  j["target_risk"] = json_number(t.target_risk);
  j["achieved_cal_risk"] = json_number(t.achieved_cal_risk);
  j["cal_coverage"] = json_number(t.cal_coverage);
  j["abstains_on_all"] = t.abstains_on_all();
  return j;
}

Json calibration_sections(const calibration::CalibrationReport& report) {
  Json doc;
  Json metrics = to_json(report.metrics);
  metrics["ece"] = json_number(report.ece);
  doc["metrics"] = std::move(metrics);
  doc["bins"] = to_json(report.bins);
  doc["histograms"] = to_json(report.histograms, report.conf_threshold);
  return doc;
}

Json provenance(const std::vector<InputDigest>& inputs, Json settings,
                std::optional<std::uint64_t> seed) {
  Json j;
  Json arr = Json::array();
  for (const auto& in : inputs) {
    arr.push_back(Json{{"name", in.name}, {"sha256", in.sha256}});
  }
  j["inputs"] = std::move(arr);
  j["settings"] = std::move(settings);
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  j["version"] = DIRMOM_VERSION;
  return j;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace dirmom::app
