#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dirmom/app/formats.hpp"

// Synthetic ensembles with known ground truth: every sample i gets a
// concentration vector alpha^(i) and a label, then M members are drawn from
// Dir(alpha^(i)). Sample i uses its own RNG stream derived from (seed, i), so
// the output does not depend on generation order.
namespace dirmom::app {

enum class AlphaScheme {
  fixed,    // cycle through user-supplied vectors
  mixture,  // two populations: confident-and-right, diffuse-and-wrong
  collapse, // uniform mean with a huge total concentration
};

enum class LabelMode {
  uniform,   // independent uniform draws
  balanced,  // label = i mod K
};

struct SimulateConfig {
  std::size_t num_samples = 100;
  std::size_t num_members = 10;
  std::size_t num_classes = 2;
  std::uint64_t seed = 0;
  AlphaScheme scheme = AlphaScheme::fixed;
  LabelMode labels = LabelMode::uniform;

  std::vector<std::vector<double>> fixed_alphas;

  // mixture: a "correct" sample puts `peak` of its mass on the label with
  // total concentration alpha0_high; an "incorrect" one puts `peak` on a
  // random other class with alpha0_low.
  double correct_fraction = 0.8;
  double alpha0_high = 200.0;
  double alpha0_low = 5.0;
  double peak = 0.8;

  double collapse_alpha0 = 1e7;

  /// Throws std::invalid_argument describing the first bad setting.
  void validate() const;
};

struct SimulatedData {
  PredictionsTable predictions;
  LabelsTable labels;
  AlphasTable truth;
};

SimulatedData simulate(const SimulateConfig& config);

}  // namespace dirmom::app
