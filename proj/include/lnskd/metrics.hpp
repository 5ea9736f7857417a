#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lnskd/model.hpp"

namespace lnskd {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes);

  std::size_t num_classes() const { return m_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return cells_[truth * m_ + predicted]; }
  void add(std::size_t truth, std::size_t predicted, std::uint64_t count = 1);
  void merge(const ConfusionMatrix& other);
  std::uint64_t total() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;

  nlohmann::json to_json() const;  // array of rows
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t m_;
  std::vector<std::uint64_t> cells_;
};

ConfusionMatrix confusion_matrix(std::span<const std::size_t> truths, std::span<const std::size_t> predictions,
                                 std::size_t num_classes);

struct MacroMetrics {
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
};

/// Zero denominators give 0 rather than NaN.
MacroMetrics macro_metrics(const ConfusionMatrix& cm);

// ---------------------------------------------------------------------------
// Complexity accounting

struct LayerComplexity {
  std::string name;
  std::string kind;  // depthwise | pointwise | conv | mfm | maxpool | linear
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  std::uint64_t comparisons = 0;  // MFM / pooling, reported apart from MACs
};

struct ComplexityReport {
  std::vector<LayerComplexity> layers;
  std::uint64_t total_params = 0;
  std::uint64_t total_macs = 0;
  std::uint64_t total_comparisons = 0;

  /// Reported FLOPs count one multiply-accumulate as one FLOP.
  std::uint64_t flops() const { return total_macs; }
  std::uint64_t flops_2x() const { return 2 * total_macs; }

  nlohmann::json to_json() const;
  static ComplexityReport from_json(const nlohmann::json& j);
  bool operator==(const ComplexityReport&) const;
};

/// Per-layer parameters and MACs for the config's own input shape.
ComplexityReport count_params(const ModelConfig& config);
/// Same accounting for an explicit input shape.
ComplexityReport count_flops(const ModelConfig& config, const InputShape& input_shape);

}  // namespace lnskd
