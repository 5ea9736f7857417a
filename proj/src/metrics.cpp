#include "lnskd/metrics.hpp"

#include <numeric>

namespace lnskd {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes) : m_(num_classes), cells_(num_classes * num_classes, 0) {
  if (num_classes == 0) throw ConfigError("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::uint64_t count) {
  if (truth >= m_ || predicted >= m_) {
    throw DataError("label pair (" + std::to_string(truth) + ", " + std::to_string(predicted) + ") outside [0, " +
                    std::to_string(m_) + ")");
  }
  cells_[truth * m_ + predicted] += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.m_ != m_) throw ShapeError("cannot merge confusion matrices of different sizes");
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < m_; ++p) s += at(truth, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < m_; ++t) s += at(t, predicted);
  return s;
}

json ConfusionMatrix::to_json() const {
  json rows = json::array();
  for (std::size_t t = 0; t < m_; ++t) {
    json row = json::array();
    for (std::size_t p = 0; p < m_; ++p) row.push_back(at(t, p));
    rows.push_back(row);
  }
  return rows;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> truths, std::span<const std::size_t> predictions,
                                 std::size_t num_classes) {
  if (truths.size() != predictions.size()) {
    throw ShapeError("confusion_matrix: " + std::to_string(truths.size()) + " truths but " +
                     std::to_string(predictions.size()) + " predictions");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < truths.size(); ++i) cm.add(truths[i], predictions[i]);
  return cm;
}

MacroMetrics macro_metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw DataError("macro_metrics: confusion matrix is empty");
  const std::size_t m = cm.num_classes();
  MacroMetrics out;
  std::uint64_t trace = 0;
  for (std::size_t c = 0; c < m; ++c) {
    const auto tp = cm.at(c, c);
    trace += tp;
    const auto col = cm.col_sum(c);
    const auto row = cm.row_sum(c);
    const double p = col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    const double r = row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    out.precision.push_back(p);
    out.recall.push_back(r);
    out.f1.push_back(p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0);
  }
  const auto mean = [m](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(m);
  };
  out.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  out.macro_precision = mean(out.precision);
  out.macro_recall = mean(out.recall);
  out.macro_f1 = mean(out.f1);
  return out;
}

// ---------------------------------------------------------------------------

json ComplexityReport::to_json() const {
  json layers_j = json::array();
  for (const auto& l : layers) {
    layers_j.push_back(
        {{"name", l.name}, {"kind", l.kind}, {"params", l.params}, {"macs", l.macs}, {"comparisons", l.comparisons}});
  }
  return {{"layers", layers_j},
          {"total_params", total_params},
          {"total_macs", total_macs},
          {"total_comparisons", total_comparisons},
          {"flops", flops()},
          {"flops_2x_mac", flops_2x()},
          {"flops_convention", "1 multiply-accumulate = 1 FLOP; MFM/pool comparisons excluded"}};
}

ComplexityReport ComplexityReport::from_json(const json& j) {
  ComplexityReport r;
  try {
    for (const auto& l : j.at("layers")) {
      r.layers.push_back({l.at("name").get<std::string>(), l.at("kind").get<std::string>(),
                          l.at("params").get<std::uint64_t>(), l.at("macs").get<std::uint64_t>(),
                          l.at("comparisons").get<std::uint64_t>()});
    }
    r.total_params = j.at("total_params").get<std::uint64_t>();
    r.total_macs = j.at("total_macs").get<std::uint64_t>();
    r.total_comparisons = j.at("total_comparisons").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed complexity report: ") + e.what());
  }
  return r;
}

bool ComplexityReport::operator==(const ComplexityReport& o) const {
  if (layers.size() != o.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto &a = layers[i], &b = o.layers[i];
    if (a.name != b.name || a.kind != b.kind || a.params != b.params || a.macs != b.macs ||
        a.comparisons != b.comparisons) {
      return false;
    }
  }
  return total_params == o.total_params && total_macs == o.total_macs && total_comparisons == o.total_comparisons;
}

ComplexityReport count_flops(const ModelConfig& config, const InputShape& input_shape) {
  ModelConfig c = config;
  c.input = input_shape;
  c.validate();
  ComplexityReport r;
  InputShape cur = c.input;
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    const auto& b = c.blocks[i];
    const std::string pre = "block" + std::to_string(i);
    const std::uint64_t Ci = b.in_channels, Co = b.conv_out_channels, K2 = b.kernel_size * b.kernel_size;
    const std::uint64_t Ho = cur.height + 2 * b.padding - b.kernel_size + 1;
    const std::uint64_t Wo = cur.width + 2 * b.padding - b.kernel_size + 1;
    if (c.variant == Variant::kCnn) {
      r.layers.push_back({pre + ".conv", "conv", Ci * K2 * Co + (b.conv_bias ? Co : 0), Ci * K2 * Co * Ho * Wo, 0});
    } else {
      r.layers.push_back({pre + ".depthwise", "depthwise", Ci * K2 + (b.depthwise_bias ? Ci : 0), Ci * K2 * Ho * Wo, 0});
      r.layers.push_back({pre + ".pointwise", "pointwise", Ci * Co + (b.conv_bias ? Co : 0), Ci * Co * Ho * Wo, 0});
    }
    std::uint64_t C = Co;
    if (b.use_mfm) {
      C = Co / 2;
      r.layers.push_back({pre + ".mfm", "mfm", 0, 0, C * Ho * Wo});
    }
    std::uint64_t H = Ho, W = Wo;
    if (b.pool) {
      H /= 2;
      W /= 2;
      r.layers.push_back({pre + ".maxpool", "maxpool", 0, 0, 3 * C * H * W});
    }
    cur = {C, H, W};
  }
  const std::uint64_t D = cur.channels * cur.height * cur.width, M = c.num_classes;
  r.layers.push_back({"head", "linear", D * M + (c.linear_bias ? M : 0), D * M, 0});
  for (const auto& l : r.layers) {
    r.total_params += l.params;
    r.total_macs += l.macs;
    r.total_comparisons += l.comparisons;
  }
  return r;
}

ComplexityReport count_params(const ModelConfig& config) { return count_flops(config, config.input); }

}  // namespace lnskd
