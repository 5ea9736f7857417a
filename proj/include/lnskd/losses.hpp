#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lnskd/tensor.hpp"

namespace lnskd {

/// Softmax probabilities at a temperature. Holds values only: the tensor
/// never carries a gradient buffer, so it is safe to use as a teacher.
template <typename T>
struct BasicSoftPrediction {
  BasicTensor<T> probabilities;
  T tau = T(1);
};

using SoftPrediction = BasicSoftPrediction<float>;

/// p_i = exp(z_i / tau) / sum_j exp(z_j / tau), max-subtracted.
template <typename T>
BasicSoftPrediction<T> temperature_softmax(const BasicTensor<T>& logits, T tau);

/// (1 - beta) / (1 - beta^n). Requires 0 <= beta < 1 and n >= 1.
double cb_weight(double beta, std::uint64_t n);

/// Per-class weights for the class-balanced cross-entropy.
class ClassBalanceTable {
 public:
  /// When normalize is set the weights are rescaled to sum to the number of
  /// classes; the raw weights stay available through raw_weight().
  ClassBalanceTable(double beta, std::vector<std::uint64_t> class_counts, bool normalize = false);

  double beta() const { return beta_; }
  bool normalized() const { return normalized_; }
  std::size_t num_classes() const { return counts_.size(); }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  double raw_weight(std::size_t cls) const;
  /// The weight applied by the loss.
  double weight(std::size_t cls) const;

 private:
  double beta_;
  bool normalized_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> raw_;
  std::vector<double> applied_;
};

/// w_y * -log softmax(z / tau)_y for one sample.
template <typename T>
BasicTensor<T> cb_ce_loss(BasicTape<T>* tape, const BasicTensor<T>& logits, std::size_t label,
                          const ClassBalanceTable& table, T tau);

/// Mean of cb_ce_loss over a batch.
template <typename T>
BasicTensor<T> cb_ce_loss_batch(BasicTape<T>* tape, std::span<const BasicTensor<T>> logits,
                                std::span<const std::size_t> labels, const ClassBalanceTable& table, T tau);

/// (1/n) sum_i tau^2 KL(prev_i || softmax(cur_i / tau)). prev is constant;
/// zero teacher probabilities contribute zero.
template <typename T>
BasicTensor<T> skd_kl_loss(BasicTape<T>* tape, std::span<const BasicSoftPrediction<T>> prev,
                           std::span<const BasicTensor<T>> cur_logits, T tau);

/// cb + lambda * skd.
template <typename T>
BasicTensor<T> total_loss(BasicTape<T>* tape, const BasicTensor<T>& cb, const BasicTensor<T>& skd, T lambda);

inline double total_loss(double cb, double skd, double lambda) { return cb + lambda * skd; }

}  // namespace lnskd
