#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lnskd {

struct SplitResult {
  std::vector<std::size_t> train;  // ascending ids
  std::vector<std::size_t> test;   // ascending ids
  std::vector<std::string> warnings;
};

/// Per class: shuffle that class's ids and send llround(fraction * n) of
/// them to train. Classes with fewer than two samples go entirely to train.
SplitResult stratified_split(std::span<const std::size_t> labels, double train_fraction, std::uint64_t seed);

/// Keeps llround(fraction * n) ids of each class (at least one for a
/// non-empty class), in ascending order.
std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> ids, std::span<const std::size_t> labels,
                                              double fraction, std::uint64_t seed);

/// Epoch-shuffled ids cut into half-overlapping windows of `batch_size`.
///
/// Window t covers order[t*h, t*h + n) with h = n/2, so consecutive windows
/// share h ids. The last window may be shorter so that every id is covered;
/// it still holds more than h ids. Fewer than n ids give a single window.
class BatchSchedule {
 public:
  BatchSchedule(std::vector<std::size_t> order, std::size_t batch_size);

  std::size_t batch_size() const { return n_; }
  std::size_t half() const { return n_ / 2; }
  std::size_t num_batches() const { return starts_.size(); }
  std::span<const std::size_t> order() const { return order_; }
  std::span<const std::size_t> batch(std::size_t t) const;
  /// Ids of batch t that also belong to batch t-1 (empty for t == 0).
  std::span<const std::size_t> shared(std::size_t t) const;
  /// Ids of batch t that will also belong to batch t+1 (empty for the last).
  std::span<const std::size_t> carried(std::size_t t) const;

 private:
  std::vector<std::size_t> order_;
  std::size_t n_;
  std::vector<std::size_t> starts_;
};

/// Shuffles `ids` with a stream derived from (seed, epoch) and windows them.
BatchSchedule overlap_batches(std::span<const std::size_t> ids, std::size_t batch_size, std::uint64_t seed,
                              std::uint64_t epoch);

/// Number of windows overlap_batches produces for `count` ids.
std::size_t overlap_batch_count(std::size_t count, std::size_t batch_size);

}  // namespace lnskd
