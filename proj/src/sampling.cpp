#include "lnskd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lnskd/error.hpp"
#include "lnskd/random.hpp"

namespace lnskd {

namespace {

constexpr std::uint64_t kSplitStream = 0x5350'4c49'5400ULL;
constexpr std::uint64_t kSubsampleStream = 0x5355'4253'0000ULL;
constexpr std::uint64_t kEpochStream = 0x4550'4f43'4800ULL;

std::map<std::size_t, std::vector<std::size_t>> group_by_label(std::span<const std::size_t> ids,
                                                               std::span<const std::size_t> labels) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (auto id : ids) {
    if (id >= labels.size()) throw DataError("sample id " + std::to_string(id) + " has no label");
    groups[labels[id]].push_back(id);
  }
  return groups;
}

}  // namespace

SplitResult stratified_split(std::span<const std::size_t> labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1), got " + std::to_string(train_fraction));
  }
  std::vector<std::size_t> ids(labels.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;

  SplitResult out;
  auto eng = make_engine(seed, kSplitStream);
  for (auto& [cls, members] : group_by_label(ids, labels)) {
    if (members.size() < 2) {
      out.warnings.push_back("class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                             " sample(s); all placed in the training split");
      out.train.insert(out.train.end(), members.begin(), members.end());
      continue;
    }
    shuffle(std::span(members), eng);
    const auto k = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(k), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> ids, std::span<const std::size_t> labels,
                                              double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("subsample fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  std::vector<std::size_t> out;
  auto eng = make_engine(seed, kSubsampleStream);
  for (auto& [cls, members] : group_by_label(ids, labels)) {
    shuffle(std::span(members), eng);
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    k = std::clamp<std::size_t>(k, 1, members.size());
    out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t overlap_batch_count(std::size_t count, std::size_t n) {
  if (count == 0) return 0;
  if (count <= n) return 1;
  const std::size_t h = n / 2;
  // Window t is emitted while the previous one stops short of the end:
  // (t-1)*h + n < count.
  return (count - n + h - 1) / h + 1;
}

BatchSchedule::BatchSchedule(std::vector<std::size_t> order, std::size_t batch_size)
    : order_(std::move(order)), n_(batch_size) {
  if (n_ < 2 || n_ % 2 != 0) throw ConfigError("overlapping batches need an even batch size >= 2, got " + std::to_string(n_));
  const auto count = overlap_batch_count(order_.size(), n_);
  for (std::size_t t = 0; t < count; ++t) starts_.push_back(t * half());
}

std::span<const std::size_t> BatchSchedule::batch(std::size_t t) const {
  const auto start = starts_.at(t);
  return std::span(order_).subspan(start, std::min(n_, order_.size() - start));
}

std::span<const std::size_t> BatchSchedule::shared(std::size_t t) const {
  if (t == 0) return {};
  return batch(t).first(half());
}

std::span<const std::size_t> BatchSchedule::carried(std::size_t t) const {
  if (t + 1 >= starts_.size()) return {};
  return std::span(order_).subspan(starts_[t + 1], half());
}

BatchSchedule overlap_batches(std::span<const std::size_t> ids, std::size_t batch_size, std::uint64_t seed,
                              std::uint64_t epoch) {
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw ConfigError("overlapping batches need an even batch size >= 2, got " + std::to_string(batch_size));
  }
  std::vector<std::size_t> order(ids.begin(), ids.end());
  auto eng = make_engine(seed, kEpochStream + epoch);
  shuffle(std::span(order), eng);
  return BatchSchedule(std::move(order), batch_size);
}

}  // namespace lnskd
