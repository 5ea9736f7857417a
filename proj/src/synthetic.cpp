#include "lnskd/synthetic.hpp"

#include <algorithm>

#include "lnskd/error.hpp"
#include "lnskd/random.hpp"

namespace lnskd {

EncodedDataset make_synthetic(const SyntheticSpec& synth) {
  if (synth.num_classes < 2) throw ConfigError("synthetic data needs at least two classes");
  if (synth.noise < 0) throw ConfigError("synthetic noise must be non-negative");
  EncodedDataset ds;
  ds.kind = DatasetKind::kSynthetic;
  ds.geometry = synth.geometry;
  for (std::size_t c = 0; c < synth.num_classes; ++c) ds.class_names.push_back("class" + std::to_string(c));
  const auto cells = ds.grid_size();
  ds.raw_feature_dim = cells;
  ds.encoded_feature_dim = cells;
  ds.bounds.min.assign(cells, 0.0);
  ds.bounds.max.assign(cells, 1.0);

  auto eng = make_engine(synth.seed, 0x53594e5448ULL);
  std::vector<std::vector<float>> prototypes(synth.num_classes, std::vector<float>(cells));
  for (auto& p : prototypes) {
    for (auto& v : p) v = static_cast<float>(uniform01(eng));
  }
  std::vector<float> grid(cells);
  const auto emit = [&](std::size_t count, Split split) {
    for (std::size_t i = 0; i < count; ++i) {
      const auto label = i % synth.num_classes;
      for (std::size_t k = 0; k < cells; ++k) {
        const double v = prototypes[label][k] + uniform(eng, -synth.noise, synth.noise);
        grid[k] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
      ds.push_back(grid, label, split);
    }
  };
  emit(synth.train_samples, Split::kTrain);
  emit(synth.test_samples, Split::kTest);
  return ds;
}

}  // namespace lnskd
