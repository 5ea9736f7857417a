#pragma once

#include <cstdint>

#include "lnskd/dataset.hpp"

namespace lnskd {

struct SyntheticSpec {
  InputShape geometry{1, 12, 12};
  std::size_t num_classes = 5;
  std::size_t train_samples = 64;
  std::size_t test_samples = 0;
  double noise = 0.1;  // half-width of the uniform noise around each prototype
  std::uint64_t seed = 0;
};

/// Separable toy data: each class has a random prototype grid in [0, 1];
/// samples are the prototype plus uniform noise, clamped to [0, 1]. Labels
/// cycle round-robin so every class is equally represented.
EncodedDataset make_synthetic(const SyntheticSpec& synth);

}  // namespace lnskd
