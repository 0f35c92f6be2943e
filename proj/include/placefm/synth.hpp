#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "placefm/poi.hpp"

namespace placefm {

// Synthetic POI dataset: Gaussian blobs around city anchors inside disjoint
// per-state rectangles. Each blob carries one zip code and one dominant
// category path from a fixed three-level taxonomy whose full one-hot width
// is 10 columns.
struct SynthParams {
  std::size_t n = 300;
  std::size_t states = 3;
  std::size_t cities_per_state = 2;
  std::size_t blobs_per_city = 2;
  std::uint64_t seed = 0;
};

// Deterministic for a given parameter set; records come back in dataset
// (ascending id) order.
std::vector<PoiRecord> generate_synthetic_pois(const SynthParams& params);

}  // namespace placefm
