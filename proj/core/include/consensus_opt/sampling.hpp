#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "consensus_opt/types.hpp"

namespace consensus_opt {

// Address of a block of random numbers. The draws for a key are a pure
// function of the key: there is no generator state anywhere.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint32_t particle_index = 0;
  std::uint32_t iteration = 0;
  std::uint32_t draw_counter = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
using PhiloxBlock = std::array<std::uint32_t, 4>;
PhiloxBlock philox4x32(PhiloxBlock counter, std::array<std::uint32_t, 2> key);

// Raw block for a key: counter = (particle, iteration, draw_counter, 0), key = seed.
PhiloxBlock random_block(const StreamKey& key);

// Two doubles in the open interval (0, 1), 53 bits each, from one block.
std::array<double, 2> uniform_pair(const StreamKey& key);

// Standard normals via Box-Muller: block draw_counter + i/2 feeds coordinates
// 2*(i/2) and 2*(i/2)+1 (cosine, then sine branch).
void gaussian_fill(const StreamKey& key, std::span<double> out);
Vector gaussian_draw(const StreamKey& key, int dim);

// Coordinate i uses the first uniform of block draw_counter + i.
// Throws std::invalid_argument if lo >= hi in any coordinate or sizes differ.
Vector uniform_box_draw(const StreamKey& key, const Vector& lo, const Vector& hi);

}  // namespace consensus_opt
