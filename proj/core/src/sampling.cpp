#include "consensus_opt/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace consensus_opt {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxBlock philox4x32(PhiloxBlock ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

PhiloxBlock random_block(const StreamKey& key) {
  return philox4x32({key.particle_index, key.iteration, key.draw_counter, 0u},
                    {static_cast<std::uint32_t>(key.master_seed),
                     static_cast<std::uint32_t>(key.master_seed >> 32)});
}

std::array<double, 2> uniform_pair(const StreamKey& key) {
  const PhiloxBlock block = random_block(key);
  return {to_open_unit(block[0], block[1]), to_open_unit(block[2], block[3])};
}

void gaussian_fill(const StreamKey& key, std::span<double> out) {
  StreamKey block_key = key;
  for (std::size_t i = 0; i < out.size(); i += 2) {
    block_key.draw_counter = key.draw_counter + static_cast<std::uint32_t>(i / 2);
    const auto [u1, u2] = uniform_pair(block_key);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i] = radius * std::cos(angle);
    if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
  }
}

Vector gaussian_draw(const StreamKey& key, int dim) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  Vector out(dim);
  gaussian_fill(key, {out.data(), static_cast<std::size_t>(dim)});
  return out;
}

Vector uniform_box_draw(const StreamKey& key, const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw std::invalid_argument("box bounds must be non-empty and of equal dimension");
  }
  Vector out(lo.size());
  StreamKey block_key = key;
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) {
      throw std::invalid_argument("box lower bound must be below upper bound in every coordinate");
    }
    block_key.draw_counter = key.draw_counter + static_cast<std::uint32_t>(i);
    const double u = uniform_pair(block_key)[0];
    out[i] = lo[i] + (hi[i] - lo[i]) * u;
  }
  return out;
}

}  // namespace consensus_opt
