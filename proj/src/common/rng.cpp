#include "common/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gfomlb {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t index) const {
  std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(index),
                                      static_cast<std::uint32_t>(index >> 32),
                                      static_cast<std::uint32_t>(stream_),
                                      static_cast<std::uint32_t>(stream_ >> 32)};
  std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

std::array<double, 2> CounterRng::uniform_pair(std::uint64_t index) const {
  auto b = block(index);
  return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
}

std::array<double, 2> CounterRng::normal_pair(std::uint64_t index) const {
  auto u = uniform_pair(index);
  double radius = std::sqrt(-2.0 * std::log(u[0]));
  double angle = 2.0 * std::numbers::pi * u[1];
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

void CounterRng::fill_normal(double* out, std::size_t count, std::uint64_t offset) const {
  for (std::size_t k = 0; k < count; k += 2) {
    auto z = normal_pair(offset + k / 2);
    out[k] = z[0];
    if (k + 1 < count) out[k + 1] = z[1];
  }
}

Mat CounterRng::normal_matrix(Eigen::Index rows, Eigen::Index cols) const {
  Mat m(rows, cols);
  fill_normal(m.data(), static_cast<std::size_t>(m.size()));
  return m;
}

std::size_t CounterRng::pick(const std::vector<double>& cumulative, double uniform) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), uniform * cumulative.back());
  std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
  return std::min(idx, cumulative.size() - 1);
}

std::vector<double> cumulative_weights(const std::vector<double>& weights) {
  std::vector<double> c(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    c[i] = acc;
  }
  return c;
}

}  // namespace gfomlb
