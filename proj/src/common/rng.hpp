#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "common/linalg.hpp"

namespace gfomlb {

// Counter-based generator (Philox4x32-10). Every draw is a pure function of
// (seed, stream, index), so matrices can be filled in any order and replicate
// runs never share state.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::array<std::uint32_t, 4> block(std::uint64_t index) const;

  // Two uniforms in (0,1) from one block.
  std::array<double, 2> uniform_pair(std::uint64_t index) const;
  double uniform(std::uint64_t index) const { return uniform_pair(index)[0]; }

  // Two independent N(0,1) draws from one block (Box-Muller).
  std::array<double, 2> normal_pair(std::uint64_t index) const;

  // Fills `out` with N(0,1) draws; entry k uses block offset + k/2.
  void fill_normal(double* out, std::size_t count, std::uint64_t offset = 0) const;
  Mat normal_matrix(Eigen::Index rows, Eigen::Index cols) const;

  // Index into a discrete distribution given by cumulative weights.
  static std::size_t pick(const std::vector<double>& cumulative, double uniform);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

std::vector<double> cumulative_weights(const std::vector<double>& weights);

}  // namespace gfomlb
