#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace bss {

/// Identifies one reproducible random stream. Identical (seed, stream_id)
/// pairs yield identical draws.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

using Engine = boost::random::mt19937_64;

Engine make_engine(RngSeed seed);

/// Standard normal variates (ziggurat).
class NormalSource {
 public:
  explicit NormalSource(RngSeed seed) : engine_(make_engine(seed)) {}

  double operator()() { return dist_(engine_); }
  void fill(std::span<double> out) {
    for (double& v : out) v = dist_(engine_);
  }
  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  boost::random::normal_distribution<double> dist_;
};

/// 64-bit mixing used to derive per-replication stream ids.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a hash of a byte string, stable across platforms and runs.
std::uint64_t stable_hash(std::string_view text);

}  // namespace bss
