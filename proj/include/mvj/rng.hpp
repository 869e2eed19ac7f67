// Counter-based pseudo-random generator (Philox 4x64 with 10 rounds) plus the
// handful of variate transforms the simulator needs. Counter-based state makes
// per-replication streams trivial: (seed, stream) selects an independent
// sequence, and replay never depends on draw order elsewhere.
#pragma once

#include <array>
#include <cstdint>

namespace mvj {

class Philox {
 public:
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0);

  // One 10-round Philox 4x64 block; exposed for known-answer tests.
  static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> counter,
                                            std::array<std::uint64_t, 2> key);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double next_double();

  // Standard normal via the polar (Marsaglia) method.
  double next_normal();

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze, with the power boost for
  // shape < 1.
  double next_gamma(double shape);

  // Beta(alpha, beta) as a gamma ratio; Beta(1, 1) short-circuits to a plain
  // uniform draw (one draw consumed).
  double next_beta(double alpha, double beta);

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> buffer_;
  int pos_;      // next unread word in buffer_; 4 means empty
  double spare_; // cached second normal from the polar method
  bool has_spare_;
};

}  // namespace mvj
