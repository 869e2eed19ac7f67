#include "mvj/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace {

constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMult1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  const unsigned __int128 prod =
      static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

inline void round_once(std::array<std::uint64_t, 4>& c,
                       const std::array<std::uint64_t, 2>& k) {
  std::uint64_t hi0, lo0, hi1, lo1;
  mulhilo(kMult0, c[0], hi0, lo0);
  mulhilo(kMult1, c[2], hi1, lo1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

namespace mvj {

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
    : key_{seed, stream}, counter_{0, 0, 0, 0}, buffer_{}, pos_(4),
      spare_(0.0), has_spare_(false) {}

std::array<std::uint64_t, 4> Philox::block(std::array<std::uint64_t, 4> counter,
                                           std::array<std::uint64_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    round_once(counter, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

std::uint64_t Philox::next_u64() {
  if (pos_ == 4) {
    // Advance the 256-bit counter before generating, so the first block is
    // produced at counter value 1.
    for (int i = 0; i < 4; ++i) {
      if (++counter_[i] != 0) break;
    }
    buffer_ = block(counter_, key_);
    pos_ = 0;
  }
  return buffer_[pos_++];
}

double Philox::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Philox::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double x, y, s;
  do {
    x = 2.0 * next_double() - 1.0;
    y = 2.0 * next_double() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = y * f;
  has_spare_ = true;
  return x * f;
}

double Philox::next_gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("next_gamma: shape must be > 0");
  if (shape < 1.0) {
    // Boost: G(a) = G(a + 1) * U^{1/a}.
    const double u = next_double();
    return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = next_normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_double();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Philox::next_beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("next_beta: shape parameters must be > 0");
  if (alpha == 1.0 && beta == 1.0) return next_double();
  const double g1 = next_gamma(alpha);
  const double g2 = next_gamma(beta);
  const double sum = g1 + g2;
  return sum > 0.0 ? g1 / sum : 0.5;
}

}  // namespace mvj
