#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "mvj/rng.hpp"

using namespace mvj;
using u64 = std::uint64_t;

// Known-answer vectors frozen from an independent implementation of the
// 10-round 4x64 block function (cross-checked word for word against numpy's
// generator of the same family before this suite was written).
TEST_CASE("block function known answers") {
  {
    const auto out = Philox::block({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x16554d9eca36314cULL);
    CHECK(out[1] == 0xdb20fe9d672d0fdcULL);
    CHECK(out[2] == 0xd7e772cee186176bULL);
    CHECK(out[3] == 0x7e68b68aec7ba23bULL);
  }
  {
    const auto out = Philox::block({1, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x02f4ba6408e4d89bULL);
    CHECK(out[1] == 0x3dd62b0b9ca8c5b2ULL);
    CHECK(out[2] == 0x1c8667a55d902e79ULL);
    CHECK(out[3] == 0x907d7a052fd5b4dcULL);
  }
  {
    const auto out = Philox::block({2, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x809bf322883987c3ULL);
    CHECK(out[1] == 0x471128b9e807f7ddULL);
    CHECK(out[2] == 0xf250ba0dbec065b7ULL);
    CHECK(out[3] == 0xfc6ed66767a457bcULL);
  }
  {
    const auto out = Philox::block({1, 0, 0, 0}, {0x123456789abcdef0ULL, 0});
    CHECK(out[0] == 0x6cbbf974e52b24dcULL);
    CHECK(out[1] == 0xf7b1843d1e4fd656ULL);
    CHECK(out[2] == 0xd8ff397f5c0b9a62ULL);
    CHECK(out[3] == 0x8cb8647259442556ULL);
  }
  {
    const auto out = Philox::block({2, 0, 0, 0}, {0x123456789abcdef0ULL, 0});
    CHECK(out[0] == 0x10d0a23ee520e17cULL);
    CHECK(out[1] == 0x152955c118cda58aULL);
    CHECK(out[2] == 0x7c6bbeb9c7d0f15dULL);
    CHECK(out[3] == 0xcdf5f2a5ef692eafULL);
  }
}

TEST_CASE("word stream walks the counter: first block at 1, second at 2") {
  Philox rng(0, 0);
  const auto b1 = Philox::block({1, 0, 0, 0}, {0, 0});
  const auto b2 = Philox::block({2, 0, 0, 0}, {0, 0});
  for (int i = 0; i < 4; ++i) CHECK(rng.next_u64() == b1[i]);
  for (int i = 0; i < 4; ++i) CHECK(rng.next_u64() == b2[i]);
}

TEST_CASE("streams are reproducible and distinct") {
  Philox a1(12345, 0), a2(12345, 0), b(12345, 1), c(54321, 0);
  int differ_stream = 0, differ_seed = 0;
  for (int i = 0; i < 256; ++i) {
    const u64 v = a1.next_u64();
    CHECK(v == a2.next_u64());
    if (v != b.next_u64()) ++differ_stream;
    if (v != c.next_u64()) ++differ_seed;
  }
  CHECK(differ_stream > 250);
  CHECK(differ_seed > 250);
}

TEST_CASE("uniform doubles live in [0,1) with the right first two moments") {
  Philox rng(2024, 0);
  const int n = 400000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    s += u;
    s2 += u * u;
  }
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.005));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("normal variates: moments and symmetry") {
  Philox rng(99, 0);
  const int n = 400000;
  double s = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    s += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(s3 / n) < 0.05);
  CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("gamma variates match mean and variance") {
  Philox rng(7, 3);
  for (double shape : {0.5, 1.0, 2.5, 7.0}) {
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.next_gamma(shape);
      CHECK(g >= 0.0);
      s += g;
      s2 += g * g;
    }
    const double mean = s / n;
    CHECK(mean == doctest::Approx(shape).epsilon(0.02));
    CHECK(s2 / n - mean * mean == doctest::Approx(shape).epsilon(0.05));
  }
  CHECK_THROWS_AS(rng.next_gamma(0.0), std::invalid_argument);
}

TEST_CASE("beta variates: uniform shortcut and general moments") {
  Philox uni(5, 0), beta11(5, 0);
  // Beta(1,1) consumes exactly one word and equals the uniform stream.
  for (int i = 0; i < 64; ++i) CHECK(beta11.next_beta(1.0, 1.0) == uni.next_double());

  Philox rng(6, 0);
  for (auto [a, b] : {std::pair{2.0, 5.0}, std::pair{0.5, 0.5}, std::pair{4.0, 1.5}}) {
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.next_beta(a, b);
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(a / (a + b)).epsilon(0.01));
    CHECK(var == doctest::Approx(a * b / ((a + b) * (a + b) * (a + b + 1.0))).epsilon(0.05));
  }
  CHECK_THROWS_AS(rng.next_beta(0.0, 1.0), std::invalid_argument);
}
