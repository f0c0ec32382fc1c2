#include <gtest/gtest.h>

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <vector>

#include "thetaem/random.hpp"

using namespace thetaem;

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(NormalQuantile, MatchesErfcInverse) {
  for (double p : {1e-300, 1e-20, 1e-8, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 0.999,
                   1.0 - 1e-12}) {
    const long double ref =
        -std::sqrt(2.0L) * boost::math::erfc_inv(2.0L * static_cast<long double>(p));
    const double z = normal_quantile(p);
    EXPECT_NEAR(z, static_cast<double>(ref), 1e-13 * std::max(1.0, std::abs(z))) << "p=" << p;
  }
  EXPECT_EQ(normal_quantile(0.5), 0.0);
}

TEST(BrownianStream, DeterministicAndKeyed) {
  BrownianStream a(42, 7);
  BrownianStream b(42, 7);
  BrownianStream other_path(42, 8);
  BrownianStream other_seed(43, 7);
  std::vector<double> x(3), y(3), z(3), w(3);
  for (std::uint64_t k : {0ull, 1ull, 1000ull, (1ull << 40) + 3}) {
    a.standard_normals(k, x);
    b.standard_normals(k, y);
    other_path.standard_normals(k, z);
    other_seed.standard_normals(k, w);
    EXPECT_EQ(x, y);
    EXPECT_NE(x, z);
    EXPECT_NE(x, w);
  }
}

TEST(BrownianStream, IncrementScalesByRootDt) {
  BrownianStream s(1, 2);
  std::vector<double> z(2), dB(2);
  s.standard_normals(5, z);
  s.increment(5, 0.04, dB);
  EXPECT_DOUBLE_EQ(dB[0], 0.2 * z[0]);
  EXPECT_DOUBLE_EQ(dB[1], 0.2 * z[1]);
}

TEST(BrownianStream, SampleMoments) {
  const std::size_t n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  std::size_t draws = 0;
  std::vector<double> z(1);
  for (std::uint64_t path = 0; path < 4; ++path) {
    BrownianStream s(2024, path);
    for (std::uint64_t k = 0; k < n / 4; ++k) {
      s.standard_normals(k, z);
      s1 += z[0];
      s2 += z[0] * z[0];
      s4 += z[0] * z[0] * z[0] * z[0];
      ++draws;
    }
  }
  const double N = static_cast<double>(draws);
  EXPECT_NEAR(s1 / N, 0.0, 5.0 / std::sqrt(N));
  EXPECT_NEAR(s2 / N, 1.0, 5.0 * std::sqrt(2.0 / N));
  EXPECT_NEAR(s4 / N, 3.0, 5.0 * std::sqrt(96.0 / N));
}
