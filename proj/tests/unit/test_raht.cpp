#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "generators.hpp"
#include "mesongs/error.hpp"
#include "mesongs/octree.hpp"
#include "mesongs/raht.hpp"
#include "oracles.hpp"

namespace {

mesongs::MergeSchedule pair_schedule() { return mesongs::build_merge_schedule(std::vector<std::uint64_t>{0, 1}, 1); }

double sum_squares(const std::vector<double>& v) { return std::inner_product(v.begin(), v.end(), v.begin(), 0.0); }

}  // namespace

TEST(Raht, EqualPairKillsAc) {
  const std::vector<double> x = {1, 1};
  const auto c = mesongs::raht_forward(x, pair_schedule());
  EXPECT_NEAR(c.dc, std::sqrt(2.0), 1e-15);
  ASSERT_EQ(c.ac.size(), 1u);
  EXPECT_NEAR(c.ac[0], 0.0, 1e-15);
}

TEST(Raht, UnitStepPair) {
  const std::vector<double> x = {1, 0};
  const auto c = mesongs::raht_forward(x, pair_schedule());
  EXPECT_NEAR(c.dc, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(c.ac[0], -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Raht, SingleLeaf) {
  const std::vector<double> x = {4.25};
  const auto s = mesongs::build_merge_schedule(std::vector<std::uint64_t>{9}, 3);
  const auto c = mesongs::raht_forward(x, s);
  EXPECT_EQ(c.dc, 4.25);
  EXPECT_TRUE(c.ac.empty());
  EXPECT_EQ(mesongs::raht_inverse(c, s), x);
}

TEST(Raht, InverseOfEqualPair) {
  const mesongs::RahtCoefficients c{std::sqrt(2.0), {0.0}};
  const auto x = mesongs::raht_inverse(c, pair_schedule());
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
}

TEST(Raht, CountMismatches) {
  const std::vector<double> three = {1, 2, 3};
  EXPECT_THROW(mesongs::raht_forward(three, pair_schedule()), mesongs::Error);
  try {
    mesongs::raht_inverse({1.0, {0.0, 0.0}}, pair_schedule());
    FAIL();
  } catch (const mesongs::Error& e) {
    EXPECT_EQ(e.kind(), mesongs::ErrorKind::CorruptStream);
  }
}

TEST(Raht, ButterflyIsOrthonormalForAnyWeights) {
  gen::Rng rng(61);
  for (int t = 0; t < 10000; ++t) {
    const double w1 = static_cast<double>(rng.integer(1, 1 << 20));
    const double w2 = static_cast<double>(rng.integer(1, 1 << 20));
    const double n = std::sqrt(w1 + w2);
    const double a = std::sqrt(w1) / n, b = std::sqrt(w2) / n;
    // T = [[a, b], [-b, a]]
    EXPECT_NEAR(a * a + b * b, 1.0, 1e-15);
    EXPECT_NEAR(-a * b + b * a, 0.0, 1e-15);
  }
}

TEST(Raht, MatchesNodeWalkOracle) {
  gen::Rng rng(62);
  for (int t = 0; t < 200; ++t) {
    const int depth = static_cast<int>(rng.integer(1, 6));
    const auto keys = gen::distinct_keys(rng, static_cast<std::size_t>(rng.integer(1, 800)), depth);
    const auto x = gen::normal_vector(rng, keys.size());
    const auto got = mesongs::raht_forward(x, mesongs::build_merge_schedule(keys, depth));
    const auto want = oracle::raht(keys, depth, x);
    EXPECT_NEAR(got.dc, want.dc, 1e-12 * std::max(1.0, std::abs(want.dc)));
    ASSERT_EQ(got.ac.size(), want.ac.size());
    for (std::size_t i = 0; i < want.ac.size(); ++i) EXPECT_NEAR(got.ac[i], want.ac[i], 1e-12);
  }
}

TEST(Raht, RoundTripParsevalAndDc) {
  gen::Rng rng(63);
  for (int t = 0; t < 200; ++t) {
    const int depth = static_cast<int>(rng.integer(1, 6));
    const auto keys = gen::distinct_keys(rng, static_cast<std::size_t>(rng.integer(1, 4096)), depth);
    const auto s = mesongs::build_merge_schedule(keys, depth);
    const auto x = gen::normal_vector(rng, keys.size(), rng.uniform(0.01, 100.0));
    const auto c = mesongs::raht_forward(x, s);
    ASSERT_EQ(c.ac.size(), keys.size() - 1);
    const auto back = mesongs::raht_inverse(c, s);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-9);

    const double energy = sum_squares(x);
    EXPECT_LT(std::abs(energy - (c.dc * c.dc + sum_squares(c.ac))) / energy, 1e-10);
    const double dc = std::accumulate(x.begin(), x.end(), 0.0) / std::sqrt(static_cast<double>(x.size()));
    EXPECT_LT(std::abs(c.dc - dc), 1e-10 * std::max(1.0, std::abs(dc)));
  }
}

TEST(Raht, ConstantSignalHasNoDetail) {
  gen::Rng rng(64);
  for (int t = 0; t < 50; ++t) {
    const int depth = static_cast<int>(rng.integer(1, 6));
    const auto keys = gen::distinct_keys(rng, static_cast<std::size_t>(rng.integer(1, 2000)), depth);
    const double k = rng.uniform(-5, 5);
    const std::vector<double> x(keys.size(), k);
    const auto c = mesongs::raht_forward(x, mesongs::build_merge_schedule(keys, depth));
    for (double a : c.ac) EXPECT_NEAR(a, 0.0, 1e-12 * std::max(1.0, std::abs(k)));
    EXPECT_NEAR(c.dc, k * std::sqrt(static_cast<double>(keys.size())), 1e-11 * std::max(1.0, std::abs(c.dc)));
  }
}
