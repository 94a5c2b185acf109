#include <gtest/gtest.h>

#include <array>
#include <random>
#include <span>
#include <vector>

#include "certree/bitvec.hpp"

using certree::BitVector;

TEST(BitVector, MakeFromSequence) {
  EXPECT_EQ(BitVector::make({}).size(), 0U);
  EXPECT_EQ(BitVector::make({1, 0, 1, 1}).count_ones(), 3U);
  const std::array<bool, 64> zeros{};
  const BitVector z = BitVector::make(std::span<const bool>(zeros));
  EXPECT_EQ(z.size(), 64U);
  EXPECT_EQ(z.words().size(), 1U);
  EXPECT_EQ(z.count_ones(), 0U);
}

TEST(BitVector, AndTruthTable) {
  const auto a = BitVector::make({1, 0, 1, 1});
  const auto b = BitVector::make({1, 1, 0, 1});
  EXPECT_EQ(certree::bit_and(a, b), BitVector::make({1, 0, 0, 1}));
  EXPECT_EQ(a & a, a);
  EXPECT_EQ(a & BitVector::zeros(4), BitVector::zeros(4));
}

TEST(BitVector, AndNotTruthTable) {
  const auto a = BitVector::make({1, 0, 1, 1});
  const auto b = BitVector::make({1, 1, 0, 1});
  EXPECT_EQ(certree::bit_and_not(a, b), BitVector::make({0, 0, 1, 0}));
  EXPECT_EQ(BitVector::and_not(a, a), BitVector::zeros(4));
  EXPECT_EQ(BitVector::and_not(a, BitVector::zeros(4)), a);
}

TEST(BitVector, CountOnes) {
  EXPECT_EQ(certree::count_ones(BitVector::make({1, 0, 0, 1})), 2U);
  EXPECT_EQ(BitVector::zeros(100).count_ones(), 0U);
  EXPECT_EQ(BitVector::ones(65).count_ones(), 65U);
}

TEST(BitVector, LengthMismatchIsUsageError) {
  const auto a = BitVector::zeros(3);
  const auto b = BitVector::zeros(4);
  EXPECT_THROW(a & b, certree::UsageError);
  EXPECT_THROW(BitVector::and_not(a, b), certree::UsageError);
  EXPECT_THROW(a | b, certree::UsageError);
  EXPECT_THROW(BitVector::count_and(a, b), certree::UsageError);
}

TEST(BitVector, PaddingStaysZero) {
  const auto ones = BitVector::ones(70);
  ASSERT_EQ(ones.words().size(), 2U);
  EXPECT_EQ(ones.words()[1], (std::uint64_t{1} << 6) - 1);
  const auto diff = BitVector::and_not(ones, BitVector::zeros(70));
  EXPECT_EQ(diff.words()[1], (std::uint64_t{1} << 6) - 1);
}

TEST(BitVector, RandomPropertiesAgainstNaiveLoop) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(1, 500);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = len(rng);
    BitVector a(n), b(n);
    std::size_t naive_a = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool x = coin(rng), y = coin(rng);
      a.set(i, x);
      b.set(i, y);
      naive_a += x ? 1 : 0;
    }
    ASSERT_EQ(a.count_ones(), naive_a);
    ASSERT_LE(a.count_ones(), n);
    ASSERT_EQ((a & b).count_ones() + BitVector::and_not(a, b).count_ones(), a.count_ones());
    const BitVector not_b = BitVector::and_not(BitVector::ones(n), b);
    ASSERT_EQ(BitVector::and_not(a, b), a & not_b);
    ASSERT_EQ(BitVector::count_and(a, b), (a & b).count_ones());
  }
}
