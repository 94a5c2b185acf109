#include <gtest/gtest.h>

#include "certree/rational.hpp"

using certree::ExactValue;

TEST(ExactValue, ReducesAndCompares) {
  EXPECT_EQ(ExactValue(2, 4), ExactValue(1, 2));
  EXPECT_EQ(ExactValue(3, -6), ExactValue(-1, 2));
  EXPECT_LT(ExactValue(1, 3), ExactValue(1, 2));
  EXPECT_EQ(ExactValue(1, 3) + ExactValue(1, 6), ExactValue(1, 2));
  EXPECT_EQ(ExactValue(1, 2) - ExactValue(1, 3), ExactValue(1, 6));
  EXPECT_EQ(ExactValue(2, 3) * ExactValue(3, 4), ExactValue(1, 2));
  EXPECT_EQ(ExactValue(1, 2) / ExactValue(1, 4), ExactValue(2));
  EXPECT_THROW(ExactValue(1, 0), certree::UsageError);
}

TEST(ExactValue, ParsesDecimalsExactly) {
  EXPECT_EQ(ExactValue::parse("0.005"), ExactValue(1, 200));
  EXPECT_EQ(ExactValue::parse("1/200"), ExactValue(1, 200));
  EXPECT_EQ(ExactValue::parse("1e-2"), ExactValue(1, 100));
  EXPECT_EQ(ExactValue::parse("-1.25"), ExactValue(-5, 4));
  EXPECT_THROW(ExactValue::parse("abc"), certree::UsageError);
  EXPECT_THROW(ExactValue::parse(""), certree::UsageError);
}

TEST(ExactValue, FloorAndRendering) {
  EXPECT_EQ(ExactValue(7, 2).floor(), 3);
  EXPECT_EQ(ExactValue(-7, 2).floor(), -4);
  EXPECT_EQ(ExactValue(33, 100).to_string(), "33/100");
  EXPECT_EQ(ExactValue(4).to_string(), "4");
  EXPECT_EQ(ExactValue(1, 6).to_decimal(4), "0.1667");
}

TEST(ExactValue, OverflowIsResourceError) {
  const ExactValue big(std::int64_t{1} << 62, 1);
  EXPECT_THROW(big * big, certree::ResourceError);
}
