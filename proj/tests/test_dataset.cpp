#include <gtest/gtest.h>

#include <sstream>

#include "certree/dataset.hpp"
#include "test_util.hpp"

using namespace certree;

TEST(LoadCsv, ParsesHeaderAndLabel) {
  std::istringstream in("a,b,y\n0,1,1\n1,0,0\n0,1,1\n");
  const Dataset ds = load_csv(in, "y");
  EXPECT_EQ(ds.n_samples(), 3U);
  EXPECT_EQ(ds.n_features(), 2U);
  EXPECT_EQ(ds.labels(), BitVector::make({1, 0, 1}));
  EXPECT_EQ(ds.label_one_count(), 2U);
  EXPECT_EQ(ds.feature_names(), (std::vector<std::string>{"a", "b"}));
}

TEST(LoadCsv, MissingLabelIsFormatError) {
  std::istringstream in("a,b,y\n0,1,1\n");
  EXPECT_THROW(load_csv(in, "z"), FormatError);
}

TEST(LoadCsv, NonBinaryCellNamesLocation) {
  std::istringstream in("a,y\n2,0\n");
  try {
    load_csv(in, "y");
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'a'"), std::string::npos) << msg;
  }
}

TEST(LoadCsv, EmptyInputsRejected) {
  std::istringstream no_rows("a,y\n");
  EXPECT_THROW(load_csv(no_rows, "y"), FormatError);
  std::istringstream no_features("y\n1\n");
  EXPECT_THROW(load_csv(no_features, "y"), FormatError);
  std::istringstream dup("a,a,y\n0,1,1\n");
  EXPECT_THROW(load_csv(dup, "y"), FormatError);
}

TEST(LoadCsv, RoundTrip) {
  std::mt19937_64 rng(3);
  const Dataset ds = testkit::random_dataset(rng, 37, 4);
  std::stringstream buf;
  write_csv(buf, ds, "label");
  const Dataset back = load_csv(buf, "label");
  EXPECT_EQ(back.columns(), ds.columns());
  EXPECT_EQ(back.labels(), ds.labels());
  EXPECT_EQ(back.feature_names(), ds.feature_names());
}

TEST(EquivalenceIndex, SixSampleExample) {
  const Dataset ds = testkit::six_sample_dataset();
  const auto eq = build_equivalence_index(ds);
  ASSERT_EQ(eq.n_classes(), 2U);
  EXPECT_EQ(eq.theta[0], ExactValue(0));
  EXPECT_EQ(eq.theta[1], ExactValue(1, 6));
  EXPECT_EQ(eq.z.count_ones(), 1U);
  EXPECT_EQ(eq.class_of, (std::vector<std::uint32_t>{0, 0, 0, 0, 1, 1}));
}

TEST(EquivalenceIndex, DistinctRowsHaveNoMass) {
  const Dataset ds = Dataset::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
  const auto eq = build_equivalence_index(ds);
  EXPECT_EQ(eq.n_classes(), 4U);
  for (const auto& t : eq.theta) EXPECT_EQ(t, ExactValue(0));
  EXPECT_FALSE(eq.z.any());
}

TEST(EquivalenceIndex, TieCountsZeroAsMinority) {
  const Dataset ds = Dataset::from_rows({{1}, {1}, {0}}, {0, 1, 1});
  const auto eq = build_equivalence_index(ds);
  EXPECT_EQ(eq.theta[0], ExactValue(1, 3));
  EXPECT_FALSE(eq.minority_label[0]);
  EXPECT_TRUE(eq.z.test(0));
  EXPECT_FALSE(eq.z.test(1));
}

TEST(EquivalenceIndex, RandomInvariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Dataset ds = testkit::random_dataset(rng, 1 + trial % 40, 1 + trial % 4);
    const auto eq = build_equivalence_index(ds);
    EXPECT_EQ(eq.class_of, build_equivalence_index(ds).class_of);
    ExactValue sum(0);
    for (const auto& t : eq.theta) sum += t;
    EXPECT_EQ(sum, eq.theta_sum());
    EXPECT_LE(sum, ExactValue(1, 2));
    for (std::size_t c = 0; c < eq.n_classes(); ++c) EXPECT_LE(2 * eq.minority_count[c], eq.class_size[c]);
    for (std::size_t a = 0; a < ds.n_samples(); ++a) {
      for (std::size_t b = 0; b < ds.n_samples(); ++b) {
        bool same = true;
        for (std::size_t j = 0; j < ds.n_features(); ++j) same = same && ds.value(a, j) == ds.value(b, j);
        EXPECT_EQ(same, eq.class_of[a] == eq.class_of[b]);
      }
    }
  }
}

TEST(LiteralColumn, PolarityAndComplement) {
  const Dataset ds = Dataset::from_rows({{0}, {1}, {0}}, {0, 0, 0}, {"a"});
  EXPECT_EQ(literal_column(ds, 0, true), BitVector::make({0, 1, 0}));
  EXPECT_EQ(literal_column(ds, 0, false), BitVector::make({1, 0, 1}));
  EXPECT_EQ(literal_column(ds, 0, true).count_ones() + literal_column(ds, 0, false).count_ones(), 3U);
  EXPECT_THROW(literal_column(ds, 1, true), UsageError);
}
