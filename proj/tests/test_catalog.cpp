#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "etas/catalog.hpp"
#include "etas/errors.hpp"

using namespace etas;

TEST(Catalog, SortsByTimeAndRejectsDuplicateIds) {
  Catalog c({{5.0, 3.0, 1}, {1.0, 4.0, 2}, {3.0, 2.6, 3}});
  ASSERT_EQ(c.size(), 3u);
  EXPECT_DOUBLE_EQ(c[0].time, 1.0);
  EXPECT_DOUBLE_EQ(c[2].time, 5.0);
  EXPECT_EQ(c.next_id(), 4);
  EXPECT_THROW(Catalog({{1.0, 3.0, 7}, {2.0, 3.0, 7}}), DomainError);
  EXPECT_THROW(Catalog({{std::nan(""), 3.0, 1}}), DomainError);
}

TEST(Catalog, CsvRoundTripKeepsFullPrecision) {
  Catalog c({{0.1 + 1e-13, 2.5000000001, 0}, {123.456789012345, 6.7, 1}});
  std::stringstream ss;
  write_catalog_csv(c, ss);
  const Catalog back = read_catalog_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].time, c[i].time);
    EXPECT_EQ(back[i].magnitude, c[i].magnitude);
    EXPECT_EQ(back[i].id, c[i].id);
  }
}

TEST(Catalog, CsvAcceptsColumnAliasesAndAssignsIds) {
  std::istringstream in("mag,ts\n3.1,10\n2.9,4\n");
  const Catalog c = read_catalog_csv(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_DOUBLE_EQ(c[0].time, 4.0);
  EXPECT_DOUBLE_EQ(c[0].magnitude, 2.9);
  EXPECT_NE(c[0].id, c[1].id);
}

TEST(Catalog, CsvErrorsCarryLineNumbers) {
  std::istringstream in("time,magnitude\n1,3\n2,abc\n");
  try {
    (void)read_catalog_csv(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream no_header("foo,bar\n1,2\n");
  EXPECT_THROW((void)read_catalog_csv(no_header), ParseError);
}

TEST(Catalog, SplitDomainSeparatesHistoryAndDropsSmallEvents) {
  Catalog c({{1.0, 3.0, 0}, {5.0, 2.0, 1}, {10.0, 3.5, 2}, {20.0, 2.7, 3}, {30.0, 4.0, 4}});
  const TimeDomain d{5.0, 25.0, 2.5};
  const auto s = split_domain(c, d);
  ASSERT_EQ(s.history.size(), 1u);
  EXPECT_EQ(s.history[0].id, 0);
  ASSERT_EQ(s.modeled.size(), 2u);
  EXPECT_EQ(s.modeled[0].id, 2);
  EXPECT_EQ(s.modeled[1].id, 3);
  EXPECT_EQ(s.discarded, 2u);
}

TEST(Catalog, ValidateReportsDuplicateTimesAndSmallMagnitudes) {
  Catalog c({{1.0, 3.0, 0}, {1.0, 3.2, 1}, {2.0, 2.0, 2}});
  const auto r = validate(c, {0.0, 10.0, 2.5});
  EXPECT_EQ(r.n_events, 3u);
  EXPECT_EQ(r.duplicate_times, 1u);
  EXPECT_EQ(r.below_m0, 1u);
  EXPECT_DOUBLE_EQ(r.max_magnitude, 3.2);
  EXPECT_THROW(TimeDomain({5.0, 5.0, 2.5}).validate(), DomainError);
}

TEST(Catalog, JsonRoundTrip) {
  Catalog c({{0.5, 3.3, 4}, {2.5, 5.1, 9}}, "2009-01-01");
  const Catalog back = catalog_from_json(catalog_to_json(c));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.reference_epoch(), "2009-01-01");
  EXPECT_EQ(back[1].id, 9);
  EXPECT_EQ(back[1].magnitude, 5.1);
}
