#include <gtest/gtest.h>

#include "linkforge/csv.hpp"
#include "linkforge/text.hpp"

namespace lf = linkforge;

TEST(Text, NormalizeFoldsCaseAndStripsPunctuation) {
  EXPECT_EQ(lf::text::normalize("  Dr.  Jason  Max-Nissima "), "dr jason maxnissima");
  EXPECT_EQ(lf::text::normalize("ÉLODIE"), "élodie");
  EXPECT_EQ(lf::text::normalize("ΑΘΗΝΑ"), "αθηνα");
  EXPECT_EQ(lf::text::normalize("ИВАН"), "иван");
  EXPECT_EQ(lf::text::normalize(""), "");
}

TEST(Text, SplitAndSqueeze) {
  EXPECT_EQ(lf::text::split_ws(" a\tb  c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(lf::text::squeeze("  Nsiika   II "), "Nsiika II");
}

TEST(Text, InvalidUtf8BecomesReplacement) {
  const std::string bad = "a\xff" "b";
  EXPECT_EQ(lf::text::to_u32(bad), (std::u32string{U'a', 0xFFFD, U'b'}));
}

TEST(Csv, QuotedFieldsRoundTrip) {
  lf::csv::Table t;
  t.header = {"a", "b"};
  t.rows = {{"x,y", "he said \"hi\""}, {"line\nbreak", ""}};
  const auto back = lf::csv::parse(lf::csv::format(t));
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
}

TEST(Csv, CrLfAndBom) {
  const auto t = lf::csv::parse("\xEF\xBB\xBFid,name\r\nR1,Ann\r\n\r\nR2,Bo\r\n");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.header[0], "id");
  EXPECT_EQ(t.rows[1][1], "Bo");
}

TEST(Csv, UnterminatedQuoteIsAnError) {
  EXPECT_THROW(lf::csv::parse("a\n\"oops\n"), lf::Error);
}
