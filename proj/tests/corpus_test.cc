#include "verseforge/corpus.h"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "verseforge/error.h"

namespace verseforge {
namespace {

using Groups = std::vector<std::optional<std::int64_t>>;

std::string Derive(const Groups& g) { return DeriveRhymeScheme(g).letters(); }

// Independent relabeler: a verse's letter is decided by counting how many
// rhyming groups first appear strictly before its own group's first
// appearance.
std::string BruteForceScheme(const Groups& g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g[i]) {
      out += 'X';
      continue;
    }
    std::size_t count = 0, first = g.size();
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (g[j] == g[i]) {
        ++count;
        first = std::min(first, j);
      }
    }
    if (count < 2) {
      out += 'X';
      continue;
    }
    std::set<std::int64_t> earlier;
    for (std::size_t j = 0; j < first; ++j) {
      if (!g[j]) continue;
      std::size_t c = 0;
      for (const auto& h : g) c += (h == g[j]);
      if (c >= 2) earlier.insert(*g[j]);
    }
    out += static_cast<char>('A' + earlier.size());
  }
  return out;
}

void EnumerateGroups(std::size_t len, int max_id, Groups& current,
                     std::vector<Groups>& out) {
  if (current.size() == len) {
    out.push_back(current);
    return;
  }
  for (int id = 0; id <= max_id; ++id) {
    current.push_back(id == 0 ? std::nullopt
                              : std::optional<std::int64_t>(id));
    EnumerateGroups(len, max_id, current, out);
    current.pop_back();
  }
}

TEST(DeriveRhymeSchemeTest, Examples) {
  EXPECT_EQ(Derive({1, 2, 1, 2}), "ABAB");
  EXPECT_EQ(Derive({std::nullopt, 5, std::nullopt, 5}), "XAXA");
  EXPECT_EQ(Derive({7, 7, 3, 3, 9, 9}), "AABBCC");
  EXPECT_EQ(Derive({4, std::nullopt, 4, 8}), "AXAX");
}

TEST(DeriveRhymeSchemeTest, RejectsUnsupportedLength) {
  try {
    Derive({1, 1, 2, 2, 3});
    FAIL() << "expected an error";
  } catch (const InvariantError& e) {
    EXPECT_NE(std::string(e.what()).find("5"), std::string::npos);
  }
}

TEST(DeriveRhymeSchemeTest, MatchesBruteForceOnAllSmallAssignments) {
  std::vector<Groups> all;
  Groups cur;
  EnumerateGroups(4, 4, cur, all);
  EnumerateGroups(6, 3, cur, all);
  ASSERT_EQ(all.size(), 625u + 4096u);
  for (const Groups& g : all) {
    const std::string got = Derive(g);
    ASSERT_EQ(got, BruteForceScheme(g));
    // Output is always a valid canonical scheme.
    EXPECT_NO_THROW(RhymeScheme::Parse(got));
  }
}

TEST(DeriveRhymeSchemeTest, InvariantUnderRenamingAndIdempotent) {
  std::vector<Groups> all;
  Groups cur;
  EnumerateGroups(4, 4, cur, all);
  for (const Groups& g : all) {
    Groups renamed;
    for (const auto& id : g) {
      renamed.push_back(id ? std::optional<std::int64_t>(100 - 7 * *id)
                           : std::nullopt);
    }
    const std::string scheme = Derive(g);
    EXPECT_EQ(Derive(renamed), scheme);
    Groups from_letters;
    for (char c : scheme) {
      from_letters.push_back(c == 'X' ? std::nullopt
                                      : std::optional<std::int64_t>(c));
    }
    EXPECT_EQ(Derive(from_letters), scheme);
  }
}

TEST(RhymeSchemeTest, ParseValidates) {
  EXPECT_EQ(RhymeScheme::Parse("ABAB").letters(), "ABAB");
  EXPECT_THROW(RhymeScheme::Parse("BABA"), InvariantError);
  EXPECT_THROW(RhymeScheme::Parse("ABCA"), InvariantError);
  EXPECT_THROW(RhymeScheme::Parse("ABA"), InvariantError);
  EXPECT_THROW(RhymeScheme::Parse("AbAb"), InvariantError);
  EXPECT_NO_THROW(RhymeScheme::Parse("XXXXXX"));
}

TEST(MeterLabelTest, ParsesExactlyNineLabels) {
  int accepted = 0;
  for (char c = 'A'; c <= 'Z'; ++c) {
    try {
      EXPECT_EQ(ToChar(ParseMeter(std::string(1, c))), c);
      ++accepted;
    } catch (const InvariantError&) {
    }
  }
  EXPECT_EQ(accepted, 9);
  EXPECT_THROW(ParseMeter("JJ"), InvariantError);
}

TEST(BucketizeYearTest, Examples) {
  EXPECT_EQ(BucketizeYear(std::nullopt).ToString(), "NaN");
  EXPECT_EQ(BucketizeYear(1900).start, 1900);
  EXPECT_EQ(BucketizeYear(1893).start, 1880);
}

TEST(BucketizeYearTest, MatchesEnumerationOverTwoCenturies) {
  for (int year = 1800; year <= 1999; ++year) {
    int expected = 1800;
    while (expected + 20 <= year) expected += 20;
    EXPECT_EQ(BucketizeYear(year).start, expected) << year;
    EXPECT_EQ(*BucketizeYear(year).start % 20, 0);
  }
}

TEST(YearBucketTest, ParseRoundTrip) {
  EXPECT_EQ(YearBucket::Parse("1880"), BucketizeYear(1893));
  EXPECT_EQ(YearBucket::Parse("NaN"), BucketizeYear(std::nullopt));
  EXPECT_THROW(YearBucket::Parse("1893"), InvariantError);
  EXPECT_THROW(YearBucket::Parse("19x0"), InvariantError);
}

TEST(IngestTest, EmptyFileGivesNoStrophes) {
  std::istringstream in("");
  EXPECT_TRUE(IngestStream(in).empty());
}

TEST(IngestTest, ReadsSampleStrophe) {
  const auto strophes =
      Ingest(std::string(VERSEFORGE_TEST_DATA_DIR) + "/sample_strophe.jsonl");
  ASSERT_EQ(strophes.size(), 1u);
  const Strophe& s = strophes[0];
  EXPECT_EQ(s.scheme.letters(), "ABAB");
  EXPECT_EQ(s.year_bucket.ToString(), "1900");
  ASSERT_EQ(s.verses.size(), 4u);
  EXPECT_EQ(s.verses[0].text, "Tvá loď jde po vysokém moři,");
  EXPECT_EQ(s.verses[3].gold_meter, MeterLabel::kIamb);
}

TEST(IngestTest, RejectsFiveVerseStropheWithLineNumber) {
  std::istringstream in(
      "\n{\"year\": null, \"strophes\": [[{\"text\": \"a\", \"rhyme\": null, "
      "\"meter\": \"J\"}, {\"text\": \"b\", \"rhyme\": null, \"meter\": "
      "\"J\"}, {\"text\": \"c\", \"rhyme\": null, \"meter\": \"J\"}, "
      "{\"text\": \"d\", \"rhyme\": null, \"meter\": \"J\"}, {\"text\": "
      "\"e\", \"rhyme\": null, \"meter\": \"J\"}]]}\n");
  try {
    IngestStream(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("length 5"), std::string::npos);
  }
}

TEST(IngestTest, RejectsBadFields) {
  const char* bad[] = {
      "not json",
      "{\"year\": 1900}",
      "{\"year\": \"1900\", \"strophes\": []}",
      "{\"year\": 1900, \"strophes\": [[{\"text\": \"a\", \"meter\": \"Q\"}, "
      "{\"text\": \"a\", \"meter\": \"J\"}, {\"text\": \"a\", \"meter\": "
      "\"J\"}, {\"text\": \"a\", \"meter\": \"J\"}]]}",
      "{\"year\": 1900, \"strophes\": [[{\"text\": \"  \", \"meter\": \"J\"}, "
      "{\"text\": \"a\", \"meter\": \"J\"}, {\"text\": \"a\", \"meter\": "
      "\"J\"}, {\"text\": \"a\", \"meter\": \"J\"}]]}",
  };
  for (const char* line : bad) {
    std::istringstream in(line);
    EXPECT_THROW(IngestStream(in), ParseError) << line;
  }
}

TEST(IngestTest, MissingFileIsIoError) {
  EXPECT_THROW(Ingest("/nonexistent/corpus.jsonl"), IoError);
}

std::vector<Strophe> MakeStrophes(std::size_t n) {
  std::vector<Strophe> out;
  for (std::size_t i = 0; i < n; ++i) {
    Strophe s;
    s.verses.resize(4, Verse{"verš " + std::to_string(i), std::nullopt,
                             MeterLabel::kIamb});
    s.poem_index = i;
    out.push_back(s);
  }
  return out;
}

TEST(SplitTest, NinetyFiveFive) {
  const auto strophes = MakeStrophes(100);
  const auto [train, test] = Split(strophes, 0.05, 11);
  EXPECT_EQ(train.size(), 95u);
  EXPECT_EQ(test.size(), 5u);
}

TEST(SplitTest, DeterministicExactPartition) {
  const auto strophes = MakeStrophes(57);
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const auto a = Split(strophes, 0.3, seed);
    const auto b = Split(strophes, 0.3, seed);
    std::multiset<std::size_t> seen;
    for (std::size_t i = 0; i < a.first.size(); ++i) {
      EXPECT_EQ(a.first[i].poem_index, b.first[i].poem_index);
      seen.insert(a.first[i].poem_index);
    }
    for (std::size_t i = 0; i < a.second.size(); ++i) {
      EXPECT_EQ(a.second[i].poem_index, b.second[i].poem_index);
      seen.insert(a.second[i].poem_index);
    }
    ASSERT_EQ(seen.size(), 57u);
    for (std::size_t i = 0; i < 57; ++i) EXPECT_EQ(seen.count(i), 1u);
  }
}

TEST(SplitTest, FloorRoundingForTestPart) {
  const auto [train, test] = Split(MakeStrophes(3), 0.5, 4);
  EXPECT_EQ(train.size(), 2u);
  EXPECT_EQ(test.size(), 1u);
  EXPECT_EQ(Split(MakeStrophes(100), 0.29, 4).second.size(), 29u);
  EXPECT_THROW(Split(MakeStrophes(3), 1.0, 4), InvariantError);
  EXPECT_THROW(Split(MakeStrophes(3), 0.0, 4), InvariantError);
}

TEST(StatsTest, EmptyInput) {
  const CorpusStats s = ComputeStats({});
  EXPECT_TRUE(s.scheme_counts.empty());
  EXPECT_TRUE(s.meter_counts.empty());
  EXPECT_EQ(s.verses + s.strophes + s.poems, 0u);
}

TEST(StatsTest, CountsSchemes) {
  auto strophes = MakeStrophes(4);
  for (int i = 0; i < 3; ++i) strophes[i].scheme = RhymeScheme::Parse("ABAB");
  strophes[3].scheme = RhymeScheme::Parse("AABB");
  strophes[3].verses[0].gold_meter = MeterLabel::kTrochee;
  strophes[3].year_bucket = BucketizeYear(1901);
  const CorpusStats s = ComputeStats(strophes);
  EXPECT_EQ(s.scheme_counts, (std::map<std::string, std::size_t>{
                                 {"ABAB", 3}, {"AABB", 1}}));
  EXPECT_EQ(s.meter_counts, (std::map<char, std::size_t>{{'J', 15}, {'T', 1}}));
  EXPECT_EQ(s.year_counts, (std::map<std::string, std::size_t>{
                               {"NaN", 3}, {"1900", 1}}));
  EXPECT_EQ(s.verses, 16u);
  EXPECT_EQ(s.strophes, 4u);
  EXPECT_EQ(s.poems, 4u);
}

TEST(StatsTest, SampleStropheHandTally) {
  const auto strophes =
      Ingest(std::string(VERSEFORGE_TEST_DATA_DIR) + "/sample_strophe.jsonl");
  const CorpusStats s = ComputeStats(strophes);
  EXPECT_EQ(s.meter_counts, (std::map<char, std::size_t>{{'J', 4}}));
  EXPECT_EQ(s.poems, 1u);
}

TEST(FilterRareSchemesTest, DropsRareSchemes) {
  auto strophes = MakeStrophes(5);
  for (int i = 0; i < 4; ++i) strophes[i].scheme = RhymeScheme::Parse("ABAB");
  strophes[4].scheme = RhymeScheme::Parse("AABB");
  EXPECT_EQ(FilterRareSchemes(strophes, 2).size(), 4u);
  EXPECT_EQ(FilterRareSchemes(strophes, 1).size(), 5u);
}

}  // namespace
}  // namespace verseforge
