#include "verseforge/generation.h"

#include <gtest/gtest.h>

#include <map>

#include "verseforge/error.h"
#include "verseforge/utf8.h"

#include "stub_model.h"

namespace verseforge::generation {
namespace {

using formats::DataFormat;
using tokenizers::TokenId;
using tokenizers::Tokenizer;

using stub::ScriptLine;
using stub::StubModel;
using stub::StubTokenizer;

const char* const kHints[] = {"ání", "oři", "eje", "a", "ý", "osti"};
const char* const kTexts[] = {"a když přijde", "tvá loď", "v ně brázdu",
                              "svou přídu", "a bok svůj", "jde po moři"};

// Every verse gets a distinct annotation so that forcing is observable.
std::vector<ScriptLine> DistinctScript(std::size_t n, DataFormat f, Rng& rng) {
  std::vector<ScriptLine> s;
  for (std::size_t i = 0; i < n; ++i) {
    std::string ann;
    if (f == DataFormat::kMeterVerse) {
      ann += ToChar(kMeterPriority[rng.NextBelow(kMeterPriority.size())]);
      ann += " # ";
    }
    ann += std::to_string(2 + i * 3 + rng.NextBelow(3)) + " # " +
           kHints[rng.NextBelow(6)] + std::to_string(i) + " # ";
    s.push_back({ann, kTexts[rng.NextBelow(6)]});
  }
  return s;
}

GenerationRequest Request(std::string_view scheme, DataFormat f,
                          std::uint64_t seed = 1) {
  GenerationRequest r;
  r.scheme = RhymeScheme::Parse(scheme);
  r.year = YearBucket::Parse("1900");
  r.format = f;
  r.strophe_meter = MeterLabel::kIamb;
  r.seed = seed;
  return r;
}

// Checks the forced-prefix contract and returns the number of forced verses.
std::size_t ExpectForcingContract(const GeneratedStrophe& g,
                                  const RhymeScheme& scheme) {
  EXPECT_TRUE(g.ok()) << g.error << "\n" << g.raw_text;
  if (!g.ok()) return 0;
  std::map<char, std::string> seen;
  std::size_t forced = 0;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    const char letter = scheme[i];
    const std::string& prefix = g.parsed->lines[i].prefix;
    const bool has_partner = letter != 'X' && seen.count(letter) > 0;
    EXPECT_EQ(g.forced[i], has_partner) << "verse " << i << " of " << scheme.letters();
    if (has_partner) {
      EXPECT_EQ(prefix, seen[letter]) << scheme.letters();
      ++forced;
    } else if (letter != 'X') {
      seen[letter] = prefix;
    }
  }
  return forced;
}

TEST(ForcedTest, AabbCopiesFirstAnnotation) {
  const Tokenizer tok = StubTokenizer();
  const std::vector<ScriptLine> script = {{"T # 8 # ání # ", "a když přijde"},
                                          {"J # 9 # oři # ", "tvá loď"},
                                          {"D # 7 # eje # ", "v ně brázdu"},
                                          {"A # 6 # a # ", "svou přídu"}};
  const StubModel model(tok, script, 3);
  const auto g = GenerateForced(model, tok, Request("AABB", DataFormat::kMeterVerse));
  ASSERT_TRUE(g.ok()) << g.error;
  EXPECT_EQ(g.generated_text,
            "T # 8 # ání # a když přijde\n"
            "T # 8 # ání # tvá loď\n"
            "D # 7 # eje # v ně brázdu\n"
            "D # 7 # eje # svou přídu\n");
  EXPECT_EQ(g.forced, (std::vector<bool>{false, true, false, true}));
  EXPECT_TRUE(g.machine_generated);
}

TEST(ForcedTest, NamedSchemes) {
  const Tokenizer tok = StubTokenizer();
  const std::pair<const char*, std::size_t> cases[] = {
      {"AABB", 2}, {"ABAB", 2}, {"XAXA", 1}, {"AABBCC", 3}, {"ABBA", 2}, {"XXXX", 0}};
  Rng rng(3);
  for (DataFormat f : {DataFormat::kVersePar, DataFormat::kMeterVerse}) {
    for (const auto& [scheme, expected] : cases) {
      const auto req = Request(scheme, f);
      const StubModel model(tok, DistinctScript(req.scheme.size(), f, rng),
                            formats::VerseFieldCount(f));
      const auto g = GenerateForced(model, tok, req);
      EXPECT_EQ(ExpectForcingContract(g, req.scheme), expected) << scheme;
    }
  }
}

TEST(ForcedTest, AbabForcesThirdAndFourthFromFirstAndSecond) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(9);
  const auto req = Request("ABAB", DataFormat::kMeterVerse);
  const StubModel model(tok, DistinctScript(4, DataFormat::kMeterVerse, rng), 3);
  const auto g = GenerateForced(model, tok, req);
  ASSERT_TRUE(g.ok());
  EXPECT_EQ(g.parsed->lines[2].prefix, g.parsed->lines[0].prefix);
  EXPECT_EQ(g.parsed->lines[3].prefix, g.parsed->lines[1].prefix);
  EXPECT_NE(g.parsed->lines[0].prefix, g.parsed->lines[1].prefix);
}

TEST(ForcedTest, XxxxMatchesBasicDecoding) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto req = Request(seed % 2 ? "XXXX" : "XXXXXX", DataFormat::kMeterVerse, seed);
    const StubModel model(tok, DistinctScript(req.scheme.size(), req.format, rng),
                          3, /*noise=*/0.3);
    const auto forced = GenerateForced(model, tok, req);
    const auto basic = GenerateBasic(model, tok, req);
    EXPECT_EQ(forced.raw_text, basic.raw_text);
    EXPECT_EQ(forced.retries, 0u);
    for (bool f : forced.forced) EXPECT_FALSE(f);
  }
}

TEST(ForcedTest, RandomizedSchemes) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(2026);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng.NextBelow(2) ? 6 : 4;
    std::vector<std::optional<std::int64_t>> groups(n);
    for (auto& g : groups) {
      if (rng.NextBelow(5) > 0) g = static_cast<std::int64_t>(rng.NextBelow(3));
    }
    const RhymeScheme scheme = DeriveRhymeScheme(groups);
    const DataFormat f = trial % 2 ? DataFormat::kMeterVerse : DataFormat::kVersePar;
    auto req = Request(scheme.letters(), f, rng.NextU64());
    const StubModel model(tok, DistinctScript(n, f, rng), formats::VerseFieldCount(f));
    const auto g = GenerateForced(model, tok, req);
    std::size_t expected = 0;
    std::set<char> letters;
    for (char c : scheme.letters()) {
      if (c != 'X' && !letters.insert(c).second) ++expected;
    }
    EXPECT_EQ(ExpectForcingContract(g, scheme), expected) << scheme.letters();
  }
}

TEST(ForcedTest, MalformedFirstAnnotationIsRetried) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(5);
  std::size_t total_retries = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto req = Request("AABB", DataFormat::kMeterVerse, seed);
    const StubModel model(tok, DistinctScript(4, req.format, rng), 3, 0.5);
    const auto g = GenerateForced(model, tok, req);
    total_retries += g.retries;
    if (g.ok()) ExpectForcingContract(g, req.scheme);
  }
  EXPECT_GT(total_retries, 0u);
}

TEST(ForcedTest, ExhaustedRetriesFailStructurally) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(6);
  const auto req = Request("AABB", DataFormat::kMeterVerse);
  const StubModel model(tok, DistinctScript(4, req.format, rng), 3, 1.0);
  const auto g = GenerateForced(model, tok, req);
  EXPECT_FALSE(g.ok());
  EXPECT_EQ(g.retries, static_cast<std::size_t>(kMaxRetries));
  EXPECT_NE(g.error.find("retries"), std::string::npos);
  EXPECT_FALSE(g.raw_text.empty());
}

TEST(BasicTest, MalformedOutputIsReportedNotHidden) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(6);
  const auto req = Request("AABB", DataFormat::kMeterVerse);
  const StubModel model(tok, DistinctScript(4, req.format, rng), 3, 1.0);
  const auto g = GenerateBasic(model, tok, req);
  EXPECT_FALSE(g.ok());
  EXPECT_FALSE(g.parsed);
  EXPECT_NE(g.error.find("line 2"), std::string::npos) << g.error;
  EXPECT_EQ(g.raw_text.substr(0, 14), "# AABB # 1900\n");
}

TEST(BasicTest, ZeroBudgetIsEmptyAndTruncated) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(1);
  const StubModel model(tok, DistinctScript(4, DataFormat::kMeterVerse, rng), 3);
  auto req = Request("ABAB", DataFormat::kMeterVerse);
  req.max_tokens = 0;
  for (Decoding d : {Decoding::kBasic, Decoding::kForced}) {
    const auto g = Generate(model, tok, req, d);
    EXPECT_TRUE(g.generated_text.empty());
    EXPECT_TRUE(g.truncated);
    EXPECT_EQ(g.sampled_tokens, 0u);
    EXPECT_EQ(model.calls(), 0u);
  }
}

TEST(BasicTest, SmallBudgetTruncates) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(1);
  const StubModel model(tok, DistinctScript(4, DataFormat::kVersePar, rng), 2);
  auto req = Request("ABAB", DataFormat::kVersePar);
  req.max_tokens = 10;
  const auto g = GenerateBasic(model, tok, req);
  EXPECT_TRUE(g.truncated);
  EXPECT_EQ(g.sampled_tokens, 10u);
  EXPECT_EQ(utf8::Length(g.generated_text), 10u);
  EXPECT_FALSE(g.ok());
}

TEST(BasicTest, StopsAfterSchemeLengthWithoutEos) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(2);
  const StubModel model(tok, DistinctScript(4, DataFormat::kMeterVerse, rng), 3,
                        0.0, /*endless=*/true);
  const auto g = GenerateBasic(model, tok, Request("ABAB", DataFormat::kMeterVerse));
  EXPECT_TRUE(g.ok()) << g.error;
  EXPECT_FALSE(g.truncated);
  std::size_t lines = 0;
  for (char c : g.generated_text) lines += c == '\n';
  EXPECT_EQ(lines, 4u);
}

TEST(BasicTest, DeterministicUnderSeed) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(8);
  const StubModel model(tok, DistinctScript(6, DataFormat::kMeterVerse, rng), 3, 0.4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto req = Request("AABBCC", DataFormat::kMeterVerse, seed);
    EXPECT_EQ(GenerateBasic(model, tok, req).raw_text,
              GenerateBasic(model, tok, req).raw_text);
    EXPECT_EQ(GenerateForced(model, tok, req).raw_text,
              GenerateForced(model, tok, req).raw_text);
  }
}

TEST(BasicTest, VerseMetersSeedTheAnnotation) {
  const Tokenizer tok = StubTokenizer();
  const std::vector<ScriptLine> script = {{"J # 8 # a # ", "tvá loď"},
                                          {"T # 8 # eje # ", "v ně"},
                                          {"J # 8 # a # ", "svou"},
                                          {"T # 8 # oři # ", "a bok"}};
  const StubModel model(tok, script, 3);
  auto req = Request("AXAX", DataFormat::kMeterVerse);
  req.year = YearBucket::Parse("1880");
  req.verse_meters = {MeterLabel::kIamb, MeterLabel::kDactyl, MeterLabel::kIamb,
                      MeterLabel::kDactyl};
  const auto g = GenerateBasic(model, tok, req);
  ASSERT_TRUE(g.ok()) << g.error;
  EXPECT_EQ(g.raw_text.substr(0, 18), "# AXAX # 1880\nJ # ");
  // The stub continues the seeded line from its own script position.
  EXPECT_EQ(g.parsed->lines[1].annotation->meter, MeterLabel::kDactyl);
}

TEST(RequestTest, Validation) {
  const Tokenizer tok = StubTokenizer();
  Rng rng(1);
  const StubModel model(tok, DistinctScript(4, DataFormat::kBasic, rng), 0);
  EXPECT_THROW(GenerateForced(model, tok, Request("ABAB", DataFormat::kBasic)),
               InvariantError);
  auto req = Request("ABAB", DataFormat::kMeterVerse);
  req.verse_meters = {MeterLabel::kIamb};
  EXPECT_THROW(GenerateBasic(model, tok, req), InvariantError);
  req = Request("ABAB", DataFormat::kVersePar);
  req.strophe_meter.reset();
  EXPECT_THROW(GenerateBasic(model, tok, req), InvariantError);
  req.verse_meters = {MeterLabel::kTrochee, MeterLabel::kIamb, MeterLabel::kTrochee,
                      MeterLabel::kIamb};
  EXPECT_EQ(HeaderText(req), "# ABAB # 1900 # J");
  req.temperature = 0;
  EXPECT_THROW(GenerateBasic(model, tok, req), InvariantError);
  EXPECT_EQ(ParseDecoding("Forced"), Decoding::kForced);
  EXPECT_THROW(ParseDecoding("beam"), InvariantError);
}

TEST(BasicTest, BasicFormatPlainVerses) {
  const Tokenizer tok = StubTokenizer();
  const std::vector<ScriptLine> script = {
      {"", "tvá loď"}, {"", "v ně"}, {"", "svou"}, {"", "a bok"}};
  const StubModel model(tok, script, 0);
  const auto g = GenerateBasic(model, tok, Request("ABAB", DataFormat::kBasic));
  ASSERT_TRUE(g.ok()) << g.error;
  EXPECT_EQ(g.raw_text, "# ABAB # 1900 # J\ntvá loď\nv ně\nsvou\na bok\n");
}

}  // namespace
}  // namespace verseforge::generation
