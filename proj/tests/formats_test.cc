#include "verseforge/formats.h"

#include <gtest/gtest.h>

#include "verseforge/error.h"

namespace verseforge::formats {
namespace {

Strophe SampleStrophe() {
  const auto strophes =
      Ingest(std::string(VERSEFORGE_TEST_DATA_DIR) + "/sample_strophe.jsonl");
  return strophes.at(0);
}

constexpr DataFormat kAll[] = {DataFormat::kBasic, DataFormat::kVersePar,
                               DataFormat::kMeterVerse};

TEST(EncodeTest, BasicLayout) {
  EXPECT_EQ(Encode(SampleStrophe(), DataFormat::kBasic),
            "# ABAB # 1900 # J\n"
            "Tvá loď jde po vysokém moři,\n"
            "v ně brázdu jako stříbro reje,\n"
            "svou přídu v modré vlny noří\n"
            "a bok svůj pěnné do peřeje.\n");
}

TEST(EncodeTest, VerseParLayout) {
  EXPECT_EQ(Encode(SampleStrophe(), DataFormat::kVersePar),
            "# ABAB # 1900 # J\n"
            "9 # oři # Tvá loď jde po vysokém moři,\n"
            "9 # eje # v ně brázdu jako stříbro reje,\n"
            "9 # oří # svou přídu v modré vlny noří\n"
            "9 # eje # a bok svůj pěnné do peřeje.\n");
}

TEST(EncodeTest, MeterVerseLayout) {
  EXPECT_EQ(Encode(SampleStrophe(), DataFormat::kMeterVerse),
            "# ABAB # 1900\n"
            "J # 9 # oři # Tvá loď jde po vysokém moři,\n"
            "J # 9 # eje # v ně brázdu jako stříbro reje,\n"
            "J # 9 # oří # svou přídu v modré vlny noří\n"
            "J # 9 # eje # a bok svůj pěnné do peřeje.\n");
}

TEST(EncodeTest, AnnotationOfForcedExampleVerse) {
  const Verse v{"A když přijde z nenadání,", 1, MeterLabel::kTrochee};
  EXPECT_EQ(AnnotationPrefix(Annotate(v, DataFormat::kMeterVerse),
                             DataFormat::kMeterVerse),
            "T # 8 # ání # ");
}

TEST(EncodeTest, NullYearAndModalMeterTieBreak) {
  Strophe s = SampleStrophe();
  s.year_bucket = YearBucket{};
  s.verses[0].gold_meter = MeterLabel::kTrochee;
  s.verses[1].gold_meter = MeterLabel::kTrochee;
  s.verses[2].gold_meter = MeterLabel::kDactyl;
  s.verses[3].gold_meter = MeterLabel::kDactyl;
  EXPECT_EQ(HeaderLine(MakeHeader(s, DataFormat::kBasic), DataFormat::kBasic),
            "# ABAB # NaN # T");
  s.verses[0].gold_meter = MeterLabel::kDactyl;
  EXPECT_EQ(ModalMeter(s.verses), MeterLabel::kDactyl);
}

TEST(EncodeTest, SubsetsByFieldDeletion) {
  const Strophe s = SampleStrophe();
  const ParsedStrophe mv = Parse(Encode(s, DataFormat::kMeterVerse),
                                 DataFormat::kMeterVerse);
  std::string par = "# ABAB # 1900 # J\n";
  std::string basic = par;
  for (const ParsedLine& l : mv.lines) {
    par += std::to_string(l.annotation->syllables) + " # " +
           l.annotation->ending_hint + " # " + l.text + "\n";
    basic += l.text + "\n";
  }
  EXPECT_EQ(Encode(s, DataFormat::kVersePar), par);
  EXPECT_EQ(Encode(s, DataFormat::kBasic), basic);
}

TEST(ParseTest, RoundTripAllFormats) {
  const Strophe s = SampleStrophe();
  for (DataFormat f : kAll) {
    const ParsedStrophe p = Parse(Encode(s, f), f);
    EXPECT_EQ(p.header, MakeHeader(s, f));
    ASSERT_EQ(p.lines.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(p.lines[i].text, s.verses[i].text);
      if (f == DataFormat::kBasic) {
        EXPECT_FALSE(p.lines[i].annotation.has_value());
      } else {
        EXPECT_EQ(*p.lines[i].annotation, Annotate(s.verses[i], f));
        EXPECT_EQ(p.lines[i].prefix,
                  AnnotationPrefix(*p.lines[i].annotation, f));
      }
    }
  }
}

TEST(ParseTest, MeterVerseLine) {
  const ParsedLine l = ParseVerseLine("J # 9 # oři # Tvá loď jde po vysokém moři,",
                                      DataFormat::kMeterVerse);
  ASSERT_TRUE(l.annotation);
  EXPECT_EQ(l.annotation->meter, MeterLabel::kIamb);
  EXPECT_EQ(l.annotation->syllables, 9u);
  EXPECT_EQ(l.annotation->ending_hint, "oři");
  EXPECT_EQ(l.prefix, "J # 9 # oři # ");
  EXPECT_EQ(l.text, "Tvá loď jde po vysokém moři,");
}

TEST(ParseTest, MeterVerseHeaderHasNoStropheMeter) {
  const StropheHeader h = ParseHeader("# ABAB # 1900", DataFormat::kMeterVerse);
  EXPECT_EQ(h.scheme.letters(), "ABAB");
  EXPECT_EQ(h.year.start, 1900);
  EXPECT_FALSE(h.strophe_meter);
}

TEST(ParseTest, Leniency) {
  EXPECT_NO_THROW(ParseHeader("# ABAB # 1900 #  ", DataFormat::kMeterVerse));
  EXPECT_NO_THROW(ParseHeader("# ABAB # 1900 # J #", DataFormat::kBasic));
  const ParsedLine l =
      ParseVerseLine("9 # oři # a # b #c   \t", DataFormat::kVersePar);
  EXPECT_EQ(l.text, "a # b #c");
  const ParsedStrophe p = Parse(
      "\n# AABB # NaN\n\nT # 4 # a # x y\nT # 4 # a # x y  \n"
      "T # 4 # b # z\nT # 4 # b # z\n\n",
      DataFormat::kMeterVerse);
  EXPECT_EQ(p.lines.size(), 4u);
  EXPECT_FALSE(p.header.year.start);
}

void ExpectParseErrorAt(std::string_view text, DataFormat f, std::size_t line) {
  try {
    Parse(text, f);
    ADD_FAILURE() << "no error for: " << text;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
  }
}

TEST(ParseTest, ErrorsCarryLineNumbers) {
  const DataFormat mv = DataFormat::kMeterVerse;
  ExpectParseErrorAt("ABAB # 1900\n", mv, 1);
  ExpectParseErrorAt("# ABCD # 1900\n", mv, 1);
  ExpectParseErrorAt("# ABAB # 1901\n", mv, 1);
  ExpectParseErrorAt("# ABAB # 1900 # J\n", mv, 1);
  ExpectParseErrorAt("# AABB # 1900\nJ # 9 # x\n", mv, 2);
  ExpectParseErrorAt("# AABB # 1900\nJ # 9 # a # t\nJ # nine # a # t\n", mv, 3);
  ExpectParseErrorAt("# AABB # 1900\nQ # 9 # a # t\n", mv, 2);
  ExpectParseErrorAt("# AABB # 1900\nJ # 9 # a #   \n", mv, 2);
  ExpectParseErrorAt("# AABB # 1900\nJ # 9 #  # t\n", mv, 2);
  ExpectParseErrorAt("# AABB # 1900\nJ # 9 # a # t\n", mv, 2);
  ExpectParseErrorAt("", mv, 1);
  ExpectParseErrorAt("# ABAB # 1900 # Z\n", DataFormat::kBasic, 1);
}

TEST(ConsistencyTest, FigureIsConsistent) {
  const ParsedStrophe p =
      Parse(Encode(SampleStrophe(), DataFormat::kVersePar), DataFormat::kVersePar);
  const auto report = CheckConsistency(p);
  ASSERT_EQ(report.size(), 4u);
  for (const auto& c : report) {
    EXPECT_TRUE(c.syllables_match);
    EXPECT_TRUE(c.ending_matches);
  }
}

TEST(ConsistencyTest, MismatchesFlagged) {
  const ParsedStrophe p = Parse(
      "# AABB # 1900 # J\n"
      "9 # oři # A když přijde z nenadání,\n"
      "9 # eje # Tvá loď jde po vysokém moři,\n"
      "9 # eje # v ně brázdu jako stříbro reje,\n"
      "9 # eje # a bok svůj pěnné do peřeje.\n",
      DataFormat::kVersePar);
  const auto r = CheckConsistency(p);
  EXPECT_FALSE(r[0].syllables_match);
  EXPECT_EQ(r[0].actual_syllables, 8u);
  EXPECT_FALSE(r[0].ending_matches);
  EXPECT_TRUE(r[1].syllables_match);
  EXPECT_FALSE(r[1].ending_matches);
  EXPECT_EQ(r[1].actual_hint, "oři");
  EXPECT_TRUE(r[2].ending_matches);
}

TEST(ConsistencyTest, BasicHasNoVerseAnnotations) {
  const ParsedStrophe p =
      Parse(Encode(SampleStrophe(), DataFormat::kBasic), DataFormat::kBasic);
  EXPECT_TRUE(CheckConsistency(p).empty());
}

TEST(FormatNameTest, ParseAndPrint) {
  for (DataFormat f : kAll) {
    std::string lower = ToString(f);
    for (char& c : lower) c = static_cast<char>(std::tolower(c));
    EXPECT_EQ(ParseDataFormat(lower), f);
  }
  EXPECT_THROW(ParseDataFormat("meter"), InvariantError);
}

}  // namespace
}  // namespace verseforge::formats
