#ifndef VERSEFORGE_FORMATS_H_
#define VERSEFORGE_FORMATS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "verseforge/corpus.h"
#include "verseforge/phonology.h"

// Annotation-interleaved strophe text. All three layouts start with a
// header line and put one verse per line; fields are separated by " # ".
//
//   BASIC        # ABAB # 1900 # J
//                Tvá loď jde po vysokém moři,
//   VERSE_PAR    # ABAB # 1900 # J
//                9 # oři # Tvá loď jde po vysokém moři,
//   METER_VERSE  # ABAB # 1900
//                J # 9 # oři # Tvá loď jde po vysokém moři,
namespace verseforge::formats {

enum class DataFormat { kBasic, kVersePar, kMeterVerse };

std::string ToString(DataFormat format);
// Case-insensitive "basic", "verse_par" or "meter_verse".
DataFormat ParseDataFormat(std::string_view s);

// Annotation fields in front of each verse (0, 2 or 3).
std::size_t VerseFieldCount(DataFormat format);

struct LineAnnotation {
  std::optional<MeterLabel> meter;  // METER_VERSE only
  std::size_t syllables = 0;
  std::string ending_hint;

  friend bool operator==(const LineAnnotation&, const LineAnnotation&) = default;
};

struct StropheHeader {
  RhymeScheme scheme = RhymeScheme::Parse("XXXX");
  YearBucket year;
  std::optional<MeterLabel> strophe_meter;  // BASIC and VERSE_PAR only

  friend bool operator==(const StropheHeader&, const StropheHeader&) = default;
};

struct ParsedLine {
  std::optional<LineAnnotation> annotation;
  // The annotation prefix exactly as written, including the separator in
  // front of the verse text ("J # 9 # oři # "). Empty for BASIC.
  std::string prefix;
  std::string text;
};

struct ParsedStrophe {
  StropheHeader header;
  std::vector<ParsedLine> lines;
};

// Most frequent gold meter; ties go to the earlier label in kMeterPriority.
MeterLabel ModalMeter(std::span<const Verse> verses);

std::string HeaderLine(const StropheHeader& header, DataFormat format);
std::string AnnotationPrefix(const LineAnnotation& annotation, DataFormat format);
LineAnnotation Annotate(const Verse& verse, DataFormat format,
                        const phonology::Phonology& phonology =
                            phonology::DefaultPhonology());
StropheHeader MakeHeader(const Strophe& strophe, DataFormat format);

// Header line and verse lines, each terminated by '\n'.
std::string Encode(const Strophe& strophe, DataFormat format,
                   const phonology::Phonology& phonology =
                       phonology::DefaultPhonology());

// `line_no` only labels errors.
StropheHeader ParseHeader(std::string_view line, DataFormat format,
                          std::size_t line_no = 1);
// Splits on the first VerseFieldCount(format) separators only, so '#' in the
// verse text survives.
ParsedLine ParseVerseLine(std::string_view line, DataFormat format,
                          std::size_t line_no = 1);

// Blank lines are skipped and trailing whitespace is ignored. Throws
// ParseError with the offending line number.
ParsedStrophe Parse(std::string_view text, DataFormat format);

struct VerseConsistency {
  std::size_t annotated_syllables = 0;
  std::size_t actual_syllables = 0;
  std::string annotated_hint;
  std::string actual_hint;
  bool syllables_match = false;
  bool ending_matches = false;
};

// Compares each verse's annotation with what the phonology computes from its
// text. Empty for BASIC, which carries no verse annotations.
std::vector<VerseConsistency> CheckConsistency(
    const ParsedStrophe& strophe,
    const phonology::Phonology& phonology = phonology::DefaultPhonology());

}  // namespace verseforge::formats

#endif  // VERSEFORGE_FORMATS_H_
