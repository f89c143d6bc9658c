#include "verseforge/formats.h"

#include <array>

#include "verseforge/error.h"
#include "verseforge/utf8.h"

namespace verseforge::formats {

namespace {

constexpr std::string_view kSep = " # ";

std::string RightTrim(std::string_view s) {
  const auto last = s.find_last_not_of(" \t\r\n");
  return last == std::string_view::npos ? std::string()
                                        : std::string(s.substr(0, last + 1));
}

// Splits `s` on '#' into trimmed fields.
std::vector<std::string> Fields(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto hash = s.find('#', start);
    out.push_back(utf8::Trim(s.substr(start, hash - start)));
    if (hash == std::string_view::npos) break;
    start = hash + 1;
  }
  return out;
}

std::size_t ParseCount(const std::string& field, std::size_t line_no) {
  if (field.empty() || field.size() > 4 ||
      field.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError(line_no, "syllable count '" + field + "' is not an integer");
  }
  const std::size_t n = std::stoul(field);
  if (n == 0) throw ParseError(line_no, "syllable count must be positive");
  return n;
}

MeterLabel ParseMeterField(const std::string& field, std::size_t line_no) {
  try {
    return ParseMeter(field);
  } catch (const InvariantError&) {
    throw ParseError(line_no, "unknown meter letter '" + field + "'");
  }
}

}  // namespace

std::string ToString(DataFormat format) {
  switch (format) {
    case DataFormat::kBasic: return "BASIC";
    case DataFormat::kVersePar: return "VERSE_PAR";
    case DataFormat::kMeterVerse: return "METER_VERSE";
  }
  return "?";
}

DataFormat ParseDataFormat(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(c));
  if (lower == "basic") return DataFormat::kBasic;
  if (lower == "verse_par") return DataFormat::kVersePar;
  if (lower == "meter_verse") return DataFormat::kMeterVerse;
  throw InvariantError("format", "unknown data format '" + std::string(s) + "'");
}

std::size_t VerseFieldCount(DataFormat format) {
  switch (format) {
    case DataFormat::kBasic: return 0;
    case DataFormat::kVersePar: return 2;
    case DataFormat::kMeterVerse: return 3;
  }
  return 0;
}

MeterLabel ModalMeter(std::span<const Verse> verses) {
  std::array<std::size_t, kMeterPriority.size()> counts{};
  for (const Verse& v : verses) ++counts[PriorityIndex(v.gold_meter)];
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return kMeterPriority[best];
}

std::string HeaderLine(const StropheHeader& header, DataFormat format) {
  std::string line = "# " + header.scheme.letters() + std::string(kSep) +
                     header.year.ToString();
  if (format != DataFormat::kMeterVerse) {
    line += kSep;
    line += ToChar(header.strophe_meter.value_or(MeterLabel::kNotRecognized));
  }
  return line;
}

std::string AnnotationPrefix(const LineAnnotation& annotation,
                             DataFormat format) {
  if (format == DataFormat::kBasic) return {};
  std::string prefix;
  if (format == DataFormat::kMeterVerse) {
    prefix += ToChar(annotation.meter.value_or(MeterLabel::kNotRecognized));
    prefix += kSep;
  }
  prefix += std::to_string(annotation.syllables);
  prefix += kSep;
  prefix += annotation.ending_hint;
  prefix += kSep;
  return prefix;
}

LineAnnotation Annotate(const Verse& verse, DataFormat format,
                        const phonology::Phonology& phonology) {
  LineAnnotation a;
  if (format == DataFormat::kMeterVerse) a.meter = verse.gold_meter;
  a.syllables = phonology.CountSyllables(verse.text);
  a.ending_hint = phonology.EndingHint(verse.text);
  return a;
}

StropheHeader MakeHeader(const Strophe& strophe, DataFormat format) {
  StropheHeader h;
  h.scheme = strophe.scheme;
  h.year = strophe.year_bucket;
  if (format != DataFormat::kMeterVerse) h.strophe_meter = ModalMeter(strophe.verses);
  return h;
}

std::string Encode(const Strophe& strophe, DataFormat format,
                   const phonology::Phonology& phonology) {
  std::string out = HeaderLine(MakeHeader(strophe, format), format);
  out += '\n';
  for (const Verse& v : strophe.verses) {
    if (format != DataFormat::kBasic) {
      out += AnnotationPrefix(Annotate(v, format, phonology), format);
    }
    out += v.text;
    out += '\n';
  }
  return out;
}

StropheHeader ParseHeader(std::string_view line, DataFormat format,
                          std::size_t line_no) {
  const std::string trimmed = RightTrim(line);
  if (trimmed.empty() || trimmed[0] != '#') {
    throw ParseError(line_no, "header must start with '#'");
  }
  std::vector<std::string> fields = Fields(std::string_view(trimmed).substr(1));
  if (fields.size() > 1 && fields.back().empty()) fields.pop_back();
  const std::size_t expected = format == DataFormat::kMeterVerse ? 2 : 3;
  if (fields.size() != expected) {
    throw ParseError(line_no, "header has " + std::to_string(fields.size()) +
                                  " fields, expected " +
                                  std::to_string(expected));
  }
  StropheHeader h;
  try {
    h.scheme = RhymeScheme::Parse(fields[0]);
    h.year = YearBucket::Parse(fields[1]);
  } catch (const InvariantError& e) {
    throw ParseError(line_no, std::string("malformed header: ") + e.what());
  }
  if (expected == 3) h.strophe_meter = ParseMeterField(fields[2], line_no);
  return h;
}

ParsedLine ParseVerseLine(std::string_view line, DataFormat format,
                          std::size_t line_no) {
  const std::string trimmed = RightTrim(line);
  ParsedLine parsed;
  const std::size_t n = VerseFieldCount(format);
  std::size_t pos = 0;
  std::vector<std::string> fields;
  for (std::size_t k = 0; k < n; ++k) {
    const auto hash = trimmed.find('#', pos);
    if (hash == std::string::npos) {
      throw ParseError(line_no, "verse line has " + std::to_string(k) +
                                    " annotation fields, expected " +
                                    std::to_string(n));
    }
    fields.push_back(utf8::Trim(std::string_view(trimmed).substr(pos, hash - pos)));
    pos = hash + 1;
  }
  if (n > 0) {
    if (pos < trimmed.size() && trimmed[pos] == ' ') ++pos;
    parsed.prefix = trimmed.substr(0, pos);
    LineAnnotation a;
    std::size_t f = 0;
    if (format == DataFormat::kMeterVerse) a.meter = ParseMeterField(fields[f++], line_no);
    a.syllables = ParseCount(fields[f++], line_no);
    a.ending_hint = fields[f++];
    if (a.ending_hint.empty()) throw ParseError(line_no, "empty ending hint");
    parsed.annotation = std::move(a);
  }
  parsed.text = utf8::Trim(std::string_view(trimmed).substr(pos));
  if (parsed.text.empty()) throw ParseError(line_no, "empty verse text");
  return parsed;
}

ParsedStrophe Parse(std::string_view text, DataFormat format) {
  ParsedStrophe out;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t last_content = 1;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (utf8::Trim(line).empty()) continue;
    last_content = line_no;
    if (!have_header) {
      out.header = ParseHeader(line, format, line_no);
      have_header = true;
    } else {
      out.lines.push_back(ParseVerseLine(line, format, line_no));
    }
  }
  if (!have_header) throw ParseError(last_content, "missing header line");
  if (out.lines.size() != out.header.scheme.size()) {
    throw ParseError(last_content, "expected " +
                                  std::to_string(out.header.scheme.size()) +
                                  " verse lines, found " +
                                  std::to_string(out.lines.size()));
  }
  return out;
}

std::vector<VerseConsistency> CheckConsistency(
    const ParsedStrophe& strophe, const phonology::Phonology& phonology) {
  std::vector<VerseConsistency> out;
  for (const ParsedLine& line : strophe.lines) {
    if (!line.annotation) continue;
    VerseConsistency c;
    c.annotated_syllables = line.annotation->syllables;
    c.annotated_hint = line.annotation->ending_hint;
    c.actual_syllables = phonology.CountSyllables(line.text);
    if (c.actual_syllables > 0) c.actual_hint = phonology.EndingHint(line.text);
    c.syllables_match = c.actual_syllables == c.annotated_syllables;
    c.ending_matches = c.actual_syllables > 0 && c.actual_hint == c.annotated_hint;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace verseforge::formats
