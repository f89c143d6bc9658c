#include "verseforge/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_map>

#include "json.hpp"
#include "verseforge/error.h"
#include "verseforge/rng.h"
#include "verseforge/utf8.h"

namespace verseforge {

char ToChar(MeterLabel m) { return static_cast<char>(m); }

MeterLabel ParseMeter(std::string_view s) {
  if (s.size() == 1) {
    for (MeterLabel m : kMeterPriority) {
      if (ToChar(m) == s[0]) return m;
    }
  }
  throw InvariantError("meter", "unknown meter label '" + std::string(s) + "'");
}

std::size_t PriorityIndex(MeterLabel m) {
  for (std::size_t i = 0; i < kMeterPriority.size(); ++i) {
    if (kMeterPriority[i] == m) return i;
  }
  return kMeterPriority.size();
}

RhymeScheme RhymeScheme::Parse(std::string_view letters) {
  if (letters.size() != 4 && letters.size() != 6) {
    throw InvariantError("scheme", "unsupported scheme length " +
                                       std::to_string(letters.size()));
  }
  std::map<char, int> counts;
  char next = 'A';
  for (char c : letters) {
    if (c == 'X') continue;
    if (c < 'A' || c > 'W') {
      throw InvariantError("scheme", "invalid letter '" + std::string(1, c) +
                                         "' in " + std::string(letters));
    }
    if (counts[c]++ == 0) {
      if (c != next) {
        throw InvariantError("scheme",
                             "not canonically lettered: " + std::string(letters));
      }
      ++next;
    }
  }
  for (const auto& [c, n] : counts) {
    if (n < 2) {
      throw InvariantError("scheme", "letter '" + std::string(1, c) +
                                         "' has no rhyme partner in " +
                                         std::string(letters));
    }
  }
  return RhymeScheme(std::string(letters));
}

RhymeScheme DeriveRhymeScheme(
    std::span<const std::optional<std::int64_t>> groups) {
  if (groups.size() != 4 && groups.size() != 6) {
    throw InvariantError("scheme", "unsupported strophe length " +
                                       std::to_string(groups.size()));
  }
  std::map<std::int64_t, int> occurrences;
  for (const auto& g : groups) {
    if (g) ++occurrences[*g];
  }
  std::map<std::int64_t, char> letter_of;
  char next = 'A';
  std::string letters;
  for (const auto& g : groups) {
    if (!g || occurrences[*g] < 2) {
      letters.push_back('X');
      continue;
    }
    auto [it, inserted] = letter_of.try_emplace(*g, next);
    if (inserted) ++next;
    letters.push_back(it->second);
  }
  return RhymeScheme(std::move(letters));
}

std::string YearBucket::ToString() const {
  return start ? std::to_string(*start) : "NaN";
}

YearBucket YearBucket::Parse(std::string_view s) {
  if (s == "NaN") return {};
  int value = 0;
  if (s.empty() || s.size() > 6) {
    throw InvariantError("year", "bad year bucket '" + std::string(s) + "'");
  }
  for (char c : s) {
    if (c < '0' || c > '9') {
      throw InvariantError("year", "bad year bucket '" + std::string(s) + "'");
    }
    value = value * 10 + (c - '0');
  }
  if (value % 20 != 0) {
    throw InvariantError("year", "year bucket " + std::string(s) +
                                     " is not a multiple of 20");
  }
  return YearBucket{value};
}

YearBucket BucketizeYear(std::optional<int> year) {
  if (!year) return {};
  // Floor division, so negative years land in the bucket below.
  const int y = *year;
  const int q = (y >= 0) ? y / 20 : -((-y + 19) / 20);
  return YearBucket{q * 20};
}

namespace {

using nlohmann::json;

Strophe ParseStrophe(const json& verses_json, std::optional<int> year,
                     std::size_t poem_index, std::size_t line_no) {
  if (!verses_json.is_array()) {
    throw ParseError(line_no, "strophe is not a list of verses");
  }
  if (verses_json.size() != 4 && verses_json.size() != 6) {
    throw ParseError(line_no, "strophe has unsupported length " +
                                  std::to_string(verses_json.size()));
  }
  Strophe strophe;
  strophe.poem_index = poem_index;
  strophe.year_bucket = BucketizeYear(year);
  std::vector<std::optional<std::int64_t>> groups;
  for (const json& v : verses_json) {
    if (!v.is_object()) throw ParseError(line_no, "verse is not an object");
    Verse verse;
    const auto text = v.find("text");
    if (text == v.end() || !text->is_string()) {
      throw ParseError(line_no, "verse field 'text' missing or not a string");
    }
    verse.text = utf8::Trim(text->get<std::string>());
    if (verse.text.empty()) {
      throw ParseError(line_no, "verse field 'text' is empty");
    }
    const auto rhyme = v.find("rhyme");
    if (rhyme != v.end() && !rhyme->is_null()) {
      if (!rhyme->is_number_integer()) {
        throw ParseError(line_no, "verse field 'rhyme' is not an integer");
      }
      verse.rhyme_group = rhyme->get<std::int64_t>();
    }
    const auto meter = v.find("meter");
    if (meter == v.end() || !meter->is_string()) {
      throw ParseError(line_no, "verse field 'meter' missing or not a string");
    }
    try {
      verse.gold_meter = ParseMeter(meter->get<std::string>());
    } catch (const InvariantError& e) {
      throw ParseError(line_no, e.what());
    }
    groups.push_back(verse.rhyme_group);
    strophe.verses.push_back(std::move(verse));
  }
  strophe.scheme = DeriveRhymeScheme(groups);
  return strophe;
}

}  // namespace

std::vector<Strophe> IngestStream(std::istream& in) {
  std::vector<Strophe> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t poem_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::Trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(line_no, "record is not an object");
    std::optional<int> year;
    const auto y = record.find("year");
    if (y != record.end() && !y->is_null()) {
      if (!y->is_number_integer()) {
        throw ParseError(line_no, "field 'year' is not an integer or null");
      }
      year = y->get<int>();
    }
    const auto strophes = record.find("strophes");
    if (strophes == record.end() || !strophes->is_array()) {
      throw ParseError(line_no, "field 'strophes' missing or not a list");
    }
    for (const json& s : *strophes) {
      out.push_back(ParseStrophe(s, year, poem_index, line_no));
    }
    ++poem_index;
  }
  return out;
}

std::vector<Strophe> Ingest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return IngestStream(in);
}

std::pair<std::vector<Strophe>, std::vector<Strophe>> Split(
    std::span<const Strophe> strophes, double test_fraction,
    std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvariantError("test_fraction", "must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> order(strophes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.NextBelow(i)]);
  }
  // The epsilon keeps products like 0.29 * 100 from flooring to 28.
  const auto n_test = static_cast<std::size_t>(
      std::floor(static_cast<double>(strophes.size()) * test_fraction + 1e-9));
  std::vector<Strophe> train, test;
  test.reserve(n_test);
  train.reserve(strophes.size() - n_test);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_test ? test : train).push_back(strophes[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

CorpusStats ComputeStats(std::span<const Strophe> strophes) {
  CorpusStats stats;
  std::vector<std::size_t> poems;
  for (const Strophe& s : strophes) {
    ++stats.scheme_counts[s.scheme.letters()];
    ++stats.year_counts[s.year_bucket.ToString()];
    for (const Verse& v : s.verses) ++stats.meter_counts[ToChar(v.gold_meter)];
    stats.verses += s.verses.size();
    poems.push_back(s.poem_index);
  }
  std::sort(poems.begin(), poems.end());
  stats.poems = static_cast<std::size_t>(
      std::unique(poems.begin(), poems.end()) - poems.begin());
  stats.strophes = strophes.size();
  return stats;
}

std::vector<Strophe> FilterRareSchemes(std::span<const Strophe> strophes,
                                       std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const Strophe& s : strophes) ++counts[s.scheme.letters()];
  std::vector<Strophe> out;
  for (const Strophe& s : strophes) {
    if (counts[s.scheme.letters()] >= min_count) out.push_back(s);
  }
  return out;
}

}  // namespace verseforge
