#ifndef VERSEFORGE_CORPUS_H_
#define VERSEFORGE_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace verseforge {

// Per-verse meter. The underlying char is the one-letter label used in the
// corpus and in the annotated text formats.
enum class MeterLabel : char {
  kIamb = 'J',
  kTrochee = 'T',
  kDactyl = 'D',
  kAmphibrach = 'A',
  kDactylotrochee = 'X',
  kDactylotrocheeAnacrusis = 'Y',
  kHexameter = 'H',
  kPentameter = 'P',
  kNotRecognized = 'N',
};

// Dataset-frequency order; used to break ties wherever a single meter must be
// picked among equally good candidates.
inline constexpr std::array<MeterLabel, 9> kMeterPriority = {
    MeterLabel::kIamb,           MeterLabel::kTrochee,
    MeterLabel::kDactyl,         MeterLabel::kAmphibrach,
    MeterLabel::kDactylotrochee, MeterLabel::kDactylotrocheeAnacrusis,
    MeterLabel::kHexameter,      MeterLabel::kPentameter,
    MeterLabel::kNotRecognized,
};

char ToChar(MeterLabel m);
// Throws InvariantError("meter", ...) for anything but the nine labels.
MeterLabel ParseMeter(std::string_view s);
std::size_t PriorityIndex(MeterLabel m);

// Canonically lettered rhyme scheme of a 4- or 6-verse strophe. 'X' marks a
// non-rhyming verse; every other letter occurs at least twice and letters are
// introduced in alphabetical order of first occurrence.
class RhymeScheme {
 public:
  // Validates length, alphabet and canonical labeling.
  static RhymeScheme Parse(std::string_view letters);

  const std::string& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  char operator[](std::size_t i) const { return letters_[i]; }

  friend bool operator==(const RhymeScheme&, const RhymeScheme&) = default;
  friend auto operator<=>(const RhymeScheme&, const RhymeScheme&) = default;

 private:
  explicit RhymeScheme(std::string letters) : letters_(std::move(letters)) {}
  friend RhymeScheme DeriveRhymeScheme(
      std::span<const std::optional<std::int64_t>> groups);

  std::string letters_;
};

// Canonical relabeling of per-verse rhyme-group ids. Absent ids and ids seen
// only once inside the strophe become 'X'. Throws InvariantError naming the
// length for anything other than 4 or 6 verses.
RhymeScheme DeriveRhymeScheme(
    std::span<const std::optional<std::int64_t>> groups);

// Twenty-year publication period, labeled by its first year, or NaN when the
// year is unknown.
struct YearBucket {
  std::optional<int> start;

  std::string ToString() const;
  // Accepts "NaN" or a multiple of 20.
  static YearBucket Parse(std::string_view s);

  friend bool operator==(const YearBucket&, const YearBucket&) = default;
  friend auto operator<=>(const YearBucket&, const YearBucket&) = default;
};

// floor(year / 20) * 20; absent year maps to NaN.
YearBucket BucketizeYear(std::optional<int> year);

struct Verse {
  std::string text;
  std::optional<std::int64_t> rhyme_group;
  MeterLabel gold_meter = MeterLabel::kNotRecognized;
};

struct Strophe {
  std::vector<Verse> verses;
  RhymeScheme scheme = RhymeScheme::Parse("XXXX");
  YearBucket year_bucket;
  // Index of the source poem record (0-based) inside the corpus file.
  std::size_t poem_index = 0;
};

struct CorpusStats {
  std::map<std::string, std::size_t> scheme_counts;
  std::map<char, std::size_t> meter_counts;
  std::map<std::string, std::size_t> year_counts;
  std::size_t verses = 0;
  std::size_t strophes = 0;
  std::size_t poems = 0;
};

// Reads the line-delimited corpus (one JSON poem object per line):
//
//   {"year": 1901 | null,
//    "strophes": [[{"text": "...", "rhyme": 3 | null, "meter": "J"}, ...], ...]}
//
// Blank lines are skipped. Errors carry the 1-based line number of the
// offending record.
std::vector<Strophe> Ingest(const std::filesystem::path& path);
std::vector<Strophe> IngestStream(std::istream& in);

// Seeded shuffle, then the first floor(n * test_fraction) strophes form the
// test set. Relative order inside each part follows the shuffle.
std::pair<std::vector<Strophe>, std::vector<Strophe>> Split(
    std::span<const Strophe> strophes, double test_fraction,
    std::uint64_t seed);

CorpusStats ComputeStats(std::span<const Strophe> strophes);

// Drops strophes whose scheme occurs fewer than `min_count` times.
std::vector<Strophe> FilterRareSchemes(std::span<const Strophe> strophes,
                                       std::size_t min_count);

}  // namespace verseforge

#endif  // VERSEFORGE_CORPUS_H_
