#ifndef VERSEFORGE_VALIDATION_H_
#define VERSEFORGE_VALIDATION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "verseforge/corpus.h"
#include "verseforge/formats.h"
#include "verseforge/generation.h"
#include "verseforge/phonology.h"

namespace verseforge::validation {

inline constexpr double kDefaultMeterThreshold = 0.6;

// Agreement of a stress pattern with the best realization of each meter
// template, indexed like kMeterPriority (the N slot is always 0). A stressed
// template position scores 2 when the syllable is stressed; an unstressed
// one scores 1 when the syllable is unstressed. The score is the sum over
// the maximum attainable, so missing stress costs twice as much as extra
// stress.
//
// Templates: J x(Xx)+, T (Xx)+, D (Xxx)+, A x(Xxx)+, X ((Xxx)|(Xx))+,
// Y (x|xx)((Xxx)|(Xx))+, all of which may stop inside the last foot; H five feet of
// Xxx or Xx with the fifth a dactyl, then Xx or X; P two feet of Xxx or Xx,
// X, Xxx, Xxx, X.
std::array<double, kMeterPriority.size()> MeterScores(
    const phonology::StressPattern& pattern);

// Best template for a single verse; N when nothing reaches `threshold`.
// Labels scoring within 0.05 of the best are tied and the more frequent
// meter (earlier in kMeterPriority) wins.
MeterLabel ClassifyMeter(const phonology::StressPattern& pattern,
                         double threshold = kDefaultMeterThreshold);

// Labels every verse of a strophe. Scores are averaged over the verses that
// share a rhyme letter (X verses stand alone), leaving out verses whose own
// best score is below `threshold`, and the group's best label is taken, with
// ties as in ClassifyMeter. A verse scoring below
// `threshold` on the group label keeps its own best label if that clears
// the threshold, and gets N otherwise.
std::vector<MeterLabel> ClassifyStrophe(
    std::span<const phonology::StressPattern> patterns, const RhymeScheme& scheme,
    double threshold = kDefaultMeterThreshold);

// Case fold, vowel length fold (á é í ó ú ů ý) and y -> i.
std::string NormalizeClausula(std::string_view clausula);

// Whether the normalized clausulae of two verses are equal. Verses without
// syllables never rhyme.
bool Rhymes(std::string_view verse_a, std::string_view verse_b,
            const phonology::Phonology& phonology = phonology::DefaultPhonology());

// Rhyme classes via the transitive closure of Rhymes; singletons become X.
RhymeScheme PredictScheme(std::span<const std::string> verses,
                          const phonology::Phonology& phonology =
                              phonology::DefaultPhonology());

// One evaluated generation. `parsed` is empty when the text did not parse.
struct EvalUnit {
  generation::GenerationRequest request;
  std::optional<formats::ParsedStrophe> parsed;
  // Optional per-verse forcing flags; enables the forced/first-of-letter
  // ending-hint split.
  std::vector<bool> forced;
};

struct MetricsReport {
  std::size_t strophes = 0;
  std::size_t parse_failures = 0;
  std::size_t annotated_verses = 0;
  std::size_t syllable_hits = 0;
  std::size_t ending_hits = 0;
  std::size_t unique_strophes = 0;
  double unique_sum = 0.0;
  std::size_t rhyme_hits = 0;
  std::size_t meter_hits = 0;
  std::size_t meter_verses = 0;
  std::size_t meter_verse_hits = 0;
  // Ending-hint agreement split by how the annotation was produced.
  std::size_t forced_verses = 0;
  std::size_t forced_ending_hits = 0;
  std::size_t first_of_letter_verses = 0;
  std::size_t first_of_letter_ending_hits = 0;

  // Ratios; NaN when the denominator is zero.
  double num_syl() const;
  double end_acc() const;
  double unique() const;
  double rhyme_acc() const;  // over all strophes, parse failures included
  double meter_acc() const;  // all verses of a strophe must match
  double verse_meter_acc() const;
  double forced_end_acc() const;
  double first_of_letter_end_acc() const;

  // "key: value" lines.
  std::string ToText() const;
};

struct EvalOptions {
  double meter_threshold = kDefaultMeterThreshold;
};

// The expected meter of each verse: the requested per-verse meters, else
// the verse annotations, else the header meter.
std::vector<std::optional<MeterLabel>> ExpectedMeters(const EvalUnit& unit);

MetricsReport Evaluate(std::span<const EvalUnit> units,
                       const phonology::Phonology& phonology =
                           phonology::DefaultPhonology(),
                       EvalOptions options = {});

// Unique syllables over all syllables of the verses (case-folded); NaN for
// an empty strophe.
double UniqueSyllableRatio(std::span<const std::string> verses,
                           const phonology::Phonology& phonology =
                               phonology::DefaultPhonology());

// Paired two-sided sign-flip test on |mean(a - b)|. Only units with a != b
// can change the statistic; with m of them there are 2^(m-1) distinct
// |statistic| values up to a global flip. If that many fit in
// `repetitions`, they are enumerated and the exact p-value is returned.
// Otherwise the observed labeling plus repetitions - 1 distinct random
// flips (drawn without replacement) are scored and p = hits / repetitions.
double PermutationTest(std::span<const double> a, std::span<const double> b,
                       std::size_t repetitions = 100, std::uint64_t seed = 0);

}  // namespace verseforge::validation

#endif  // VERSEFORGE_VALIDATION_H_
