#ifndef VERSEFORGE_GENERATION_H_
#define VERSEFORGE_GENERATION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "verseforge/corpus.h"
#include "verseforge/formats.h"
#include "verseforge/language_model.h"
#include "verseforge/tokenizers.h"

namespace verseforge::generation {

enum class Decoding { kBasic, kForced };

std::string ToString(Decoding decoding);
// Case-insensitive "basic" or "forced".
Decoding ParseDecoding(std::string_view s);

struct GenerationRequest {
  RhymeScheme scheme = RhymeScheme::Parse("XXXX");
  YearBucket year;
  formats::DataFormat format = formats::DataFormat::kMeterVerse;
  // Header meter for BASIC and VERSE_PAR; falls back to the modal entry of
  // `verse_meters`.
  std::optional<MeterLabel> strophe_meter;
  // Empty, or one meter per verse. Under METER_VERSE each verse that is not
  // forced starts with its meter field already written ("J # ").
  std::vector<MeterLabel> verse_meters;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  // Budget of sampled tokens; forced prefixes do not count.
  std::size_t max_tokens = 2048;
};

// Checks the request's invariants; throws InvariantError.
void Validate(const GenerationRequest& request);

// Header line of the prompt.
std::string HeaderText(const GenerationRequest& request);

struct GeneratedStrophe {
  // Header line followed by everything decoded after it.
  std::string raw_text;
  // Everything after the header line.
  std::string generated_text;
  std::optional<formats::ParsedStrophe> parsed;
  std::string error;  // parse failure or exhausted retries; empty on success
  bool truncated = false;
  bool machine_generated = true;
  // Per started verse: whether its annotation prefix was copied from a
  // rhyme partner.
  std::vector<bool> forced;
  std::size_t retries = 0;
  std::size_t sampled_tokens = 0;

  bool ok() const { return parsed.has_value() && error.empty(); }
};

// Samples token by token after the prompt `eos header '\n'` until
// end-of-sequence, the token budget, or as many lines as the scheme has
// verses.
GeneratedStrophe GenerateBasic(const lm::LanguageModel& model,
                               const tokenizers::Tokenizer& tokenizer,
                               const GenerationRequest& request);

// Verse-by-verse decoding. Before a verse whose scheme letter already has a
// generated partner, the partner's annotation prefix is written verbatim and
// sampling resumes after it. A first-of-letter verse whose annotation does
// not parse is resampled with a fresh seed up to kMaxRetries times.
// Requires VERSE_PAR or METER_VERSE.
inline constexpr int kMaxRetries = 8;
GeneratedStrophe GenerateForced(const lm::LanguageModel& model,
                                const tokenizers::Tokenizer& tokenizer,
                                const GenerationRequest& request);

GeneratedStrophe Generate(const lm::LanguageModel& model,
                          const tokenizers::Tokenizer& tokenizer,
                          const GenerationRequest& request, Decoding decoding);

}  // namespace verseforge::generation

#endif  // VERSEFORGE_GENERATION_H_
