#include "verseforge/generation.h"

#include <map>

#include "verseforge/error.h"
#include "verseforge/rng.h"

namespace verseforge::generation {

namespace {

using formats::DataFormat;
using tokenizers::TokenId;

// Seed for the k-th retry of verse `verse`.
std::uint64_t RetrySeed(std::uint64_t seed, std::size_t verse, int attempt) {
  std::uint64_t z = seed ^ (static_cast<std::uint64_t>(verse) << 32) ^
                    static_cast<std::uint64_t>(attempt);
  z += 0x9E3779B97F4A7C15ULL;  // splitmix64 finalizer
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Decoder {
 public:
  Decoder(const lm::LanguageModel& model, const tokenizers::Tokenizer& tokenizer,
          const GenerationRequest& request, bool forced)
      : model_(model),
        tokenizer_(tokenizer),
        request_(request),
        forced_(forced),
        rng_(request.seed) {}

  GeneratedStrophe Run() {
    const std::string header = HeaderText(request_) + "\n";
    context_.push_back(tokenizer_.vocab().eos());
    Append(tokenizer_.Encode(header).ids);

    const std::size_t n = request_.scheme.size();
    for (std::size_t verse = 0; verse < n && !stopped_; ++verse) {
      const char letter = request_.scheme[verse];
      const auto partner = partner_prefix_.find(letter);
      const bool force = forced_ && letter != 'X' && partner != partner_prefix_.end();
      const bool first_of_letter = forced_ && letter != 'X' && !force;
      out_.forced.push_back(force);

      std::string prefix;
      if (force) {
        prefix = partner->second;
      } else if (request_.format == DataFormat::kMeterVerse &&
                 !request_.verse_meters.empty()) {
        prefix = std::string(1, ToChar(request_.verse_meters[verse])) + " # ";
      }

      const std::size_t mark_context = context_.size();
      const std::size_t mark_text = text_.size();
      const std::size_t mark_sampled = out_.sampled_tokens;
      for (int attempt = 0;; ++attempt) {
        const bool complete = DecodeVerse(prefix);
        if (!first_of_letter || !complete) break;
        const std::string line = text_.substr(mark_text, text_.size() - mark_text - 1);
        try {
          partner_prefix_[letter] =
              formats::ParseVerseLine(line, request_.format, verse + 2).prefix;
          break;
        } catch (const ParseError&) {
          if (attempt == kMaxRetries) {
            out_.error = "verse " + std::to_string(verse + 1) +
                         ": no well-formed annotation after " +
                         std::to_string(kMaxRetries) + " retries";
            stopped_ = true;
            break;
          }
        }
        ++out_.retries;
        context_.resize(mark_context);
        text_.resize(mark_text);
        out_.sampled_tokens = mark_sampled;
        stopped_ = false;
        rng_ = Rng(RetrySeed(request_.seed, verse, attempt + 1));
      }
    }

    out_.generated_text = text_;
    out_.raw_text = header + text_;
    if (out_.error.empty()) {
      try {
        out_.parsed = formats::Parse(out_.raw_text, request_.format);
      } catch (const ParseError& e) {
        out_.error = e.what();
      }
    }
    return std::move(out_);
  }

 private:
  void Append(const std::vector<TokenId>& ids) {
    context_.insert(context_.end(), ids.begin(), ids.end());
  }

  // Writes `prefix`, then samples until a line break. Returns whether the
  // verse ended with a line break.
  bool DecodeVerse(const std::string& prefix) {
    if (out_.sampled_tokens >= request_.max_tokens) {
      out_.truncated = true;
      stopped_ = true;
      return false;
    }
    if (!prefix.empty()) {
      Append(tokenizer_.Encode(prefix).ids);
      text_ += prefix;
    }
    while (true) {
      if (out_.sampled_tokens >= request_.max_tokens) {
        out_.truncated = true;
        stopped_ = true;
        return false;
      }
      const TokenId id =
          lm::Sample(model_, context_, request_.temperature, rng_);
      ++out_.sampled_tokens;
      if (id == tokenizer_.vocab().eos()) {
        stopped_ = true;
        return false;
      }
      context_.push_back(id);
      const TokenId one[] = {id};
      const std::string piece = tokenizer_.Decode(one);
      text_ += piece;
      if (piece.find('\n') != std::string::npos) return true;
    }
  }

  const lm::LanguageModel& model_;
  const tokenizers::Tokenizer& tokenizer_;
  const GenerationRequest& request_;
  const bool forced_;
  Rng rng_;
  std::vector<TokenId> context_;
  std::string text_;
  std::map<char, std::string> partner_prefix_;
  bool stopped_ = false;
  GeneratedStrophe out_;
};

}  // namespace

std::string ToString(Decoding decoding) {
  return decoding == Decoding::kBasic ? "basic" : "forced";
}

Decoding ParseDecoding(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(c));
  if (lower == "basic") return Decoding::kBasic;
  if (lower == "forced") return Decoding::kForced;
  throw InvariantError("decoding", "unknown decoding '" + std::string(s) + "'");
}

void Validate(const GenerationRequest& request) {
  if (!request.verse_meters.empty() &&
      request.verse_meters.size() != request.scheme.size()) {
    throw InvariantError("meters", "expected " +
                                       std::to_string(request.scheme.size()) +
                                       " verse meters, got " +
                                       std::to_string(request.verse_meters.size()));
  }
  if (!(request.temperature > 0.0)) {
    throw InvariantError("temperature", "must be positive");
  }
  if (request.format != DataFormat::kMeterVerse && !request.strophe_meter &&
      request.verse_meters.empty()) {
    throw InvariantError("meter", "the " + formats::ToString(request.format) +
                                      " header needs a strophe meter");
  }
}

std::string HeaderText(const GenerationRequest& request) {
  formats::StropheHeader header;
  header.scheme = request.scheme;
  header.year = request.year;
  if (request.format != DataFormat::kMeterVerse) {
    if (request.strophe_meter) {
      header.strophe_meter = request.strophe_meter;
    } else {
      std::vector<Verse> verses;
      for (MeterLabel m : request.verse_meters) verses.push_back({"", std::nullopt, m});
      header.strophe_meter = formats::ModalMeter(verses);
    }
  }
  return formats::HeaderLine(header, request.format);
}

GeneratedStrophe GenerateBasic(const lm::LanguageModel& model,
                               const tokenizers::Tokenizer& tokenizer,
                               const GenerationRequest& request) {
  Validate(request);
  return Decoder(model, tokenizer, request, false).Run();
}

GeneratedStrophe GenerateForced(const lm::LanguageModel& model,
                                const tokenizers::Tokenizer& tokenizer,
                                const GenerationRequest& request) {
  Validate(request);
  if (request.format == DataFormat::kBasic) {
    throw InvariantError("format", "forced generation needs verse annotations");
  }
  return Decoder(model, tokenizer, request, true).Run();
}

GeneratedStrophe Generate(const lm::LanguageModel& model,
                          const tokenizers::Tokenizer& tokenizer,
                          const GenerationRequest& request, Decoding decoding) {
  return decoding == Decoding::kBasic ? GenerateBasic(model, tokenizer, request)
                                      : GenerateForced(model, tokenizer, request);
}

}  // namespace verseforge::generation
