#ifndef VERSEFORGE_TOKENIZERS_H_
#define VERSEFORGE_TOKENIZERS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "verseforge/phonology.h"

namespace verseforge::tokenizers {

using TokenId = std::int32_t;

enum class TokenizerKind { kBase, kOur, kSyllable, kUnicode };

std::string ToString(TokenizerKind kind);
// Case-insensitive "base", "our", "syllable" or "unicode".
TokenizerKind ParseTokenizerKind(std::string_view s);

// Dense token table. Ids 0..2 are always the end-of-sequence, unknown and
// line-separator specials. Protected tokens are never split by the
// tokenizers that honor them (OUR, BASE, SYLLABLE).
class Vocab {
 public:
  static constexpr std::string_view kEos = "<eos>";
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr std::string_view kNewline = "\n";

  explicit Vocab(TokenizerKind kind);

  // Returns the existing id when the token is already present.
  TokenId Add(std::string_view token);
  TokenId AddProtected(std::string_view token);

  std::optional<TokenId> Find(std::string_view token) const;
  const std::string& Token(TokenId id) const { return tokens_.at(id); }
  bool IsProtected(TokenId id) const { return protected_.count(id) > 0; }
  bool IsSpecial(TokenId id) const { return id >= 0 && id < 3; }
  std::size_t size() const { return tokens_.size(); }
  TokenizerKind kind() const { return kind_; }
  // BASE vocab files share the OUR layout; loading one under another label
  // is a matter of relabeling.
  void set_kind(TokenizerKind kind) { kind_ = kind; }

  TokenId eos() const { return 0; }
  TokenId unk() const { return 1; }
  TokenId newline() const { return 2; }

  // FNV-1a over the kind and the token table; model files pin it.
  std::uint64_t Hash() const;

  // Text layout: '@'-prefixed header lines, "@end", then one
  // `escaped-token<TAB>id` line per token. Escapes: \\ \t \n.
  void Save(std::ostream& out, std::string_view config_json = {}) const;
  void Save(const std::filesystem::path& path,
            std::string_view config_json = {}) const;
  static Vocab Load(std::istream& in);
  static Vocab Load(const std::filesystem::path& path);

 private:
  TokenizerKind kind_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::unordered_set<TokenId> protected_;
};

// Splits text into pre-tokenization pieces: a newline, a lone space, or an
// optional single leading space followed by a letter run, a digit run or
// one other character. Concatenating the pieces gives back the text.
std::vector<std::string> PreTokenize(std::string_view text);

// Strings that annotation-interleaved formats use as functional tokens:
// separators, scheme strings, meter letters, year buckets and syllable
// counts, each with and without a leading space.
std::vector<std::string> AnnotationTokens(std::span<const std::string> schemes,
                                          std::span<const std::string> years);

// Byte-pair-encoding training over pre-tokenized pieces. Merges the most
// frequent adjacent pair (ties: lexicographically smaller pair) until
// `vocab_size` entries exist or no pair is left. `specials` become protected
// tokens and are excluded from pair statistics. Throws InvariantError on an
// empty corpus.
Vocab TrainBpe(std::span<const std::string> lines, std::size_t vocab_size,
               std::span<const std::string> specials,
               TokenizerKind kind = TokenizerKind::kOur);

// Every syllable token of the corpus plus a single-character fallback
// alphabet.
Vocab BuildSyllableVocab(std::span<const std::string> lines,
                         std::span<const std::string> specials,
                         const phonology::Phonology& phonology =
                             phonology::DefaultPhonology());

// One token per distinct code point of the corpus.
Vocab BuildUnicodeVocab(std::span<const std::string> lines);

struct Encoding {
  std::vector<TokenId> ids;
  // Number of characters replaced by the unknown token.
  std::size_t unknown = 0;
};

// The four tokenization schemes behind one interface; the scheme is the
// vocab's kind.
class Tokenizer {
 public:
  explicit Tokenizer(Vocab vocab, const phonology::Phonology& phonology =
                                      phonology::DefaultPhonology());

  Encoding Encode(std::string_view text) const;
  // Specials other than the line separator decode to nothing; unknown
  // tokens decode to U+FFFD.
  std::string Decode(std::span<const TokenId> ids) const;
  // Token strings of an encoding, for display.
  std::vector<std::string> Segment(std::string_view text) const;

  const Vocab& vocab() const { return vocab_; }
  TokenizerKind kind() const { return vocab_.kind(); }

 private:
  void EncodeBpePiece(std::string_view piece, Encoding& out) const;
  void EncodeSyllablePiece(std::string_view piece, Encoding& out) const;
  void EncodeChars(std::string_view text, Encoding& out) const;

  Vocab vocab_;
  const phonology::Phonology* phonology_;
};

// Characters (code points) per token over a sample of lines.
double CharsPerToken(const Tokenizer& tokenizer,
                     std::span<const std::string> sample);

}  // namespace verseforge::tokenizers

#endif  // VERSEFORGE_TOKENIZERS_H_
