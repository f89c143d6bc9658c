#ifndef VERSEFORGE_LANGUAGE_MODEL_H_
#define VERSEFORGE_LANGUAGE_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "verseforge/rng.h"
#include "verseforge/tokenizers.h"

namespace verseforge::lm {

using tokenizers::TokenId;

// Next-token provider. Decoders only see this interface, so any external
// model can be plugged in.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual std::size_t vocab_size() const = 0;
  // Non-negative, sums to 1. Ids in `context` must be below vocab_size().
  virtual std::vector<double> NextDist(std::span<const TokenId> context) const = 0;
};

struct NGramOptions {
  int order = 3;
  double discount = 0.75;  // in [0, 1)
};

// 8 for UNICODE, 4 for SYLLABLE, 3 for the BPE kinds.
int DefaultOrder(tokenizers::TokenizerKind kind);

// Interpolated absolute discounting:
//   p(w | h) = max(c(h w) - D, 0) / c(h) + D * N1+(h) / c(h) * p(w | h')
// where h' drops the oldest token of h, the empty context interpolates with
// the uniform distribution, and contexts never seen in training defer to h'.
class NGramModel : public LanguageModel {
 public:
  // Each sequence is trained as `eos s... eos`: the leading eos is context
  // only, so generation prompts should start with eos as well.
  static NGramModel Train(std::span<const std::vector<TokenId>> sequences,
                          std::size_t vocab_size, TokenId eos,
                          std::uint64_t vocab_hash, NGramOptions options = {});

  std::size_t vocab_size() const override { return vocab_size_; }
  std::vector<double> NextDist(std::span<const TokenId> context) const override;

  // Unsmoothed c(h w) / c(h) for the exact context h (0 when h is unseen).
  double MaxLikelihood(std::span<const TokenId> context, TokenId token) const;
  // Raw count c(h w).
  std::uint64_t Count(std::span<const TokenId> context, TokenId token) const;

  int order() const { return order_; }
  double discount() const { return discount_; }
  TokenId eos() const { return eos_; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  std::size_t context_count() const { return nodes_.size(); }

  // Line-delimited count dump:
  //   @verseforge-ngram  1
  //   @order / @discount / @vocab-size / @vocab-hash / @eos  <value>
  //   @config  <one-line json>            (optional)
  //   @contexts  <n>
  //   <ctx ids, space separated, "-" if empty> TAB <id>:<count> ...
  //   @end
  // Fields are TAB separated; contexts are written in sorted order.
  void Save(std::ostream& out, std::string_view config_json = {}) const;
  void Save(const std::filesystem::path& path,
            std::string_view config_json = {}) const;
  static NGramModel Load(std::istream& in);
  static NGramModel Load(const std::filesystem::path& path);
  // As Load, but throws SchemaMismatch unless the model was trained against
  // `vocab`.
  static NGramModel Load(const std::filesystem::path& path,
                         const tokenizers::Vocab& vocab);

 private:
  struct Node {
    std::uint64_t total = 0;
    std::vector<std::pair<TokenId, std::uint32_t>> next;  // sorted by id
  };

  const Node* Find(std::span<const TokenId> context) const;
  void Add(std::span<const TokenId> context, TokenId token, std::uint32_t n);

  int order_ = 1;
  double discount_ = 0.75;
  std::size_t vocab_size_ = 0;
  TokenId eos_ = 0;
  std::uint64_t vocab_hash_ = 0;
  std::unordered_map<std::string, Node> nodes_;  // key: varint-packed ids
};

// Draws from NextDist(context) with probabilities raised to 1/temperature and
// renormalized. Very small temperatures concentrate all mass on the argmax.
TokenId Sample(const LanguageModel& model, std::span<const TokenId> context,
               double temperature, Rng& rng);
TokenId Sample(const LanguageModel& model, std::span<const TokenId> context,
               double temperature, std::uint64_t seed);

// exp of the mean negative log-probability of every predicted token, using
// the same eos wrapping as training.
double Perplexity(const LanguageModel& model,
                  std::span<const std::vector<TokenId>> sequences, TokenId eos);

}  // namespace verseforge::lm

#endif  // VERSEFORGE_LANGUAGE_MODEL_H_
