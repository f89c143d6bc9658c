#include "verseforge/tokenizers.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "verseforge/error.h"
#include "verseforge/utf8.h"

namespace verseforge::tokenizers {

namespace {

std::string Escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Unescape(std::string_view s, std::size_t line_no) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw ParseError(line_no, "dangling escape");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      default: throw ParseError(line_no, "unknown escape");
    }
  }
  return out;
}

std::vector<std::string> SplitTabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

// Splits a syllable-tokenizer piece (optional leading space + letters) into
// its tokens. Non-letter pieces and nucleus-less words stay whole.
std::vector<std::string> SyllablePieceTokens(
    std::string_view piece, const phonology::Phonology& phonology) {
  const bool spaced = !piece.empty() && piece[0] == ' ';
  const std::string_view body = spaced ? piece.substr(1) : piece;
  const std::u32string cps = utf8::Decode(body);
  if (cps.empty() || !utf8::IsLetter(cps[0])) return {std::string(piece)};
  const phonology::SyllableSplit split = phonology.Syllabify(body);
  if (split.syllables.empty()) return {std::string(piece)};
  std::vector<std::string> out = split.Strings();
  if (spaced) out.front().insert(0, " ");
  return out;
}

}  // namespace

std::string ToString(TokenizerKind kind) {
  switch (kind) {
    case TokenizerKind::kBase: return "BASE";
    case TokenizerKind::kOur: return "OUR";
    case TokenizerKind::kSyllable: return "SYLLABLE";
    case TokenizerKind::kUnicode: return "UNICODE";
  }
  return "?";
}

TokenizerKind ParseTokenizerKind(std::string_view s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(c));
  if (lower == "base") return TokenizerKind::kBase;
  if (lower == "our") return TokenizerKind::kOur;
  if (lower == "syllable") return TokenizerKind::kSyllable;
  if (lower == "unicode") return TokenizerKind::kUnicode;
  throw InvariantError("tokenizer", "unknown tokenizer kind '" +
                                        std::string(s) + "'");
}

Vocab::Vocab(TokenizerKind kind) : kind_(kind) {
  Add(kEos);
  Add(kUnk);
  Add(kNewline);
}

TokenId Vocab::Add(std::string_view token) {
  auto [it, inserted] =
      ids_.try_emplace(std::string(token), static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

TokenId Vocab::AddProtected(std::string_view token) {
  const TokenId id = Add(token);
  if (!IsSpecial(id)) protected_.insert(id);
  return id;
}

std::optional<TokenId> Vocab::Find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocab::Hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xFF;
    h *= 1099511628211ull;
  };
  mix(ToString(kind_));
  for (const std::string& t : tokens_) mix(t);
  return h;
}

void Vocab::Save(std::ostream& out, std::string_view config_json) const {
  out << "@verseforge-vocab\t1\n";
  out << "@kind\t" << ToString(kind_) << "\n";
  out << "@special\teos\t" << eos() << "\n";
  out << "@special\tunk\t" << unk() << "\n";
  out << "@special\tnewline\t" << newline() << "\n";
  std::vector<TokenId> prot(protected_.begin(), protected_.end());
  std::sort(prot.begin(), prot.end());
  for (TokenId id : prot) out << "@protected\t" << id << "\n";
  if (!config_json.empty()) out << "@config\t" << Escape(config_json) << "\n";
  out << "@end\n";
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << Escape(tokens_[i]) << '\t' << i << '\n';
  }
}

void Vocab::Save(const std::filesystem::path& path,
                 std::string_view config_json) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocab file " + path.string());
  Save(out, config_json);
  if (!out) throw IoError("failed writing vocab file " + path.string());
}

Vocab Vocab::Load(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };
  if (!next_line() || line != "@verseforge-vocab\t1") {
    throw ParseError(line_no, "not a verseforge vocab file (version 1)");
  }
  std::optional<TokenizerKind> kind;
  std::map<std::string, TokenId> specials;
  std::vector<TokenId> prot;
  bool ended = false;
  while (next_line()) {
    if (line == "@end") {
      ended = true;
      break;
    }
    const auto fields = SplitTabs(line);
    try {
      if (fields[0] == "@kind" && fields.size() == 2) {
        kind = ParseTokenizerKind(fields[1]);
      } else if (fields[0] == "@special" && fields.size() == 3) {
        if (!specials.emplace(fields[1], std::stoi(fields[2])).second) {
          throw ParseError(line_no, "special '" + fields[1] + "' listed twice");
        }
      } else if (fields[0] == "@protected" && fields.size() == 2) {
        prot.push_back(std::stoi(fields[1]));
      } else if (fields[0] == "@config") {
        // Informational only.
      } else {
        throw ParseError(line_no, "unknown header line");
      }
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "bad integer in header");
    }
  }
  if (!ended) throw ParseError(line_no, "missing @end");
  if (!kind) throw ParseError(line_no, "missing @kind");
  const std::map<std::string, TokenId> expected = {
      {"eos", 0}, {"unk", 1}, {"newline", 2}};
  if (specials != expected) {
    throw ParseError(line_no, "specials must be eos=0, unk=1, newline=2");
  }
  Vocab vocab(*kind);
  std::size_t expected_id = 0;
  while (next_line()) {
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected token<TAB>id");
    TokenId id;
    try {
      id = std::stoi(line.substr(tab + 1));
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "bad token id");
    }
    if (id != static_cast<TokenId>(expected_id)) {
      throw ParseError(line_no, "token ids must be dense and ascending");
    }
    const std::string token = Unescape(std::string_view(line).substr(0, tab), line_no);
    if (expected_id < 3) {
      if (token != vocab.Token(id)) {
        throw ParseError(line_no, "special token mismatch");
      }
    } else if (vocab.Add(token) != id) {
      throw ParseError(line_no, "duplicate token");
    }
    ++expected_id;
  }
  if (expected_id < 3) throw ParseError(line_no, "vocab has no tokens");
  for (TokenId id : prot) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw ParseError(line_no, "protected id out of range");
    }
    vocab.AddProtected(vocab.Token(id));
  }
  return vocab;
}

Vocab Vocab::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocab file " + path.string());
  return Load(in);
}

std::vector<std::string> PreTokenize(std::string_view text) {
  const std::u32string cps = utf8::Decode(text);
  std::vector<std::string> pieces;
  std::size_t i = 0;
  auto take_run = [&](std::size_t from) {
    std::size_t j = from;
    if (utf8::IsLetter(cps[j])) {
      while (j < cps.size() && utf8::IsLetter(cps[j])) ++j;
    } else if (utf8::IsDigit(cps[j])) {
      while (j < cps.size() && utf8::IsDigit(cps[j])) ++j;
    } else {
      ++j;
    }
    return j;
  };
  while (i < cps.size()) {
    const char32_t c = cps[i];
    std::size_t j;
    if (c == U'\n') {
      j = i + 1;
    } else if (c == U' ') {
      const bool attach = i + 1 < cps.size() && cps[i + 1] != U' ' &&
                          cps[i + 1] != U'\n';
      j = attach ? take_run(i + 1) : i + 1;
    } else {
      j = take_run(i);
    }
    pieces.push_back(utf8::Encode(std::u32string_view(cps).substr(i, j - i)));
    i = j;
  }
  return pieces;
}

std::vector<std::string> AnnotationTokens(std::span<const std::string> schemes,
                                          std::span<const std::string> years) {
  std::vector<std::string> out = {"#", " #"};
  auto both = [&out](const std::string& s) {
    out.push_back(s);
    out.push_back(" " + s);
  };
  for (const std::string& s : schemes) both(s);
  for (const std::string& y : years) both(y);
  for (const char* m : {"J", "T", "D", "A", "X", "Y", "H", "P", "N"}) both(m);
  for (int n = 1; n <= 40; ++n) both(std::to_string(n));
  return out;
}

Vocab TrainBpe(std::span<const std::string> lines, std::size_t vocab_size,
               std::span<const std::string> specials, TokenizerKind kind) {
  Vocab vocab(kind);
  for (const std::string& s : specials) vocab.AddProtected(s);

  std::map<std::string, std::size_t> piece_counts;
  bool any_text = false;
  for (const std::string& line : lines) {
    for (const std::string& piece : PreTokenize(line)) {
      any_text = true;
      const auto id = vocab.Find(piece);
      if (id && (vocab.IsProtected(*id) || vocab.IsSpecial(*id))) continue;
      ++piece_counts[piece];
    }
  }
  if (!any_text) throw InvariantError("corpus", "BPE training corpus is empty");

  std::set<char32_t> alphabet;
  for (const auto& [piece, n] : piece_counts) {
    for (char32_t c : utf8::Decode(piece)) alphabet.insert(c);
  }
  for (char32_t c : alphabet) vocab.Add(utf8::Encode(c));

  // Words as sequences of vocab ids, with their corpus frequency.
  struct Word {
    std::vector<TokenId> symbols;
    std::size_t count;
  };
  std::vector<Word> words;
  for (const auto& [piece, n] : piece_counts) {
    Word w{{}, n};
    for (char32_t c : utf8::Decode(piece)) w.symbols.push_back(*vocab.Find(utf8::Encode(c)));
    words.push_back(std::move(w));
  }

  using Pair = std::pair<TokenId, TokenId>;
  std::map<Pair, std::int64_t> pair_counts;
  std::map<Pair, std::set<std::size_t>> where;
  // Ordered by descending count, then by the pair's strings.
  using Rank = std::tuple<std::int64_t, std::string, std::string, TokenId, TokenId>;
  std::set<Rank> ranking;

  auto rank_of = [&](const Pair& p, std::int64_t count) {
    return Rank{-count, vocab.Token(p.first), vocab.Token(p.second), p.first,
                p.second};
  };
  auto adjust = [&](const Pair& p, std::int64_t delta, std::size_t word) {
    std::int64_t& c = pair_counts[p];
    if (c > 0) ranking.erase(rank_of(p, c));
    c += delta;
    if (c > 0) {
      ranking.insert(rank_of(p, c));
      if (delta > 0) where[p].insert(word);
    } else {
      pair_counts.erase(p);
    }
  };
  auto account = [&](std::size_t wi, int sign) {
    const Word& w = words[wi];
    for (std::size_t k = 0; k + 1 < w.symbols.size(); ++k) {
      adjust({w.symbols[k], w.symbols[k + 1]},
             sign * static_cast<std::int64_t>(w.count), wi);
    }
  };
  for (std::size_t wi = 0; wi < words.size(); ++wi) account(wi, +1);

  while (vocab.size() < vocab_size && !ranking.empty()) {
    const Rank best = *ranking.begin();
    const Pair pair{std::get<3>(best), std::get<4>(best)};
    const std::string merged = vocab.Token(pair.first) + vocab.Token(pair.second);
    // The merged string may already exist (e.g. as a protected token); the
    // existing id is reused and the pair is consumed either way.
    const TokenId new_id = vocab.Add(merged);
    const std::set<std::size_t> affected = std::move(where[pair]);
    where.erase(pair);
    for (std::size_t wi : affected) {
      Word& w = words[wi];
      bool present = false;
      for (std::size_t k = 0; k + 1 < w.symbols.size(); ++k) {
        if (w.symbols[k] == pair.first && w.symbols[k + 1] == pair.second) {
          present = true;
          break;
        }
      }
      if (!present) continue;
      account(wi, -1);
      std::vector<TokenId> rewritten;
      for (std::size_t k = 0; k < w.symbols.size(); ++k) {
        if (k + 1 < w.symbols.size() && w.symbols[k] == pair.first &&
            w.symbols[k + 1] == pair.second) {
          rewritten.push_back(new_id);
          ++k;
        } else {
          rewritten.push_back(w.symbols[k]);
        }
      }
      w.symbols = std::move(rewritten);
      account(wi, +1);
    }
  }
  return vocab;
}

Vocab BuildSyllableVocab(std::span<const std::string> lines,
                         std::span<const std::string> specials,
                         const phonology::Phonology& phonology) {
  Vocab vocab(TokenizerKind::kSyllable);
  for (const std::string& s : specials) vocab.AddProtected(s);
  std::map<std::string, std::size_t> counts;
  std::set<char32_t> alphabet = {U' '};
  for (const std::string& line : lines) {
    for (const std::string& piece : PreTokenize(line)) {
      for (char32_t c : utf8::Decode(piece)) alphabet.insert(c);
      if (vocab.Find(piece)) continue;
      for (std::string& t : SyllablePieceTokens(piece, phonology)) ++counts[t];
    }
  }
  alphabet.erase(U'\n');
  for (char32_t c : alphabet) vocab.Add(utf8::Encode(c));
  std::vector<std::pair<std::size_t, std::string>> by_freq;
  for (auto& [t, n] : counts) by_freq.emplace_back(n, t);
  std::stable_sort(by_freq.begin(), by_freq.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [n, t] : by_freq) vocab.Add(t);
  return vocab;
}

Vocab BuildUnicodeVocab(std::span<const std::string> lines) {
  Vocab vocab(TokenizerKind::kUnicode);
  std::set<char32_t> alphabet;
  for (const std::string& line : lines) {
    for (char32_t c : utf8::Decode(line)) alphabet.insert(c);
  }
  for (char32_t c : alphabet) vocab.Add(utf8::Encode(c));
  return vocab;
}

Tokenizer::Tokenizer(Vocab vocab, const phonology::Phonology& phonology)
    : vocab_(std::move(vocab)), phonology_(&phonology) {}

void Tokenizer::EncodeChars(std::string_view text, Encoding& out) const {
  for (char32_t c : utf8::Decode(text)) {
    const auto id = vocab_.Find(utf8::Encode(c));
    if (id) {
      out.ids.push_back(*id);
    } else {
      out.ids.push_back(vocab_.unk());
      ++out.unknown;
    }
  }
}

void Tokenizer::EncodeBpePiece(std::string_view piece, Encoding& out) const {
  std::vector<std::string> parts;
  std::vector<bool> unknown;
  for (char32_t c : utf8::Decode(piece)) {
    std::string s = utf8::Encode(c);
    unknown.push_back(!vocab_.Find(s));
    parts.push_back(std::move(s));
  }
  // Merge the adjacent pair whose concatenation has the lowest id, until no
  // adjacent concatenation is a vocab entry.
  while (parts.size() > 1) {
    TokenId best = -1;
    std::size_t at = 0;
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
      if (unknown[k] || unknown[k + 1]) continue;
      const auto id = vocab_.Find(parts[k] + parts[k + 1]);
      if (id && (best < 0 || *id < best)) {
        best = *id;
        at = k;
      }
    }
    if (best < 0) break;
    parts[at] += parts[at + 1];
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(at) + 1);
    unknown.erase(unknown.begin() + static_cast<std::ptrdiff_t>(at) + 1);
  }
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (unknown[k]) {
      out.ids.push_back(vocab_.unk());
      ++out.unknown;
    } else {
      out.ids.push_back(*vocab_.Find(parts[k]));
    }
  }
}

void Tokenizer::EncodeSyllablePiece(std::string_view piece, Encoding& out) const {
  for (const std::string& t : SyllablePieceTokens(piece, *phonology_)) {
    if (const auto id = vocab_.Find(t)) {
      out.ids.push_back(*id);
    } else {
      EncodeChars(t, out);
    }
  }
}

Encoding Tokenizer::Encode(std::string_view text) const {
  Encoding out;
  if (kind() == TokenizerKind::kUnicode) {
    EncodeChars(text, out);
    return out;
  }
  for (const std::string& piece : PreTokenize(text)) {
    if (piece == Vocab::kNewline) {
      out.ids.push_back(vocab_.newline());
      continue;
    }
    if (const auto id = vocab_.Find(piece); id && vocab_.IsProtected(*id)) {
      out.ids.push_back(*id);
      continue;
    }
    if (kind() == TokenizerKind::kSyllable) {
      EncodeSyllablePiece(piece, out);
    } else {
      EncodeBpePiece(piece, out);
    }
  }
  return out;
}

std::string Tokenizer::Decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == vocab_.unk()) {
      out += "\xEF\xBF\xBD";
    } else if (id == vocab_.newline() || !vocab_.IsSpecial(id)) {
      out += vocab_.Token(id);
    }
  }
  return out;
}

std::vector<std::string> Tokenizer::Segment(std::string_view text) const {
  std::vector<std::string> out;
  for (TokenId id : Encode(text).ids) out.push_back(vocab_.Token(id));
  return out;
}

double CharsPerToken(const Tokenizer& tokenizer,
                     std::span<const std::string> sample) {
  std::size_t chars = 0, tokens = 0;
  for (const std::string& line : sample) {
    chars += utf8::Length(line);
    tokens += tokenizer.Encode(line).ids.size();
  }
  if (tokens == 0) throw InvariantError("sample", "no tokens in sample");
  return static_cast<double>(chars) / static_cast<double>(tokens);
}

}  // namespace verseforge::tokenizers
