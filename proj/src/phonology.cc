#include "verseforge/phonology.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "verseforge/error.h"
#include "verseforge/utf8.h"

namespace verseforge::phonology {

namespace {

bool IsShortVowel(char32_t c) {
  return c == U'a' || c == U'e' || c == U'ě' || c == U'i' || c == U'o' ||
         c == U'u' || c == U'y';
}

bool IsLongVowel(char32_t c) {
  return c == U'á' || c == U'é' || c == U'í' || c == U'ó' || c == U'ú' ||
         c == U'ů' || c == U'ý';
}

bool IsVowel(char32_t c) { return IsShortVowel(c) || IsLongVowel(c); }

bool IsLiquid(char32_t c) { return c == U'r' || c == U'l'; }

// Consonant clusters allowed to open a syllable, written with "ch" as one
// unit. Anything not listed keeps its first consonant(s) in the coda.
const std::set<std::u32string>& Onsets() {
  static const std::set<std::u32string> kOnsets = {
      U"bl", U"br", U"bř", U"bz", U"cl", U"cv", U"čl", U"čm", U"čn", U"čt",
      U"čv", U"dl", U"dm", U"dn", U"dr", U"dř", U"dv", U"dž", U"fl", U"fr",
      U"gl", U"gn", U"gr", U"hl", U"hm", U"hn", U"hr", U"hř", U"hv", U"chl",
      U"chm", U"chr", U"chř", U"chv", U"jm", U"kd", U"kl", U"km", U"kn",
      U"kr", U"kř", U"ks", U"kt", U"kv", U"ml", U"mn", U"mr", U"mř", U"pl",
      U"pn", U"pr", U"př", U"ps", U"pt", U"sc", U"sh", U"sch", U"sk", U"sl",
      U"sm", U"sn", U"sp", U"sr", U"st", U"sv", U"šk", U"šl", U"šm", U"šn",
      U"šp", U"šr", U"št", U"šť", U"šv", U"tl", U"tm", U"tr", U"tř", U"tv",
      U"vd", U"vl", U"vn", U"vr", U"vř", U"vz", U"zb", U"zd", U"zh", U"zl",
      U"zm", U"zn", U"zr", U"zv", U"žd", U"žl", U"žn", U"žr", U"žv", U"skl",
      U"skr", U"skv", U"spl", U"spr", U"spř", U"str", U"stř", U"svl", U"svr",
      U"škr", U"škl", U"štr", U"zdr", U"zbr", U"zpr", U"vzd", U"vst", U"vzn",
  };
  return kOnsets;
}

enum class UnitKind { kConsonant, kShortNucleus, kLongNucleus };

// A phonological unit: one letter, or the digraph "ch", or a diphthong.
struct Unit {
  std::size_t begin;  // code point offset in the word
  std::size_t len;    // code points
  UnitKind kind;
  bool nucleus() const { return kind != UnitKind::kConsonant; }
};

std::vector<Unit> ToUnits(const std::u32string& lower) {
  std::vector<Unit> units;
  for (std::size_t i = 0; i < lower.size();) {
    const char32_t c = lower[i];
    const char32_t next = i + 1 < lower.size() ? lower[i + 1] : 0;
    if (c == U'c' && next == U'h') {
      units.push_back({i, 2, UnitKind::kConsonant});
      i += 2;
    } else if ((c == U'o' || c == U'a' || c == U'e') && next == U'u') {
      units.push_back({i, 2, UnitKind::kLongNucleus});
      i += 2;
    } else if (IsLongVowel(c)) {
      units.push_back({i, 1, UnitKind::kLongNucleus});
      ++i;
    } else if (IsShortVowel(c)) {
      units.push_back({i, 1, UnitKind::kShortNucleus});
      ++i;
    } else {
      units.push_back({i, 1, UnitKind::kConsonant});
      ++i;
    }
  }
  // Syllabic r/l: after a consonant and before a consonant or word end.
  for (std::size_t k = 1; k < units.size(); ++k) {
    Unit& u = units[k];
    if (u.kind != UnitKind::kConsonant || u.len != 1 ||
        !IsLiquid(lower[u.begin])) {
      continue;
    }
    const bool prev_consonant = units[k - 1].kind == UnitKind::kConsonant;
    const bool next_consonant =
        k + 1 == units.size() || units[k + 1].kind == UnitKind::kConsonant;
    if (prev_consonant && next_consonant) u.kind = UnitKind::kShortNucleus;
  }
  return units;
}

std::u32string Spell(const std::u32string& lower, const std::vector<Unit>& units,
                     std::size_t from, std::size_t to) {
  std::u32string s;
  for (std::size_t k = from; k < to; ++k) {
    s += lower.substr(units[k].begin, units[k].len);
  }
  return s;
}

// Number of trailing units of the cluster [from, to) that may form an onset.
std::size_t LongestOnset(const std::u32string& lower,
                         const std::vector<Unit>& units, std::size_t from,
                         std::size_t to) {
  for (std::size_t start = from; start + 1 < to; ++start) {
    if (Onsets().count(Spell(lower, units, start, to))) return to - start;
  }
  return to > from ? 1 : 0;
}

// Byte offset of the nucleus inside a syllable string.
std::size_t OnsetBytes(std::string_view syllable) {
  const std::u32string cps = utf8::Decode(syllable);
  std::size_t nucleus = cps.size();
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (IsVowel(utf8::ToLower(cps[i]))) {
      nucleus = i;
      break;
    }
  }
  if (nucleus == cps.size()) {
    for (std::size_t i = 1; i < cps.size(); ++i) {
      if (IsLiquid(utf8::ToLower(cps[i]))) {
        nucleus = i;
        break;
      }
    }
  }
  if (nucleus == cps.size()) nucleus = 0;
  return utf8::Encode(cps.substr(0, nucleus)).size();
}

bool IsVocalicPreposition(std::string_view lower_word) {
  static const std::set<std::string, std::less<>> kPrepositions = {
      "bez", "do", "ke", "ku", "na", "nad", "o", "ob", "od", "po", "pod",
      "pro", "před", "přes", "při", "u", "ve", "za", "ze", "skrz"};
  return kPrepositions.count(lower_word) > 0;
}

}  // namespace

std::vector<std::string> SyllableSplit::Strings() const {
  std::vector<std::string> out;
  out.reserve(syllables.size());
  for (const Syllable& s : syllables) out.push_back(s.text);
  return out;
}

StressPattern::StressPattern(std::string marks) : marks_(std::move(marks)) {
  for (char c : marks_) {
    if (c != 'x' && c != 'X') {
      throw InvariantError("stress", "marks must be 'x' or 'X'");
    }
  }
}

Phonology::Phonology() {
  // Attested split that the onset rules do not produce.
  AddException("duchu", "duch-u");
}

void Phonology::AddException(std::string_view word, std::string_view hyphenated) {
  std::vector<std::size_t> lengths;
  std::string joined;
  std::size_t start = 0;
  while (start <= hyphenated.size()) {
    auto dash = hyphenated.find('-', start);
    if (dash == std::string_view::npos) dash = hyphenated.size();
    const std::string_view part = hyphenated.substr(start, dash - start);
    if (part.empty()) {
      throw InvariantError("exception", "empty syllable in '" +
                                            std::string(hyphenated) + "'");
    }
    lengths.push_back(utf8::Length(part));
    joined += part;
    start = dash + 1;
  }
  const std::string lower = utf8::ToLower(word);
  if (utf8::ToLower(joined) != lower) {
    throw InvariantError("exception", "'" + std::string(hyphenated) +
                                          "' does not spell '" +
                                          std::string(word) + "'");
  }
  exceptions_[lower] = std::move(lengths);
}

void Phonology::LoadExceptions(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = utf8::Trim(line);
    if (trimmed.empty() || trimmed[0] == ';') continue;
    const auto tab = trimmed.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(line_no, "expected word<TAB>syl-la-bles");
    }
    try {
      AddException(utf8::Trim(trimmed.substr(0, tab)),
                   utf8::Trim(trimmed.substr(tab + 1)));
    } catch (const InvariantError& e) {
      throw ParseError(line_no, e.what());
    }
  }
}

void Phonology::LoadExceptions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open exceptions file " + path.string());
  LoadExceptions(in);
}

SyllableSplit Phonology::Syllabify(std::string_view word) const {
  SyllableSplit split;
  const std::u32string original = utf8::Decode(word);
  std::u32string lower = original;
  for (char32_t& c : lower) c = utf8::ToLower(c);

  if (auto it = exceptions_.find(utf8::Encode(lower)); it != exceptions_.end()) {
    std::size_t pos = 0;
    for (std::size_t len : it->second) {
      Syllable s;
      s.text = utf8::Encode(std::u32string_view(original).substr(pos, len));
      s.onset_bytes = OnsetBytes(s.text);
      split.syllables.push_back(std::move(s));
      pos += len;
    }
    return split;
  }

  const std::vector<Unit> units = ToUnits(lower);
  std::vector<std::size_t> nuclei;
  for (std::size_t k = 0; k < units.size(); ++k) {
    if (units[k].nucleus()) nuclei.push_back(k);
  }
  if (nuclei.empty()) {
    split.clitic = true;
    return split;
  }

  // Unit index at which each syllable after the first begins.
  std::vector<std::size_t> starts = {0};
  for (std::size_t n = 0; n + 1 < nuclei.size(); ++n) {
    const std::size_t from = nuclei[n] + 1;
    const std::size_t to = nuclei[n + 1];
    const std::size_t cluster = to - from;
    std::size_t onset;
    if (cluster <= 1) {
      onset = cluster;
    } else if (units[nuclei[n]].kind == UnitKind::kLongNucleus) {
      onset = LongestOnset(lower, units, from, to);
    } else {
      // A short nucleus closes its syllable with at least one consonant.
      onset = LongestOnset(lower, units, from + 1, to);
    }
    starts.push_back(to - onset);
  }

  for (std::size_t s = 0; s < starts.size(); ++s) {
    const std::size_t first = starts[s];
    const std::size_t last = s + 1 < starts.size() ? starts[s + 1] : units.size();
    const std::size_t cp_begin = units[first].begin;
    const std::size_t cp_end =
        last < units.size() ? units[last].begin : original.size();
    const std::size_t nucleus_cp = units[nuclei[s]].begin;
    Syllable syl;
    syl.text = utf8::Encode(
        std::u32string_view(original).substr(cp_begin, cp_end - cp_begin));
    syl.onset_bytes =
        utf8::Encode(std::u32string_view(original).substr(
                         cp_begin, nucleus_cp - cp_begin))
            .size();
    split.syllables.push_back(std::move(syl));
  }
  return split;
}

std::vector<std::string> Words(std::string_view text) {
  std::vector<std::string> words;
  std::u32string current;
  for (char32_t c : utf8::Decode(text)) {
    if (utf8::IsLetter(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      words.push_back(utf8::Encode(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(utf8::Encode(current));
  return words;
}

std::vector<Syllable> Phonology::VerseSyllables(std::string_view text) const {
  std::vector<Syllable> out;
  std::string pending;
  for (const std::string& word : Words(text)) {
    SyllableSplit split = Syllabify(word);
    if (split.clitic) {
      pending += word;
      continue;
    }
    split.syllables.front().text.insert(0, pending);
    split.syllables.front().onset_bytes += pending.size();
    pending.clear();
    for (Syllable& s : split.syllables) out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> Phonology::VerseSyllableStrings(
    std::string_view text) const {
  std::vector<std::string> out;
  for (Syllable& s : VerseSyllables(text)) out.push_back(std::move(s.text));
  return out;
}

std::size_t Phonology::CountSyllables(std::string_view text) const {
  std::size_t n = 0;
  for (const std::string& word : Words(text)) {
    n += Syllabify(word).syllables.size();
  }
  return n;
}

StressPattern Phonology::Stress(std::string_view text) const {
  struct WordInfo {
    std::size_t syllables;
    bool preposition;
  };
  std::vector<WordInfo> words;
  for (const std::string& w : Words(text)) {
    const std::size_t n = Syllabify(w).syllables.size();
    if (n == 0) continue;  // nucleus-less clitics carry no mark
    words.push_back({n, n == 1 && IsVocalicPreposition(utf8::ToLower(w))});
  }

  // '?' marks an ambivalent monosyllable, resolved below.
  std::string marks;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].preposition && i + 1 < words.size()) {
      // The preposition carries the stress of the whole clitic group.
      marks += 'X';
      marks.append(words[i + 1].syllables, 'x');
      ++i;
    } else if (words[i].syllables >= 2) {
      marks += 'X';
      marks.append(words[i].syllables - 1, 'x');
    } else {
      marks += '?';
    }
  }

  auto flip = [](char c) { return c == 'X' ? 'x' : 'X'; };
  for (std::size_t i = 0; i < marks.size();) {
    if (marks[i] != '?') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < marks.size() && marks[j] == '?') ++j;
    if (j < marks.size()) {
      // Alternate backwards away from the next fixed syllable.
      char m = flip(marks[j]);
      for (std::size_t k = j; k-- > i;) {
        marks[k] = m;
        m = flip(m);
      }
    } else {
      char m = i > 0 ? flip(marks[i - 1]) : 'X';
      for (std::size_t k = i; k < j; ++k) {
        marks[k] = m;
        m = flip(m);
      }
    }
    i = j;
  }
  return StressPattern(std::move(marks));
}

std::string Phonology::EndingHint(std::string_view text) const {
  const std::vector<Syllable> syllables = VerseSyllables(text);
  if (syllables.empty()) {
    throw InvariantError("text", "verse has no syllables: '" +
                                     std::string(text) + "'");
  }
  std::string hint;
  if (syllables.size() == 1) {
    hint = syllables.back().text.substr(syllables.back().onset_bytes);
  } else {
    const Syllable& penult = syllables[syllables.size() - 2];
    hint = penult.text.substr(penult.onset_bytes) + syllables.back().text;
  }
  return utf8::ToLower(hint);
}

const Phonology& DefaultPhonology() {
  static const Phonology kDefault;
  return kDefault;
}

}  // namespace verseforge::phonology
