#ifndef VERSEFORGE_PHONOLOGY_H_
#define VERSEFORGE_PHONOLOGY_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace verseforge::phonology {

// One syllable of a word. `onset_bytes` is the byte length of the consonants
// preceding the nucleus.
struct Syllable {
  std::string text;
  std::size_t onset_bytes = 0;
};

struct SyllableSplit {
  std::vector<Syllable> syllables;
  // Set for words without a nucleus (the prepositions "v", "z", "k", "s").
  bool clitic = false;

  std::vector<std::string> Strings() const;
};

// Per-syllable rhythm marks, 'x' unstressed and 'X' stressed.
class StressPattern {
 public:
  StressPattern() = default;
  // Throws InvariantError unless every char is 'x' or 'X'.
  explicit StressPattern(std::string marks);

  const std::string& marks() const { return marks_; }
  std::size_t size() const { return marks_.size(); }
  bool empty() const { return marks_.empty(); }
  bool stressed(std::size_t i) const { return marks_[i] == 'X'; }

  friend bool operator==(const StressPattern&, const StressPattern&) = default;

 private:
  std::string marks_;
};

// Rule-based Czech syllabification, stress assignment and clausula
// extraction. Immutable after construction apart from AddException, so a
// fully configured instance can be shared across threads.
class Phonology {
 public:
  // Starts with the built-in table of irregular splits.
  Phonology();

  // Reads `word<TAB>syl-la-bles` lines; blank lines and lines starting with
  // ';' are ignored. Later entries override earlier ones.
  void LoadExceptions(std::istream& in);
  void LoadExceptions(const std::filesystem::path& path);
  // Throws InvariantError if the hyphenated form does not spell `word`.
  void AddException(std::string_view word, std::string_view hyphenated);

  // `word` must consist of letters only.
  SyllableSplit Syllabify(std::string_view word) const;

  // Syllables of a whole verse, punctuation ignored. A nucleus-less clitic is
  // glued to the first syllable of the following word.
  std::vector<Syllable> VerseSyllables(std::string_view text) const;
  std::vector<std::string> VerseSyllableStrings(std::string_view text) const;
  std::size_t CountSyllables(std::string_view text) const;

  StressPattern Stress(std::string_view text) const;

  // Last two syllables with the onset of the first of them removed, or the
  // single syllable minus its onset. Lowercase. Throws InvariantError for a
  // verse without syllables.
  std::string EndingHint(std::string_view text) const;

 private:
  std::map<std::string, std::vector<std::size_t>> exceptions_;
};

// Letter-only words of a text; every other character separates words.
std::vector<std::string> Words(std::string_view text);

// The process-wide default instance (built-in exceptions only).
const Phonology& DefaultPhonology();

}  // namespace verseforge::phonology

#endif  // VERSEFORGE_PHONOLOGY_H_
