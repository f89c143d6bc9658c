#include "verseforge/validation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "verseforge/error.h"
#include "verseforge/rng.h"
#include "verseforge/utf8.h"

namespace verseforge::validation {

namespace {

struct Slot {
  std::vector<std::string_view> feet;
  bool repeat = false;
};

struct Grammar {
  std::vector<Slot> slots;
  bool truncatable = false;  // the line may stop inside a repeating foot
};

const std::array<Grammar, kMeterPriority.size()>& Grammars() {
  static const auto* grammars = [] {
    const Slot mixed{{"Xxx", "Xx"}, false};
    const Slot mixed_repeat{{"Xxx", "Xx"}, true};
    auto* g = new std::array<Grammar, kMeterPriority.size()>();
    auto set = [&](MeterLabel m, Grammar grammar) {
      (*g)[PriorityIndex(m)] = std::move(grammar);
    };
    set(MeterLabel::kIamb, {{{{"x"}, false}, {{"Xx"}, true}}, true});
    set(MeterLabel::kTrochee, {{{{"Xx"}, true}}, true});
    set(MeterLabel::kDactyl, {{{{"Xxx"}, true}}, true});
    set(MeterLabel::kAmphibrach, {{{{"x"}, false}, {{"Xxx"}, true}}, true});
    set(MeterLabel::kDactylotrochee, {{mixed_repeat}, true});
    set(MeterLabel::kDactylotrocheeAnacrusis,
        {{{{"x", "xx"}, false}, mixed_repeat}, true});
    set(MeterLabel::kHexameter,
        {{mixed, mixed, mixed, mixed, {{"Xxx"}, false}, {{"Xx", "X"}, false}},
         false});
    set(MeterLabel::kPentameter,
        {{mixed, mixed, {{"X"}, false}, {{"Xxx"}, false}, {{"Xxx"}, false},
          {{"X"}, false}},
         false});
    return g;
  }();
  return *grammars;
}

int Gain(char expected, char actual) {
  if (expected == 'X') return actual == 'X' ? 2 : 0;
  return actual == 'x' ? 1 : 0;
}

// Best agreement between `marks` and any realization of `grammar`.
// Dynamic programme over (position, slot, slot used, stressed positions so
// far) keeping the best raw gain; the score needs the stressed count for its
// denominator.
double GrammarScore(const Grammar& grammar, std::string_view marks) {
  const int n = static_cast<int>(marks.size());
  if (n == 0) return 0.0;
  const int slots = static_cast<int>(grammar.slots.size());
  constexpr int kUnset = -1;
  // dp[pos][slot][used][k]
  std::vector<int> dp((n + 1) * (slots + 1) * 2 * (n + 1), kUnset);
  auto at = [&](int pos, int slot, int used, int k) -> int& {
    return dp[((pos * (slots + 1) + slot) * 2 + used) * (n + 1) + k];
  };
  std::vector<int> accepted(n + 1, kUnset);
  auto relax = [](int& cell, int value) { cell = std::max(cell, value); };

  at(0, 0, 0, 0) = 0;
  for (int pos = 0; pos <= n; ++pos) {
    for (int slot = 0; slot <= slots; ++slot) {
      for (int used = 0; used < 2; ++used) {
        for (int k = 0; k <= n; ++k) {
          const int gain = at(pos, slot, used, k);
          if (gain == kUnset) continue;
          if (slot == slots) {
            if (pos == n) relax(accepted[k], gain);
            continue;
          }
          const Slot& s = grammar.slots[slot];
          if (s.repeat && used) relax(at(pos, slot + 1, 0, k), gain);
          for (std::string_view foot : s.feet) {
            const int len = static_cast<int>(foot.size());
            const int take = std::min(len, n - pos);
            if (take <= 0) continue;
            int g = gain;
            int stressed = k;
            for (int i = 0; i < take; ++i) {
              g += Gain(foot[i], marks[pos + i]);
              stressed += foot[i] == 'X';
            }
            if (take < len) {
              if (grammar.truncatable && s.repeat) relax(accepted[stressed], g);
              continue;
            }
            if (s.repeat) {
              relax(at(pos + len, slot, 1, stressed), g);
            } else {
              relax(at(pos + len, slot + 1, 0, stressed), g);
            }
          }
        }
      }
    }
  }
  double best = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (accepted[k] == kUnset) continue;
    best = std::max(best, static_cast<double>(accepted[k]) / (n + k));
  }
  return best;
}

// The mixed grammars contain the pure ones, so they would win every near
// tie; scores this close to the best count as tied.
constexpr double kTieMargin = 0.05;

// First label in priority order whose score is within kTieMargin of the best.
std::size_t BestIndex(const std::array<double, kMeterPriority.size()>& scores) {
  double top = 0.0;
  for (double s : scores) top = std::max(top, s);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (kMeterPriority[i] == MeterLabel::kNotRecognized) continue;
    if (scores[i] >= top - kTieMargin) return i;
  }
  return 0;
}

double Ratio(std::size_t hits, std::size_t total) {
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

std::array<double, kMeterPriority.size()> MeterScores(
    const phonology::StressPattern& pattern) {
  std::array<double, kMeterPriority.size()> scores{};
  const auto& grammars = Grammars();
  for (std::size_t i = 0; i < kMeterPriority.size(); ++i) {
    if (kMeterPriority[i] == MeterLabel::kNotRecognized) continue;
    scores[i] = GrammarScore(grammars[i], pattern.marks());
  }
  return scores;
}

MeterLabel ClassifyMeter(const phonology::StressPattern& pattern,
                         double threshold) {
  const auto scores = MeterScores(pattern);
  const std::size_t best = BestIndex(scores);
  return scores[best] >= threshold ? kMeterPriority[best]
                                   : MeterLabel::kNotRecognized;
}

std::vector<MeterLabel> ClassifyStrophe(
    std::span<const phonology::StressPattern> patterns, const RhymeScheme& scheme,
    double threshold) {
  if (patterns.size() != scheme.size()) {
    throw InvariantError("patterns", "expected " + std::to_string(scheme.size()) +
                                         " stress patterns, got " +
                                         std::to_string(patterns.size()));
  }
  std::vector<std::array<double, kMeterPriority.size()>> scores;
  std::vector<bool> metrical;
  for (const auto& p : patterns) {
    scores.push_back(MeterScores(p));
    metrical.push_back(scores.back()[BestIndex(scores.back())] >= threshold);
  }

  std::vector<MeterLabel> out;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    // Verses that fit no template on their own do not steer the group.
    std::array<double, kMeterPriority.size()> group{};
    double members = 0;
    for (std::size_t j = 0; j < patterns.size(); ++j) {
      const bool same = j == i || (scheme[i] != 'X' && scheme[j] == scheme[i]);
      if (!same || !metrical[j]) continue;
      ++members;
      for (std::size_t m = 0; m < group.size(); ++m) group[m] += scores[j][m];
    }
    if (members == 0) {
      group = scores[i];
    } else {
      for (double& g : group) g /= members;
    }
    const std::size_t chosen = BestIndex(group);
    const std::size_t own = BestIndex(scores[i]);
    if (scores[i][chosen] >= threshold) {
      out.push_back(kMeterPriority[chosen]);
    } else if (scores[i][own] >= threshold) {
      out.push_back(kMeterPriority[own]);
    } else {
      out.push_back(MeterLabel::kNotRecognized);
    }
  }
  return out;
}

std::string NormalizeClausula(std::string_view clausula) {
  std::u32string cps = utf8::Decode(clausula);
  for (char32_t& c : cps) {
    c = utf8::ToLower(c);
    switch (c) {
      case U'á': c = U'a'; break;
      case U'é': c = U'e'; break;
      case U'í': c = U'i'; break;
      case U'ó': c = U'o'; break;
      case U'ú':
      case U'ů': c = U'u'; break;
      case U'ý':
      case U'y': c = U'i'; break;
      default: break;
    }
  }
  return utf8::Encode(cps);
}

bool Rhymes(std::string_view verse_a, std::string_view verse_b,
            const phonology::Phonology& phonology) {
  if (phonology.CountSyllables(verse_a) == 0 ||
      phonology.CountSyllables(verse_b) == 0) {
    return false;
  }
  return NormalizeClausula(phonology.EndingHint(verse_a)) ==
         NormalizeClausula(phonology.EndingHint(verse_b));
}

RhymeScheme PredictScheme(std::span<const std::string> verses,
                          const phonology::Phonology& phonology) {
  const std::size_t n = verses.size();
  std::vector<std::optional<std::string>> keys;
  for (const auto& v : verses) {
    if (phonology.CountSyllables(v) == 0) {
      keys.emplace_back();
    } else {
      keys.emplace_back(NormalizeClausula(phonology.EndingHint(v)));
    }
  }
  // Union-find over the rhyme relation.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (keys[i] && keys[j] && *keys[i] == *keys[j]) parent[find(j)] = find(i);
    }
  }
  std::vector<std::optional<std::int64_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    groups.emplace_back(static_cast<std::int64_t>(find(i)));
  }
  return DeriveRhymeScheme(groups);
}

double MetricsReport::num_syl() const { return Ratio(syllable_hits, annotated_verses); }
double MetricsReport::end_acc() const { return Ratio(ending_hits, annotated_verses); }
double MetricsReport::unique() const {
  return unique_strophes == 0 ? std::numeric_limits<double>::quiet_NaN()
                              : unique_sum / static_cast<double>(unique_strophes);
}
double MetricsReport::rhyme_acc() const { return Ratio(rhyme_hits, strophes); }
double MetricsReport::meter_acc() const { return Ratio(meter_hits, strophes); }
double MetricsReport::verse_meter_acc() const {
  return Ratio(meter_verse_hits, meter_verses);
}
double MetricsReport::forced_end_acc() const {
  return Ratio(forced_ending_hits, forced_verses);
}
double MetricsReport::first_of_letter_end_acc() const {
  return Ratio(first_of_letter_ending_hits, first_of_letter_verses);
}

std::string MetricsReport::ToText() const {
  std::ostringstream out;
  auto ratio = [&](const char* key, double value, std::size_t denominator) {
    out << key << ": ";
    if (std::isnan(value)) {
      out << "n/a";
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", value);
      out << buf;
    }
    out << " (n=" << denominator << ")\n";
  };
  out << "strophes: " << strophes << "\n"
      << "parse_failures: " << parse_failures << "\n";
  ratio("num_syl", num_syl(), annotated_verses);
  ratio("end_acc", end_acc(), annotated_verses);
  ratio("unique", unique(), unique_strophes);
  ratio("rhyme_acc", rhyme_acc(), strophes);
  ratio("meter_acc", meter_acc(), strophes);
  ratio("verse_meter_acc", verse_meter_acc(), meter_verses);
  ratio("forced_end_acc", forced_end_acc(), forced_verses);
  ratio("first_of_letter_end_acc", first_of_letter_end_acc(),
        first_of_letter_verses);
  return out.str();
}

std::vector<std::optional<MeterLabel>> ExpectedMeters(const EvalUnit& unit) {
  const std::size_t n = unit.request.scheme.size();
  if (!unit.request.verse_meters.empty()) {
    return {unit.request.verse_meters.begin(), unit.request.verse_meters.end()};
  }
  std::vector<std::optional<MeterLabel>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (unit.parsed && i < unit.parsed->lines.size() &&
        unit.parsed->lines[i].annotation && unit.parsed->lines[i].annotation->meter) {
      out[i] = unit.parsed->lines[i].annotation->meter;
    } else if (unit.request.strophe_meter) {
      out[i] = unit.request.strophe_meter;
    } else if (unit.parsed && unit.parsed->header.strophe_meter) {
      out[i] = unit.parsed->header.strophe_meter;
    }
  }
  return out;
}

double UniqueSyllableRatio(std::span<const std::string> verses,
                           const phonology::Phonology& phonology) {
  std::unordered_set<std::string> unique;
  std::size_t total = 0;
  for (const auto& v : verses) {
    for (const auto& s : phonology.VerseSyllableStrings(v)) {
      unique.insert(utf8::ToLower(s));
      ++total;
    }
  }
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(unique.size()) / static_cast<double>(total);
}

MetricsReport Evaluate(std::span<const EvalUnit> units,
                       const phonology::Phonology& phonology,
                       EvalOptions options) {
  MetricsReport r;
  for (const EvalUnit& unit : units) {
    ++r.strophes;
    if (!unit.parsed) {
      ++r.parse_failures;
      continue;
    }
    const formats::ParsedStrophe& parsed = *unit.parsed;
    const RhymeScheme& scheme = parsed.header.scheme;
    std::vector<std::string> texts;
    for (const auto& line : parsed.lines) texts.push_back(line.text);

    const auto consistency = formats::CheckConsistency(parsed, phonology);
    r.annotated_verses += consistency.size();
    for (const auto& c : consistency) {
      r.syllable_hits += c.syllables_match;
      r.ending_hits += c.ending_matches;
    }
    if (consistency.size() == parsed.lines.size() &&
        unit.forced.size() == parsed.lines.size()) {
      std::set<char> seen;
      for (std::size_t i = 0; i < parsed.lines.size(); ++i) {
        const char letter = scheme[i];
        const bool first = letter != 'X' && seen.insert(letter).second;
        if (unit.forced[i]) {
          ++r.forced_verses;
          r.forced_ending_hits += consistency[i].ending_matches;
        } else if (first) {
          ++r.first_of_letter_verses;
          r.first_of_letter_ending_hits += consistency[i].ending_matches;
        }
      }
    }

    const double unique = UniqueSyllableRatio(texts, phonology);
    if (!std::isnan(unique)) {
      r.unique_sum += unique;
      ++r.unique_strophes;
    }

    const RhymeScheme predicted = PredictScheme(texts, phonology);
    r.rhyme_hits += predicted == unit.request.scheme;

    std::vector<phonology::StressPattern> patterns;
    for (const auto& t : texts) patterns.push_back(phonology.Stress(t));
    const auto labels = ClassifyStrophe(patterns, predicted, options.meter_threshold);
    const auto expected = ExpectedMeters(unit);
    bool all = expected.size() == labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i >= expected.size() || !expected[i]) {
        all = false;
        continue;
      }
      ++r.meter_verses;
      const bool hit = labels[i] == *expected[i];
      r.meter_verse_hits += hit;
      all = all && hit;
    }
    r.meter_hits += all;
  }
  return r;
}

double PermutationTest(std::span<const double> a, std::span<const double> b,
                       std::size_t repetitions, std::uint64_t seed) {
  if (a.size() != b.size()) {
    throw InvariantError("scores", "paired vectors differ in length (" +
                                       std::to_string(a.size()) + " vs " +
                                       std::to_string(b.size()) + ")");
  }
  if (repetitions == 0) throw InvariantError("repetitions", "must be positive");
  std::vector<double> d;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) {
      d.push_back(a[i] - b[i]);
      scale += std::abs(a[i] - b[i]);
    }
  }
  const std::size_t m = d.size();
  if (m == 0) return 1.0;
  const double observed = std::abs(std::accumulate(d.begin(), d.end(), 0.0));
  const double tolerance = 1e-9 * std::max(1.0, scale);

  // The first differing unit keeps its sign; bit j-1 of `mask` flips unit j.
  auto hit_mask = [&](std::uint64_t mask) {
    double s = d[0];
    for (std::size_t j = 1; j < m; ++j) {
      s += ((mask >> (j - 1)) & 1) ? -d[j] : d[j];
    }
    return std::abs(s) >= observed - tolerance;
  };

  const bool indexable = m - 1 < 63;
  if (indexable && (std::uint64_t{1} << (m - 1)) <= repetitions) {
    const std::uint64_t classes = std::uint64_t{1} << (m - 1);
    std::uint64_t hits = 0;
    for (std::uint64_t mask = 0; mask < classes; ++mask) hits += hit_mask(mask);
    return static_cast<double>(hits) / static_cast<double>(classes);
  }

  Rng rng(seed);
  std::size_t hits = 1;  // the observed labeling
  if (indexable) {
    const std::uint64_t classes = std::uint64_t{1} << (m - 1);
    std::unordered_set<std::uint64_t> drawn = {0};
    while (drawn.size() < repetitions) {
      const std::uint64_t mask = rng.NextBelow(classes);
      if (!drawn.insert(mask).second) continue;
      hits += hit_mask(mask);
    }
  } else {
    // Too many units to index; repeated draws are vanishingly unlikely.
    for (std::size_t r = 1; r < repetitions; ++r) {
      double s = d[0];
      std::uint64_t bits = 0;
      for (std::size_t j = 1; j < m; ++j) {
        if ((j - 1) % 64 == 0) bits = rng.NextU64();
        s += ((bits >> ((j - 1) % 64)) & 1) ? -d[j] : d[j];
      }
      hits += std::abs(s) >= observed - tolerance;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(repetitions);
}

}  // namespace verseforge::validation
