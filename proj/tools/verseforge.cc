// verseforge command line: corpus ingestion, tokenizer and LM training,
// generation, evaluation and significance testing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "verseforge/corpus.h"
#include "verseforge/error.h"
#include "verseforge/formats.h"
#include "verseforge/generation.h"
#include "verseforge/language_model.h"
#include "verseforge/phonology.h"
#include "verseforge/tokenizers.h"
#include "verseforge/utf8.h"
#include "verseforge/validation.h"

#ifndef VERSEFORGE_FIXTURE_PATH
#define VERSEFORGE_FIXTURE_PATH "data/fixture_corpus.jsonl"
#endif

namespace {

using nlohmann::json;
using namespace verseforge;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitParse = 4;
constexpr int kExitSchema = 5;
constexpr int kExitInvariant = 6;

constexpr std::string_view kMachineLabel = "# machine-generated";
constexpr std::string_view kRunPrefix = "# run: ";
constexpr std::string_view kBlockPrefix = "#@ strophe ";

constexpr const char* kHelpFooter = R"(
Corpus file (UTF-8, one JSON object per line, one poem per line):
  {"year": 1900 | null,
   "strophes": [[{"text": "...", "rhyme": 3 | null, "meter": "J"}, ...], ...]}
  rhyme: integer rhyme-group id shared by rhyming verses, null if unrhymed.
  meter: one of J T D A X Y H P N. `--corpus fixture` names the bundled corpus.

Text formats (every line ends with a newline):
  BASIC        # ABAB # J # 1900 #     then the plain verse lines
  VERSE_PAR    # ABAB # J # 1900 #     then  9 # oři # <verse>
  METER_VERSE  # ABAB # 1900           then  J # 9 # oři # <verse>
  Fields: rhyme scheme, strophe meter (BASIC, VERSE_PAR), year bucket
  (20-year floor or NaN), per verse syllable count and ending hint.

Generations file: "# machine-generated", "# run: <json>", then per strophe a
line "#@ strophe <i> forced=<0/1 per verse or -> retries=<n> truncated=<0|1>"
followed by the strophe text.

Requests file (JSONL): {"scheme": "ABAB", "year": 1900 | "1900" | null,
  "meters": ["J", ...] (optional), "strophe_meter": "J" (optional)}

Exit codes: 0 ok, 1 other, 2 usage, 3 io, 4 parse, 5 schema mismatch,
6 invariant violation.
)";

// Options shared by subcommands that read the corpus.
struct CorpusOptions {
  std::string corpus;
  std::size_t min_scheme_count = 0;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<Strophe> train;
  std::vector<Strophe> test;
};

fs::path CorpusPath(const std::string& corpus) {
  return corpus == "fixture" ? fs::path(VERSEFORGE_FIXTURE_PATH) : fs::path(corpus);
}

std::vector<Strophe> LoadCorpus(const CorpusOptions& o) {
  std::vector<Strophe> strophes = Ingest(CorpusPath(o.corpus));
  if (o.min_scheme_count > 0) strophes = FilterRareSchemes(strophes, o.min_scheme_count);
  return strophes;
}

Split LoadSplit(const CorpusOptions& o) {
  const std::vector<Strophe> strophes = LoadCorpus(o);
  auto [train, test] = verseforge::Split(strophes, o.test_fraction, o.seed);
  return {std::move(train), std::move(test)};
}

json CorpusConfig(const CorpusOptions& o) {
  return {{"corpus", o.corpus},
          {"min_scheme_count", o.min_scheme_count},
          {"test_fraction", o.test_fraction},
          {"seed", o.seed}};
}

void AddCorpusOptions(CLI::App* cmd, CorpusOptions& o) {
  cmd->add_option("--corpus", o.corpus, "Corpus JSONL path or `fixture`")->required();
  cmd->add_option("--min-scheme-count", o.min_scheme_count,
                  "Drop strophes whose scheme occurs fewer times");
  cmd->add_option("--test-fraction", o.test_fraction, "Held-out share of strophes")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", o.seed, "Seed for the train/test split");
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json StatsJson(const CorpusStats& s) {
  json schemes = json::object();
  for (const auto& [k, v] : s.scheme_counts) schemes[k] = v;
  json meters = json::object();
  for (const auto& [k, v] : s.meter_counts) meters[std::string(1, k)] = v;
  json years = json::object();
  for (const auto& [k, v] : s.year_counts) years[k] = v;
  return {{"poems", s.poems},      {"strophes", s.strophes}, {"verses", s.verses},
          {"schemes", schemes},    {"meters", meters},       {"years", years}};
}

template <typename Key>
void PrintTable(std::ostream& out, const std::string& title,
                const std::map<Key, std::size_t>& counts, std::size_t total,
                std::size_t top) {
  std::vector<std::pair<std::string, std::size_t>> rows;
  for (const auto& [k, v] : counts) {
    std::ostringstream key;
    key << k;
    rows.emplace_back(key.str(), v);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  out << title << "\tcount\tshare\n";
  for (std::size_t i = 0; i < rows.size() && (top == 0 || i < top); ++i) {
    const double share = total == 0 ? 0.0 : 100.0 * rows[i].second / total;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", share);
    out << rows[i].first << '\t' << rows[i].second << '\t' << buf << '\n';
  }
}

// Requests --------------------------------------------------------------

json RequestJson(const Strophe& strophe) {
  json meters = json::array();
  for (const Verse& v : strophe.verses) meters.push_back(std::string(1, ToChar(v.gold_meter)));
  return {{"scheme", strophe.scheme.letters()},
          {"year", strophe.year_bucket.ToString()},
          {"meters", meters},
          {"strophe_meter", std::string(1, ToChar(formats::ModalMeter(strophe.verses)))}};
}

std::vector<MeterLabel> ParseMeterList(const std::string& csv) {
  std::vector<MeterLabel> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(ParseMeter(item));
  return out;
}

YearBucket ParseYear(const json& year) {
  if (year.is_null()) return {};
  if (year.is_number_integer()) return BucketizeYear(year.get<int>());
  if (year.is_string()) return YearBucket::Parse(year.get<std::string>());
  throw InvariantError("year", "must be an integer, a bucket string or null");
}

generation::GenerationRequest RequestFromJson(const json& j, std::size_t line_no) {
  if (!j.is_object()) throw ParseError(line_no, "request is not an object");
  generation::GenerationRequest r;
  if (!j.contains("scheme") || !j["scheme"].is_string()) {
    throw ParseError(line_no, "request field 'scheme' missing or not a string");
  }
  r.scheme = RhymeScheme::Parse(j["scheme"].get<std::string>());
  if (j.contains("year")) r.year = ParseYear(j["year"]);
  if (j.contains("meters")) {
    const json& m = j["meters"];
    if (m.is_string()) {
      r.verse_meters = ParseMeterList(m.get<std::string>());
    } else if (m.is_array()) {
      for (const json& e : m) {
        if (!e.is_string()) throw ParseError(line_no, "meters entries must be strings");
        r.verse_meters.push_back(ParseMeter(e.get<std::string>()));
      }
    } else if (!m.is_null()) {
      throw ParseError(line_no, "request field 'meters' must be a list or string");
    }
  }
  if (j.contains("strophe_meter") && !j["strophe_meter"].is_null()) {
    if (!j["strophe_meter"].is_string()) {
      throw ParseError(line_no, "request field 'strophe_meter' must be a string");
    }
    r.strophe_meter = ParseMeter(j["strophe_meter"].get<std::string>());
  }
  return r;
}

std::vector<generation::GenerationRequest> LoadRequests(const fs::path& path) {
  const std::string text = ReadFile(path);
  std::vector<generation::GenerationRequest> out;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (utf8::Trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    out.push_back(RequestFromJson(j, line_no));
  }
  return out;
}

// Generations file ------------------------------------------------------

struct GenerationBlock {
  std::string text;
  std::vector<bool> forced;
};

std::string BlockLine(std::size_t index, const generation::GeneratedStrophe& g) {
  std::string forced;
  for (bool f : g.forced) forced += f ? '1' : '0';
  if (forced.empty()) forced = "-";
  return std::string(kBlockPrefix) + std::to_string(index) + " forced=" + forced +
         " retries=" + std::to_string(g.retries) +
         " truncated=" + (g.truncated ? "1" : "0");
}

void WriteBlock(std::ostream& out, const std::string& block_line, std::string text) {
  if (!text.empty() && text.back() != '\n') text += '\n';
  out << block_line << '\n' << text;
}

std::vector<GenerationBlock> ReadGenerations(const fs::path& path) {
  const std::string text = ReadFile(path);
  std::vector<GenerationBlock> out;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (line.rfind(kBlockPrefix, 0) == 0) {
      GenerationBlock block;
      std::stringstream fields(line.substr(kBlockPrefix.size()));
      std::string field;
      fields >> field;  // index
      while (fields >> field) {
        if (field.rfind("forced=", 0) != 0) continue;
        const std::string flags = field.substr(7);
        if (flags == "-") continue;
        for (char c : flags) {
          if (c != '0' && c != '1') throw ParseError(line_no, "bad forced flags");
          block.forced.push_back(c == '1');
        }
      }
      out.push_back(std::move(block));
      continue;
    }
    if (out.empty()) {
      if (line.rfind("# ", 0) == 0 || utf8::Trim(line).empty()) continue;
      throw ParseError(line_no, "text before the first strophe block");
    }
    out.back().text += line;
    out.back().text += '\n';
  }
  return out;
}

// Subcommands -----------------------------------------------------------

struct IngestOptions {
  CorpusOptions corpus;
  std::string stats_out;
  std::string requests_out;
  std::string gold_out;
  std::string format = "meter_verse";
};

int RunIngest(const IngestOptions& o) {
  const std::vector<Strophe> all = LoadCorpus(o.corpus);
  const CorpusStats stats = ComputeStats(all);
  std::cout << "poems: " << stats.poems << "\nstrophes: " << stats.strophes
            << "\nverses: " << stats.verses << '\n';
  json config = CorpusConfig(o.corpus);
  config["subcommand"] = "ingest";
  config["format"] = o.format;
  if (!o.stats_out.empty()) {
    json record = StatsJson(stats);
    record["config"] = config;
    OpenOut(o.stats_out) << record.dump(2) << '\n';
  }
  if (o.requests_out.empty() && o.gold_out.empty()) return kExitOk;

  const auto [train, test] = verseforge::Split(all, o.corpus.test_fraction, o.corpus.seed);
  std::cout << "test strophes: " << test.size() << '\n';
  if (!o.requests_out.empty()) {
    std::ofstream out = OpenOut(o.requests_out);
    for (const Strophe& s : test) out << RequestJson(s).dump() << '\n';
  }
  if (!o.gold_out.empty()) {
    const formats::DataFormat format = formats::ParseDataFormat(o.format);
    std::ofstream out = OpenOut(o.gold_out);
    out << "# gold strophes from the held-out split\n" << kRunPrefix << config.dump() << '\n';
    const std::size_t fields = formats::VerseFieldCount(format);
    for (std::size_t i = 0; i < test.size(); ++i) {
      std::string flags = fields == 0 ? "-" : std::string(test[i].verses.size(), '0');
      WriteBlock(out,
                 std::string(kBlockPrefix) + std::to_string(i + 1) + " forced=" + flags +
                     " retries=0 truncated=0",
                 formats::Encode(test[i], format));
    }
  }
  return kExitOk;
}

struct StatsOptions {
  CorpusOptions corpus;
  std::size_t top = 10;
};

int RunStats(const StatsOptions& o) {
  const CorpusStats s = ComputeStats(LoadCorpus(o.corpus));
  std::cout << "poems\t" << s.poems << "\nstrophes\t" << s.strophes << "\nverses\t"
            << s.verses << "\n\n";
  PrintTable(std::cout, "scheme", s.scheme_counts, s.strophes, o.top);
  std::cout << '\n';
  PrintTable(std::cout, "meter", s.meter_counts, s.verses, 0);
  std::cout << '\n';
  PrintTable(std::cout, "year", s.year_counts, s.strophes, 0);
  return kExitOk;
}

std::vector<std::string> TrainingLines(std::span<const Strophe> strophes,
                                       formats::DataFormat format) {
  std::vector<std::string> lines;
  for (const Strophe& s : strophes) {
    std::stringstream ss(formats::Encode(s, format));
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
  }
  return lines;
}

struct TrainTokenizerOptions {
  CorpusOptions corpus;
  std::string kind = "our";
  std::string format = "meter_verse";
  std::size_t vocab_size = 2000;
  std::string base_vocab;
  std::string out;
};

int RunTrainTokenizer(const TrainTokenizerOptions& o) {
  const tokenizers::TokenizerKind kind = tokenizers::ParseTokenizerKind(o.kind);
  const formats::DataFormat format = formats::ParseDataFormat(o.format);
  json config = CorpusConfig(o.corpus);
  config["subcommand"] = "train-tokenizer";
  config["kind"] = tokenizers::ToString(kind);
  config["format"] = formats::ToString(format);

  std::optional<tokenizers::Vocab> vocab;
  if (kind == tokenizers::TokenizerKind::kBase) {
    if (o.base_vocab.empty()) {
      throw InvariantError("base-vocab", "BASE needs a pretrained vocab file");
    }
    vocab = tokenizers::Vocab::Load(fs::path(o.base_vocab));
    vocab->set_kind(kind);
    config["base_vocab"] = o.base_vocab;
  } else {
    const Split split = LoadSplit(o.corpus);
    const std::vector<std::string> lines = TrainingLines(split.train, format);
    std::vector<std::string> schemes, years;
    for (const Strophe& s : split.train) {
      schemes.push_back(s.scheme.letters());
      years.push_back(s.year_bucket.ToString());
    }
    std::sort(schemes.begin(), schemes.end());
    schemes.erase(std::unique(schemes.begin(), schemes.end()), schemes.end());
    std::sort(years.begin(), years.end());
    years.erase(std::unique(years.begin(), years.end()), years.end());
    const std::vector<std::string> specials = tokenizers::AnnotationTokens(schemes, years);
    switch (kind) {
      case tokenizers::TokenizerKind::kOur:
        config["vocab_size"] = o.vocab_size;
        vocab = tokenizers::TrainBpe(lines, o.vocab_size, specials);
        break;
      case tokenizers::TokenizerKind::kSyllable:
        vocab = tokenizers::BuildSyllableVocab(lines, specials);
        break;
      default:
        vocab = tokenizers::BuildUnicodeVocab(lines);
        break;
    }
  }
  vocab->Save(fs::path(o.out), config.dump());
  std::cout << "kind: " << tokenizers::ToString(kind) << "\nvocab size: " << vocab->size()
            << '\n';
  return kExitOk;
}

std::vector<std::vector<tokenizers::TokenId>> EncodeStrophes(
    std::span<const Strophe> strophes, formats::DataFormat format,
    const tokenizers::Tokenizer& tokenizer) {
  std::vector<std::vector<tokenizers::TokenId>> out;
  out.reserve(strophes.size());
  for (const Strophe& s : strophes) out.push_back(tokenizer.Encode(formats::Encode(s, format)).ids);
  return out;
}

struct TrainLmOptions {
  CorpusOptions corpus;
  std::string vocab;
  std::string format = "meter_verse";
  int order = 0;
  double discount = 0.75;
  std::string out;
};

int RunTrainLm(const TrainLmOptions& o) {
  const formats::DataFormat format = formats::ParseDataFormat(o.format);
  tokenizers::Vocab vocab = tokenizers::Vocab::Load(fs::path(o.vocab));
  const tokenizers::Tokenizer tokenizer(vocab);
  lm::NGramOptions options;
  options.order = o.order > 0 ? o.order : lm::DefaultOrder(vocab.kind());
  options.discount = o.discount;

  const Split split = LoadSplit(o.corpus);
  const auto train = EncodeStrophes(split.train, format, tokenizer);
  const lm::NGramModel model =
      lm::NGramModel::Train(train, vocab.size(), vocab.eos(), vocab.Hash(), options);

  json config = CorpusConfig(o.corpus);
  config["subcommand"] = "train-lm";
  config["vocab"] = o.vocab;
  config["format"] = formats::ToString(format);
  config["order"] = options.order;
  config["discount"] = options.discount;
  model.Save(fs::path(o.out), config.dump());

  std::cout << "train strophes: " << train.size() << "\norder: " << options.order
            << "\ncontexts: " << model.context_count() << '\n';
  if (!split.test.empty()) {
    const auto test = EncodeStrophes(split.test, format, tokenizer);
    std::cout << "test perplexity: " << lm::Perplexity(model, test, vocab.eos()) << '\n';
  }
  return kExitOk;
}

struct GenerateOptions {
  std::string model;
  std::string vocab;
  std::string format = "meter_verse";
  std::string decoding = "forced";
  std::string scheme;
  std::string year = "NaN";
  std::string meters;
  std::string strophe_meter;
  std::string requests;
  std::size_t count = 1;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_tokens = 2048;
  std::string out;
};

int RunGenerate(const GenerateOptions& o) {
  const formats::DataFormat format = formats::ParseDataFormat(o.format);
  const generation::Decoding decoding = generation::ParseDecoding(o.decoding);
  tokenizers::Vocab vocab = tokenizers::Vocab::Load(fs::path(o.vocab));
  const lm::NGramModel model = lm::NGramModel::Load(fs::path(o.model), vocab);
  const tokenizers::Tokenizer tokenizer(std::move(vocab));

  std::vector<generation::GenerationRequest> requests;
  if (!o.requests.empty()) {
    requests = LoadRequests(o.requests);
  } else {
    if (o.scheme.empty()) throw InvariantError("scheme", "give --scheme or --requests");
    json j = {{"scheme", o.scheme}, {"year", o.year}};
    if (!o.meters.empty()) j["meters"] = o.meters;
    if (!o.strophe_meter.empty()) j["strophe_meter"] = o.strophe_meter;
    requests.assign(o.count, RequestFromJson(j, 0));
  }

  json config = {{"subcommand", "generate"},   {"model", o.model},
                 {"vocab", o.vocab},           {"format", formats::ToString(format)},
                 {"decoding", generation::ToString(decoding)},
                 {"temperature", o.temperature}, {"seed", o.seed},
                 {"max_tokens", o.max_tokens}};
  if (!o.requests.empty()) {
    config["requests"] = o.requests;
  } else {
    config["scheme"] = o.scheme;
    config["year"] = o.year;
    config["meters"] = o.meters;
    config["strophe_meter"] = o.strophe_meter;
    config["count"] = o.count;
  }

  std::ostringstream buf;
  buf << kMachineLabel << '\n' << kRunPrefix << config.dump() << '\n';
  std::size_t failures = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    generation::GenerationRequest r = requests[i];
    r.format = format;
    r.temperature = o.temperature;
    r.seed = o.seed + i;
    r.max_tokens = o.max_tokens;
    const generation::GeneratedStrophe g = generation::Generate(model, tokenizer, r, decoding);
    failures += !g.ok();
    WriteBlock(buf, BlockLine(i + 1, g), g.raw_text);
  }
  if (o.out.empty()) {
    std::cout << buf.str();
  } else {
    OpenOut(o.out) << buf.str();
  }
  std::cerr << "generated " << requests.size() << " strophes, " << failures
            << " failed to parse\n";
  return kExitOk;
}

json RatioJson(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json ReportJson(const validation::MetricsReport& r) {
  return {{"strophes", r.strophes},
          {"parse_failures", r.parse_failures},
          {"annotated_verses", r.annotated_verses},
          {"syllable_hits", r.syllable_hits},
          {"ending_hits", r.ending_hits},
          {"unique_strophes", r.unique_strophes},
          {"unique_sum", r.unique_sum},
          {"rhyme_hits", r.rhyme_hits},
          {"meter_hits", r.meter_hits},
          {"meter_verses", r.meter_verses},
          {"meter_verse_hits", r.meter_verse_hits},
          {"forced_verses", r.forced_verses},
          {"forced_ending_hits", r.forced_ending_hits},
          {"first_of_letter_verses", r.first_of_letter_verses},
          {"first_of_letter_ending_hits", r.first_of_letter_ending_hits},
          {"num_syl", RatioJson(r.num_syl())},
          {"end_acc", RatioJson(r.end_acc())},
          {"unique", RatioJson(r.unique())},
          {"rhyme_acc", RatioJson(r.rhyme_acc())},
          {"meter_acc", RatioJson(r.meter_acc())},
          {"verse_meter_acc", RatioJson(r.verse_meter_acc())},
          {"forced_end_acc", RatioJson(r.forced_end_acc())},
          {"first_of_letter_end_acc", RatioJson(r.first_of_letter_end_acc())}};
}

struct EvaluateOptions {
  std::string format = "meter_verse";
  std::string requests;
  std::string generations;
  std::string report;
  std::string unit_scores;
  double threshold = validation::kDefaultMeterThreshold;
};

int RunEvaluate(const EvaluateOptions& o) {
  const formats::DataFormat format = formats::ParseDataFormat(o.format);
  const auto requests = LoadRequests(o.requests);
  const auto blocks = ReadGenerations(o.generations);
  if (blocks.size() != requests.size()) {
    throw ParseError(0, "generations file has " + std::to_string(blocks.size()) +
                            " strophes but " + std::to_string(requests.size()) +
                            " requests");
  }
  std::vector<validation::EvalUnit> units;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    validation::EvalUnit u;
    u.request = requests[i];
    u.request.format = format;
    u.forced = blocks[i].forced;
    try {
      u.parsed = formats::Parse(blocks[i].text, format);
    } catch (const Error&) {
      u.parsed.reset();
    }
    units.push_back(std::move(u));
  }
  validation::EvalOptions options;
  options.meter_threshold = o.threshold;
  const validation::MetricsReport report =
      validation::Evaluate(units, phonology::DefaultPhonology(), options);
  std::cout << report.ToText();

  json config = {{"subcommand", "evaluate"},      {"format", formats::ToString(format)},
                 {"requests", o.requests},        {"generations", o.generations},
                 {"meter_threshold", o.threshold}};
  if (!o.report.empty()) {
    json record = ReportJson(report);
    record["config"] = config;
    OpenOut(o.report) << record.dump(2) << '\n';
  }
  if (!o.unit_scores.empty()) {
    std::ofstream out = OpenOut(o.unit_scores);
    for (std::size_t i = 0; i < units.size(); ++i) {
      const auto r = validation::Evaluate(std::span(&units[i], 1),
                                          phonology::DefaultPhonology(), options);
      json j = {{"index", i + 1},
                {"parsed", units[i].parsed.has_value()},
                {"num_syl", RatioJson(r.num_syl())},
                {"end_acc", RatioJson(r.end_acc())},
                {"unique", RatioJson(r.unique())},
                {"rhyme", RatioJson(r.rhyme_acc())},
                {"meter", RatioJson(r.meter_acc())},
                {"verse_meter", RatioJson(r.verse_meter_acc())}};
      out << j.dump() << '\n';
    }
  }
  return kExitOk;
}

std::vector<std::optional<double>> LoadScores(const fs::path& path, const std::string& metric) {
  const std::string text = ReadFile(path);
  std::vector<std::optional<double>> out;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (utf8::Trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains(metric)) {
      throw ParseError(line_no, "missing metric '" + metric + "'");
    }
    const json& v = j[metric];
    if (v.is_null()) {
      out.emplace_back();
    } else if (v.is_number()) {
      out.emplace_back(v.get<double>());
    } else {
      throw ParseError(line_no, "metric '" + metric + "' is not a number");
    }
  }
  return out;
}

struct SignificanceOptions {
  std::string a;
  std::string b;
  std::string metric = "rhyme";
  std::size_t repetitions = 100;
  std::uint64_t seed = 0;
};

int RunSignificance(const SignificanceOptions& o) {
  const auto a = LoadScores(o.a, o.metric);
  const auto b = LoadScores(o.b, o.metric);
  if (a.size() != b.size()) {
    throw SchemaMismatch("score files have " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " units");
  }
  std::vector<double> va, vb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) {
      va.push_back(*a[i]);
      vb.push_back(*b[i]);
    }
  }
  if (va.empty()) throw InvariantError("metric", "no unit has a score in both files");
  const double p = validation::PermutationTest(va, vb, o.repetitions, o.seed);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    ma += va[i];
    mb += vb[i];
  }
  std::cout << "metric: " << o.metric << "\npaired units: " << va.size()
            << "\nmean a: " << ma / va.size() << "\nmean b: " << mb / vb.size()
            << "\np value: " << p << '\n';
  return kExitOk;
}

int ReportError(const char* kind, const std::string& what, int code) {
  std::string msg = what;
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  std::cerr << "error[" << kind << "]: " << msg << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verseforge: Czech strophe modeling, generation and evaluation"};
  app.footer(kHelpFooter);
  app.require_subcommand(1);

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate a corpus and export stats, requests, gold");
  AddCorpusOptions(c_ingest, ingest.corpus);
  c_ingest->add_option("--stats-out", ingest.stats_out, "Write corpus stats as JSON");
  c_ingest->add_option("--requests-out", ingest.requests_out,
                       "Write held-out strophe annotations as a requests file");
  c_ingest->add_option("--gold-out", ingest.gold_out,
                       "Write held-out strophes as a generations file");
  c_ingest->add_option("--format", ingest.format, "Format of --gold-out");

  StatsOptions stats;
  auto* c_stats = app.add_subcommand("stats", "Print scheme, meter and year distributions");
  AddCorpusOptions(c_stats, stats.corpus);
  c_stats->add_option("--top", stats.top, "Number of schemes to list (0 for all)");

  TrainTokenizerOptions tok;
  auto* c_tok = app.add_subcommand("train-tokenizer", "Build a vocab on the training split");
  AddCorpusOptions(c_tok, tok.corpus);
  c_tok->add_option("--kind", tok.kind, "base, our, syllable or unicode");
  c_tok->add_option("--format", tok.format, "basic, verse_par or meter_verse");
  c_tok->add_option("--vocab-size", tok.vocab_size, "BPE vocab size for `our`");
  c_tok->add_option("--base-vocab", tok.base_vocab, "Pretrained vocab file for `base`");
  c_tok->add_option("--out", tok.out, "Vocab output path")->required();

  TrainLmOptions lmo;
  auto* c_lm = app.add_subcommand("train-lm", "Train an n-gram model on the training split");
  AddCorpusOptions(c_lm, lmo.corpus);
  c_lm->add_option("--vocab", lmo.vocab, "Vocab file")->required();
  c_lm->add_option("--format", lmo.format, "basic, verse_par or meter_verse");
  c_lm->add_option("--order", lmo.order, "N-gram order (default by tokenizer kind)");
  c_lm->add_option("--discount", lmo.discount, "Absolute discount")
      ->check(CLI::Range(0.0, 0.999999));
  c_lm->add_option("--out", lmo.out, "Model output path")->required();

  GenerateOptions gen;
  auto* c_gen = app.add_subcommand("generate", "Generate strophes");
  c_gen->add_option("--model", gen.model, "Model file")->required();
  c_gen->add_option("--vocab", gen.vocab, "Vocab file")->required();
  c_gen->add_option("--format", gen.format, "basic, verse_par or meter_verse");
  c_gen->add_option("--decoding", gen.decoding, "basic or forced");
  c_gen->add_option("--scheme", gen.scheme, "Rhyme scheme, e.g. ABAB");
  c_gen->add_option("--year", gen.year, "Year bucket, e.g. 1900, or NaN");
  c_gen->add_option("--meters", gen.meters, "Per-verse meters, e.g. J,J,J,J");
  c_gen->add_option("--strophe-meter", gen.strophe_meter, "Header meter");
  c_gen->add_option("--count", gen.count, "Strophes to generate for one request");
  c_gen->add_option("--requests", gen.requests, "Requests file (JSONL)");
  c_gen->add_option("--temperature", gen.temperature, "Sampling temperature")
      ->check(CLI::PositiveNumber);
  c_gen->add_option("--seed", gen.seed, "Seed; request i uses seed + i");
  c_gen->add_option("--max-tokens", gen.max_tokens, "Sampled-token budget per strophe");
  c_gen->add_option("--out", gen.out, "Output path (default stdout)");

  EvaluateOptions ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score generations against requests");
  c_ev->add_option("--format", ev.format, "basic, verse_par or meter_verse");
  c_ev->add_option("--requests", ev.requests, "Requests file (JSONL)")->required();
  c_ev->add_option("--generations", ev.generations, "Generations file")->required();
  c_ev->add_option("--report", ev.report, "Write the report as JSON");
  c_ev->add_option("--unit-scores", ev.unit_scores, "Write per-strophe scores (JSONL)");
  c_ev->add_option("--meter-threshold", ev.threshold, "Meter acceptance threshold")
      ->check(CLI::Range(0.0, 1.0));

  SignificanceOptions sig;
  auto* c_sig = app.add_subcommand("significance", "Paired permutation test on unit scores");
  c_sig->add_option("--a", sig.a, "Unit scores of system A")->required();
  c_sig->add_option("--b", sig.b, "Unit scores of system B")->required();
  c_sig->add_option("--metric", sig.metric,
                    "num_syl, end_acc, unique, rhyme, meter or verse_meter");
  c_sig->add_option("--repetitions", sig.repetitions, "Random relabelings")
      ->check(CLI::PositiveNumber);
  c_sig->add_option("--seed", sig.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return ReportError("usage", e.what(), kExitUsage);
  }

  try {
    if (c_ingest->parsed()) return RunIngest(ingest);
    if (c_stats->parsed()) return RunStats(stats);
    if (c_tok->parsed()) return RunTrainTokenizer(tok);
    if (c_lm->parsed()) return RunTrainLm(lmo);
    if (c_gen->parsed()) return RunGenerate(gen);
    if (c_ev->parsed()) return RunEvaluate(ev);
    if (c_sig->parsed()) return RunSignificance(sig);
  } catch (const IoError& e) {
    return ReportError("io", e.what(), kExitIo);
  } catch (const ParseError& e) {
    return ReportError("parse", e.what(), kExitParse);
  } catch (const SchemaMismatch& e) {
    return ReportError("schema", e.what(), kExitSchema);
  } catch (const InvariantError& e) {
    return ReportError("invariant", e.what(), kExitInvariant);
  } catch (const std::exception& e) {
    return ReportError("other", e.what(), kExitOther);
  }
  return kExitOther;
}
