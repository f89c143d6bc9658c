#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("verseforge_cli_" + std::string(info->name()) + "_" +
                                        std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunResult Run(const std::string& args) {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" VERSEFORGE_CLI "' " + args +
                            " 2>'" + err.string() + "'";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = Slurp(err);
    return r;
  }

  // Small UNICODE trigram model on the fixture's training split.
  void TrainSmallModel() {
    ASSERT_EQ(Run("train-tokenizer --corpus fixture --kind unicode --out uni.vocab").code, 0);
    ASSERT_EQ(Run("train-lm --corpus fixture --vocab uni.vocab --order 3 --out uni.model").code,
              0);
  }

  fs::path dir_;
};

// Letters by first appearance of each rhyme group; singletons and nulls are X.
std::string TallyScheme(const json& strophe) {
  std::map<long long, int> sizes;
  for (const json& v : strophe) {
    if (!v["rhyme"].is_null()) ++sizes[v["rhyme"].get<long long>()];
  }
  std::map<long long, char> letters;
  std::string out;
  char next = 'A';
  for (const json& v : strophe) {
    if (v["rhyme"].is_null() || sizes[v["rhyme"].get<long long>()] < 2) {
      out += 'X';
      continue;
    }
    const long long g = v["rhyme"].get<long long>();
    if (!letters.count(g)) letters[g] = next++;
    out += letters[g];
  }
  return out;
}

TEST_F(CliTest, StatsTopSchemeMatchesIndependentTally) {
  std::map<std::string, int> counts;
  std::ifstream in(VERSEFORGE_FIXTURE_CORPUS);
  std::string line;
  while (std::getline(in, line)) {
    const json poem = json::parse(line);
    for (const json& s : poem["strophes"]) ++counts[TallyScheme(s)];
  }
  std::string top;
  int best = 0;
  for (const auto& [k, v] : counts) {
    if (v > best) {
      best = v;
      top = k;
    }
  }
  const RunResult r = Run("stats --corpus fixture --top 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("scheme\tcount\tshare\n" + top + "\t" + std::to_string(best) + "\t"),
            std::string::npos)
      << r.out;
}

TEST_F(CliTest, IngestWritesStatsWithConfig) {
  const RunResult r = Run("ingest --corpus fixture --stats-out stats.json");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(Slurp(dir_ / "stats.json"));
  EXPECT_EQ(j["strophes"], 2400);
  EXPECT_EQ(j["config"]["subcommand"], "ingest");
  EXPECT_EQ(j["config"]["corpus"], "fixture");
}

TEST_F(CliTest, EvaluateOnGoldIsPerfect) {
  ASSERT_EQ(Run("ingest --corpus fixture --requests-out req.jsonl --gold-out gold.txt").code, 0);
  const RunResult r =
      Run("evaluate --format meter_verse --requests req.jsonl --generations gold.txt "
          "--report report.json");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("num_syl: 1.0000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("end_acc: 1.0000"), std::string::npos) << r.out;
  const json j = json::parse(Slurp(dir_ / "report.json"));
  EXPECT_EQ(j["num_syl"], 1.0);
  EXPECT_EQ(j["end_acc"], 1.0);
  EXPECT_EQ(j["rhyme_acc"], 1.0);
  EXPECT_EQ(j["parse_failures"], 0);
  EXPECT_EQ(j["strophes"], 240);
  EXPECT_EQ(j["config"]["subcommand"], "evaluate");
}

TEST_F(CliTest, GenerateIsLabeledAndReproducible) {
  TrainSmallModel();
  const std::string args =
      "generate --format meter_verse --scheme ABAB --year 1900 --meters J,J,J,J "
      "--decoding forced --temperature 0.8 --seed 7 --model uni.model --vocab uni.vocab "
      "--count 3";
  const RunResult a = Run(args);
  const RunResult b = Run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("# machine-generated\n# run: {", 0), 0u) << a.out;
  EXPECT_NE(a.out.find("\"seed\":7"), std::string::npos);
  EXPECT_NE(a.out.find("#@ strophe 3 "), std::string::npos);
  EXPECT_NE(a.out.find("# ABAB # 1900\nJ # "), std::string::npos);
  EXPECT_NE(Run(args + " --seed 8").out, a.out);
}

TEST_F(CliTest, GenerateEvaluateSignificancePipeline) {
  TrainSmallModel();
  ASSERT_EQ(Run("ingest --corpus fixture --requests-out req.jsonl --gold-out gold.txt").code, 0);
  ASSERT_EQ(Run("generate --model uni.model --vocab uni.vocab --requests req.jsonl "
                "--decoding forced --seed 3 --out gen.txt")
                .code,
            0);
  const RunResult ev = Run(
      "evaluate --requests req.jsonl --generations gen.txt --report rep.json "
      "--unit-scores gen_units.jsonl");
  ASSERT_EQ(ev.code, 0) << ev.err;
  const json rep = json::parse(Slurp(dir_ / "rep.json"));
  EXPECT_EQ(rep["strophes"], 240);
  ASSERT_EQ(Run("evaluate --requests req.jsonl --generations gold.txt "
                "--unit-scores gold_units.jsonl")
                .code,
            0);

  const RunResult same =
      Run("significance --a gold_units.jsonl --b gold_units.jsonl --metric rhyme");
  ASSERT_EQ(same.code, 0) << same.err;
  EXPECT_NE(same.out.find("p value: 1\n"), std::string::npos) << same.out;

  const RunResult diff = Run(
      "significance --a gold_units.jsonl --b gen_units.jsonl --metric end_acc --seed 1");
  ASSERT_EQ(diff.code, 0) << diff.err;
  EXPECT_NE(diff.out.find("p value: "), std::string::npos);
}

TEST_F(CliTest, ErrorClassesHaveDistinctExitCodes) {
  const RunResult usage = Run("stats --corpus fixture --no-such-flag");
  EXPECT_EQ(usage.code, 2);
  EXPECT_EQ(usage.err.rfind("error[usage]: ", 0), 0u) << usage.err;

  const RunResult io = Run("stats --corpus missing.jsonl");
  EXPECT_EQ(io.code, 3);
  EXPECT_EQ(io.err.rfind("error[io]: ", 0), 0u) << io.err;

  std::ofstream(dir_ / "bad.jsonl") << "{\"year\": 1900, \"strophes\": [[{\"text\"\n";
  const RunResult parse = Run("stats --corpus bad.jsonl");
  EXPECT_EQ(parse.code, 4);
  EXPECT_EQ(parse.err.rfind("error[parse]: ", 0), 0u) << parse.err;

  TrainSmallModel();
  ASSERT_EQ(Run("train-tokenizer --corpus fixture --kind syllable --out syl.vocab").code, 0);
  const RunResult schema = Run("generate --model uni.model --vocab syl.vocab --scheme ABAB");
  EXPECT_EQ(schema.code, 5);
  EXPECT_EQ(schema.err.rfind("error[schema]: ", 0), 0u) << schema.err;

  const RunResult invariant = Run("generate --model uni.model --vocab uni.vocab --scheme ABQB");
  EXPECT_EQ(invariant.code, 6);

  for (const RunResult* r : {&usage, &io, &parse, &schema, &invariant}) {
    EXPECT_EQ(std::count(r->err.begin(), r->err.end(), '\n'), 1) << r->err;
  }
}

TEST_F(CliTest, HelpDocumentsSchemaAndFormats) {
  const RunResult r = Run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* needle : {"\"strophes\"", "\"rhyme\"", "\"meter\"", "BASIC", "VERSE_PAR",
                             "METER_VERSE", "J # 9 # oři #"}) {
    EXPECT_NE(r.out.find(needle), std::string::npos) << needle;
  }
}

TEST_F(CliTest, OurTokenizerVocabCarriesConfig) {
  const RunResult r =
      Run("train-tokenizer --corpus fixture --kind our --vocab-size 400 --out our.vocab");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("vocab size: 400"), std::string::npos) << r.out;
  EXPECT_NE(Slurp(dir_ / "our.vocab").find("train-tokenizer"), std::string::npos);
}

}  // namespace
