#include "verseforge/language_model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "verseforge/error.h"

namespace verseforge::lm {

namespace {

constexpr std::string_view kMagic = "@verseforge-ngram";
constexpr int kVersion = 1;

std::string PackKey(std::span<const TokenId> ids) {
  std::string key;
  for (TokenId id : ids) {
    auto v = static_cast<std::uint32_t>(id);
    while (v >= 0x80) {
      key.push_back(static_cast<char>((v & 0x7F) | 0x80));
      v >>= 7;
    }
    key.push_back(static_cast<char>(v));
  }
  return key;
}

std::vector<TokenId> UnpackKey(std::string_view key) {
  std::vector<TokenId> ids;
  std::uint32_t v = 0;
  int shift = 0;
  for (char c : key) {
    const auto b = static_cast<unsigned char>(c);
    v |= static_cast<std::uint32_t>(b & 0x7F) << shift;
    if (b & 0x80) {
      shift += 7;
    } else {
      ids.push_back(static_cast<TokenId>(v));
      v = 0;
      shift = 0;
    }
  }
  return ids;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) return out;
    start = tab + 1;
  }
}

}  // namespace

int DefaultOrder(tokenizers::TokenizerKind kind) {
  switch (kind) {
    case tokenizers::TokenizerKind::kUnicode: return 8;
    case tokenizers::TokenizerKind::kSyllable: return 4;
    default: return 3;
  }
}

const NGramModel::Node* NGramModel::Find(std::span<const TokenId> context) const {
  const auto it = nodes_.find(PackKey(context));
  return it == nodes_.end() ? nullptr : &it->second;
}

void NGramModel::Add(std::span<const TokenId> context, TokenId token,
                     std::uint32_t n) {
  Node& node = nodes_[PackKey(context)];
  node.total += n;
  auto it = std::lower_bound(
      node.next.begin(), node.next.end(), token,
      [](const auto& entry, TokenId t) { return entry.first < t; });
  if (it != node.next.end() && it->first == token) {
    it->second += n;
  } else {
    node.next.insert(it, {token, n});
  }
}

NGramModel NGramModel::Train(std::span<const std::vector<TokenId>> sequences,
                             std::size_t vocab_size, TokenId eos,
                             std::uint64_t vocab_hash, NGramOptions options) {
  if (options.order < 1) throw InvariantError("order", "must be at least 1");
  if (!(options.discount >= 0.0 && options.discount < 1.0)) {
    throw InvariantError("discount", "must lie in [0, 1)");
  }
  if (sequences.empty()) throw InvariantError("corpus", "no training sequences");
  if (eos < 0 || static_cast<std::size_t>(eos) >= vocab_size) {
    throw InvariantError("eos", "id outside the vocabulary");
  }
  NGramModel m;
  m.order_ = options.order;
  m.discount_ = options.discount;
  m.vocab_size_ = vocab_size;
  m.eos_ = eos;
  m.vocab_hash_ = vocab_hash;

  std::vector<TokenId> padded;
  for (const auto& seq : sequences) {
    padded.assign(1, eos);
    for (TokenId id : seq) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
        throw InvariantError("sequence", "token id " + std::to_string(id) +
                                             " outside the vocabulary");
      }
      padded.push_back(id);
    }
    padded.push_back(eos);
    for (std::size_t i = 1; i < padded.size(); ++i) {
      const std::size_t longest =
          std::min<std::size_t>(i, static_cast<std::size_t>(m.order_ - 1));
      for (std::size_t k = 0; k <= longest; ++k) {
        m.Add(std::span(padded).subspan(i - k, k), padded[i], 1);
      }
    }
  }
  return m;
}

std::vector<double> NGramModel::NextDist(std::span<const TokenId> context) const {
  std::vector<double> p(vocab_size_, 1.0 / static_cast<double>(vocab_size_));
  const std::size_t longest =
      std::min(context.size(), static_cast<std::size_t>(order_ - 1));
  for (std::size_t k = 0; k <= longest; ++k) {
    const Node* node = Find(context.subspan(context.size() - k, k));
    if (node == nullptr) break;  // longer suffixes are unseen as well
    const double c = static_cast<double>(node->total);
    const double lambda =
        discount_ * static_cast<double>(node->next.size()) / c;
    for (double& x : p) x *= lambda;
    for (const auto& [token, count] : node->next) {
      p[token] += std::max(static_cast<double>(count) - discount_, 0.0) / c;
    }
  }
  return p;
}

std::uint64_t NGramModel::Count(std::span<const TokenId> context,
                                TokenId token) const {
  const Node* node = Find(context);
  if (node == nullptr) return 0;
  auto it = std::lower_bound(
      node->next.begin(), node->next.end(), token,
      [](const auto& entry, TokenId t) { return entry.first < t; });
  return it != node->next.end() && it->first == token ? it->second : 0;
}

double NGramModel::MaxLikelihood(std::span<const TokenId> context,
                                 TokenId token) const {
  const Node* node = Find(context);
  if (node == nullptr || node->total == 0) return 0.0;
  return static_cast<double>(Count(context, token)) /
         static_cast<double>(node->total);
}

void NGramModel::Save(std::ostream& out, std::string_view config_json) const {
  if (config_json.find('\n') != std::string_view::npos) {
    throw InvariantError("config", "must be a single line");
  }
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << vocab_hash_;
  std::ostringstream discount;
  discount << std::setprecision(17) << discount_;
  out << kMagic << '\t' << kVersion << '\n'
      << "@order\t" << order_ << '\n'
      << "@discount\t" << discount.str() << '\n'
      << "@vocab-size\t" << vocab_size_ << '\n'
      << "@vocab-hash\t" << hash.str() << '\n'
      << "@eos\t" << eos_ << '\n';
  if (!config_json.empty()) out << "@config\t" << config_json << '\n';
  out << "@contexts\t" << nodes_.size() << '\n';

  std::map<std::vector<TokenId>, const Node*> sorted;
  for (const auto& [key, node] : nodes_) sorted.emplace(UnpackKey(key), &node);
  std::string line;
  for (const auto& [ids, node] : sorted) {
    line.clear();
    if (ids.empty()) line = "-";
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) line += ' ';
      line += std::to_string(ids[i]);
    }
    line += '\t';
    for (std::size_t i = 0; i < node->next.size(); ++i) {
      if (i > 0) line += ' ';
      line += std::to_string(node->next[i].first);
      line += ':';
      line += std::to_string(node->next[i].second);
    }
    line += '\n';
    out << line;
  }
  out << "@end\n";
  if (!out) throw IoError("failed to write model");
}

void NGramModel::Save(const std::filesystem::path& path,
                      std::string_view config_json) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  Save(out, config_json);
}

NGramModel NGramModel::Load(std::istream& in) {
  NGramModel m;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };
  auto parse_u64 = [&](const std::string& s, int base = 10) -> std::uint64_t {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used, base);
      if (used != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad number '" + s + "'");
    }
  };

  if (!next_line()) throw ParseError(1, "empty model file");
  {
    const auto f = SplitTabs(line);
    if (f.size() != 2 || f[0] != kMagic) throw ParseError(line_no, "not a verseforge model file");
    if (f[1] != std::to_string(kVersion)) {
      throw SchemaMismatch("unsupported model file version " + f[1]);
    }
  }
  std::size_t expected_contexts = 0;
  bool have_contexts = false;
  while (!have_contexts) {
    if (!next_line()) throw ParseError(line_no, "truncated model header");
    const auto f = SplitTabs(line);
    if (f.size() != 2) throw ParseError(line_no, "malformed header field");
    if (f[0] == "@order") {
      m.order_ = static_cast<int>(parse_u64(f[1]));
    } else if (f[0] == "@discount") {
      try {
        m.discount_ = std::stod(f[1]);
      } catch (const std::exception&) {
        throw ParseError(line_no, "bad discount");
      }
    } else if (f[0] == "@vocab-size") {
      m.vocab_size_ = parse_u64(f[1]);
    } else if (f[0] == "@vocab-hash") {
      m.vocab_hash_ = parse_u64(f[1], 16);
    } else if (f[0] == "@eos") {
      m.eos_ = static_cast<TokenId>(parse_u64(f[1]));
    } else if (f[0] == "@config") {
      // Informational only.
    } else if (f[0] == "@contexts") {
      expected_contexts = parse_u64(f[1]);
      have_contexts = true;
    } else {
      throw ParseError(line_no, "unknown header field '" + f[0] + "'");
    }
  }
  if (m.order_ < 1 || m.vocab_size_ == 0 || !(m.discount_ >= 0 && m.discount_ < 1)) {
    throw ParseError(line_no, "invalid model parameters");
  }

  bool ended = false;
  std::vector<TokenId> ids;
  while (next_line()) {
    if (line == "@end") {
      ended = true;
      break;
    }
    const auto f = SplitTabs(line);
    if (f.size() != 2) throw ParseError(line_no, "malformed count line");
    ids.clear();
    if (f[0] != "-") {
      std::istringstream ctx(f[0]);
      std::string tok;
      while (ctx >> tok) ids.push_back(static_cast<TokenId>(parse_u64(tok)));
    }
    if (ids.size() >= static_cast<std::size_t>(m.order_)) {
      throw ParseError(line_no, "context longer than order - 1");
    }
    std::istringstream counts(f[1]);
    std::string entry;
    while (counts >> entry) {
      const auto colon = entry.find(':');
      if (colon == std::string::npos) throw ParseError(line_no, "malformed count entry");
      const auto token = parse_u64(entry.substr(0, colon));
      const auto n = parse_u64(entry.substr(colon + 1));
      if (token >= m.vocab_size_ || n == 0 || n > UINT32_MAX) {
        throw ParseError(line_no, "count entry out of range");
      }
      for (TokenId id : ids) {
        if (static_cast<std::size_t>(id) >= m.vocab_size_) {
          throw ParseError(line_no, "context id out of range");
        }
      }
      m.Add(ids, static_cast<TokenId>(token), static_cast<std::uint32_t>(n));
    }
  }
  if (!ended) throw ParseError(line_no, "missing @end");
  if (m.nodes_.size() != expected_contexts) {
    throw ParseError(line_no, "context count does not match header");
  }
  return m;
}

NGramModel NGramModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return Load(in);
}

NGramModel NGramModel::Load(const std::filesystem::path& path,
                            const tokenizers::Vocab& vocab) {
  NGramModel m = Load(path);
  if (m.vocab_hash_ != vocab.Hash() || m.vocab_size_ != vocab.size()) {
    throw SchemaMismatch("model '" + path.string() +
                         "' was trained against a different vocabulary");
  }
  return m;
}

TokenId Sample(const LanguageModel& model, std::span<const TokenId> context,
               double temperature, Rng& rng) {
  if (!(temperature > 0.0)) {
    throw InvariantError("temperature", "must be positive");
  }
  std::vector<double> p = model.NextDist(context);
  double max_log = -INFINITY;
  for (double& x : p) {
    x = x > 0.0 ? std::log(x) / temperature : -INFINITY;
    max_log = std::max(max_log, x);
  }
  double total = 0.0;
  for (double& x : p) {
    x = std::exp(x - max_log);
    total += x;
  }
  const double u = rng.NextDouble() * total;
  double acc = 0.0;
  TokenId last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last_positive = static_cast<TokenId>(i);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

TokenId Sample(const LanguageModel& model, std::span<const TokenId> context,
               double temperature, std::uint64_t seed) {
  Rng rng(seed);
  return Sample(model, context, temperature, rng);
}

double Perplexity(const LanguageModel& model,
                  std::span<const std::vector<TokenId>> sequences, TokenId eos) {
  double neg_log = 0.0;
  std::size_t n = 0;
  std::vector<TokenId> padded;
  for (const auto& seq : sequences) {
    padded.assign(1, eos);
    padded.insert(padded.end(), seq.begin(), seq.end());
    padded.push_back(eos);
    for (std::size_t i = 1; i < padded.size(); ++i) {
      const auto p = model.NextDist(std::span(padded).first(i));
      neg_log -= std::log(p[padded[i]]);
      ++n;
    }
  }
  if (n == 0) throw InvariantError("sequences", "nothing to score");
  return std::exp(neg_log / static_cast<double>(n));
}

}  // namespace verseforge::lm
