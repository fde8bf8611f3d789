#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace propsel {

using TokenSeq = std::vector<std::string>;
using Labels = std::vector<std::uint8_t>;

struct Passage {
  std::string title;
  std::vector<TokenSeq> sentences;
};

/// One question with its passages. Sentences are addressed globally by
/// flattening passages in file order and sentences in passage order; `labels`
/// follows that order.
struct Example {
  std::string id;
  TokenSeq question;
  std::vector<Passage> passages;
  Labels labels;

  std::size_t sentence_count() const;
  std::vector<std::size_t> passage_sizes() const;
  const TokenSeq& sentence(std::size_t global_index) const;
  std::size_t positive_count() const;
};

/// Throws DataError if `ex` breaks an Example invariant.
void validate(const Example& ex);

struct TokenizerOptions {
  bool lowercase = true;
};

/// Lowercases ASCII, isolates ASCII punctuation as standalone tokens, and
/// splits on whitespace. Bytes >= 0x80 are treated as word characters.
TokenSeq tokenize(std::string_view text, const TokenizerOptions& options = {});

struct CorpusStats {
  std::size_t n_questions = 0;
  std::size_t n_sentences = 0;
  double passages_per_question = 0;
  double sentences_per_passage = 0;
  double sentences_per_question = 0;
  double supporting_per_question = 0;
  double avg_tokens_question = 0;
  double avg_tokens_sentence = 0;

  bool operator==(const CorpusStats&) const = default;
};

/// Incremental version of compute_stats, fed one example at a time.
class StatsAccumulator {
 public:
  void add(const Example& ex);
  CorpusStats result() const;

 private:
  std::size_t questions_ = 0;
  std::size_t passages_ = 0;
  std::size_t sentences_ = 0;
  std::size_t supporting_ = 0;
  std::size_t question_tokens_ = 0;
  std::size_t sentence_tokens_ = 0;
};

CorpusStats compute_stats(const std::vector<Example>& examples);

struct IngestOptions {
  /// Strict mode rejects the whole input on the first bad record; lenient
  /// mode skips the record and records a warning.
  bool strict = true;
  TokenizerOptions tokenizer;
};

struct IngestResult {
  std::vector<Example> examples;
  std::vector<std::string> warnings;
  CorpusStats streaming_stats;
};

/// Reads a HotpotQA-format JSON array. Only `_id`, `question`, `context` and
/// `supporting_facts` are consulted.
IngestResult ingest(std::istream& in, const IngestOptions& options = {});
IngestResult ingest(const nlohmann::json& records, const IngestOptions& options = {});

class Vocabulary {
 public:
  static constexpr std::string_view kUnkToken = "<unk>";
  static constexpr std::size_t kDefaultMinFrequency = 12;

  Vocabulary();

  /// Tokens seen fewer than `min_frequency` times map to UNK. Index 0 is UNK;
  /// the rest are ordered by descending frequency, ties lexicographic.
  static Vocabulary build(const std::vector<Example>& examples,
                          std::size_t min_frequency = kDefaultMinFrequency);
  static Vocabulary from_frequencies(const std::map<std::string, std::size_t>& counts,
                                     std::size_t min_frequency);

  std::size_t size() const { return tokens_.size(); }
  std::size_t unk_index() const { return 0; }
  std::size_t index_of(std::string_view token) const;
  const std::string& token_at(std::size_t index) const { return tokens_.at(index); }
  bool contains(std::string_view token) const;
  std::size_t frequency(std::string_view token) const;
  std::size_t min_frequency() const { return min_frequency_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// SHA-256 over the ordered token list; identifies the index assignment.
  std::string hash() const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, std::size_t, std::less<>> frequencies_;
  std::size_t min_frequency_ = 1;
};

inline constexpr int kCacheFormatVersion = 1;

nlohmann::json example_to_json(const Example& ex);
Example example_from_json(const nlohmann::json& j);
nlohmann::json stats_to_json(const CorpusStats& s);
CorpusStats stats_from_json(const nlohmann::json& j);

/// JSON-lines example cache: a header line carrying the format version,
/// then one example per line.
void write_example_cache(std::ostream& out, const std::vector<Example>& examples);
std::vector<Example> read_example_cache(std::istream& in);

}  // namespace propsel
