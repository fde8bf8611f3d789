#include "propsel/corpus.hpp"

#include "propsel/errors.hpp"
#include "propsel/hash.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace propsel {

using nlohmann::json;

std::size_t Example::sentence_count() const {
  std::size_t n = 0;
  for (const auto& p : passages) n += p.sentences.size();
  return n;
}

std::vector<std::size_t> Example::passage_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(passages.size());
  for (const auto& p : passages) sizes.push_back(p.sentences.size());
  return sizes;
}

const TokenSeq& Example::sentence(std::size_t global_index) const {
  for (const auto& p : passages) {
    if (global_index < p.sentences.size()) return p.sentences[global_index];
    global_index -= p.sentences.size();
  }
  throw std::out_of_range("sentence index out of range in example " + id);
}

std::size_t Example::positive_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void validate(const Example& ex) {
  if (ex.passages.empty()) throw DataError("example " + ex.id + " has no passages");
  for (const auto& p : ex.passages) {
    if (p.sentences.empty())
      throw DataError("example " + ex.id + ": passage '" + p.title + "' has no sentences");
    for (const auto& s : p.sentences)
      if (s.empty()) throw DataError("example " + ex.id + ": empty sentence in '" + p.title + "'");
  }
  if (ex.question.empty()) throw DataError("example " + ex.id + " has an empty question");
  if (ex.labels.size() != ex.sentence_count())
    throw DataError("example " + ex.id + ": label count does not match sentence count");
}

TokenSeq tokenize(std::string_view text, const TokenizerOptions& options) {
  TokenSeq tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      current.push_back(options.lowercase && c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return tokens;
}

void StatsAccumulator::add(const Example& ex) {
  ++questions_;
  passages_ += ex.passages.size();
  sentences_ += ex.sentence_count();
  supporting_ += ex.positive_count();
  question_tokens_ += ex.question.size();
  for (const auto& p : ex.passages)
    for (const auto& s : p.sentences) sentence_tokens_ += s.size();
}

CorpusStats StatsAccumulator::result() const {
  CorpusStats s;
  s.n_questions = questions_;
  s.n_sentences = sentences_;
  if (questions_ == 0) return s;
  const auto q = static_cast<double>(questions_);
  s.passages_per_question = static_cast<double>(passages_) / q;
  s.sentences_per_passage = passages_ ? static_cast<double>(sentences_) / static_cast<double>(passages_) : 0.0;
  s.sentences_per_question = static_cast<double>(sentences_) / q;
  s.supporting_per_question = static_cast<double>(supporting_) / q;
  s.avg_tokens_question = static_cast<double>(question_tokens_) / q;
  s.avg_tokens_sentence =
      sentences_ ? static_cast<double>(sentence_tokens_) / static_cast<double>(sentences_) : 0.0;
  return s;
}

CorpusStats compute_stats(const std::vector<Example>& examples) {
  if (examples.empty()) throw DataError("compute_stats: empty example list");
  std::size_t passages = 0, sentences = 0, supporting = 0, q_tokens = 0, s_tokens = 0;
  for (const auto& ex : examples) {
    passages += ex.passages.size();
    for (const auto& p : ex.passages) {
      sentences += p.sentences.size();
      for (const auto& s : p.sentences) s_tokens += s.size();
    }
    supporting += ex.positive_count();
    q_tokens += ex.question.size();
  }
  const auto q = static_cast<double>(examples.size());
  CorpusStats s;
  s.n_questions = examples.size();
  s.n_sentences = sentences;
  s.passages_per_question = static_cast<double>(passages) / q;
  s.sentences_per_passage = static_cast<double>(sentences) / static_cast<double>(passages);
  s.sentences_per_question = static_cast<double>(sentences) / q;
  s.supporting_per_question = static_cast<double>(supporting) / q;
  s.avg_tokens_question = static_cast<double>(q_tokens) / q;
  s.avg_tokens_sentence = static_cast<double>(s_tokens) / static_cast<double>(sentences);
  return s;
}

namespace {

// Sentences that tokenize to nothing keep their slot so supporting-fact
// indices stay aligned with the raw file.
constexpr std::string_view kEmptySentenceToken = "<empty>";

std::string record_id(const json& rec, std::size_t index) {
  if (rec.is_object()) {
    for (const char* key : {"_id", "id"}) {
      auto it = rec.find(key);
      if (it != rec.end() && it->is_string()) return it->get<std::string>();
    }
  }
  return "#" + std::to_string(index);
}

Example convert_record(const json& rec, std::size_t index, const IngestOptions& options) {
  const std::string id = record_id(rec, index);
  auto fail = [&](const std::string& msg) -> IngestError {
    return IngestError("record " + id + " (index " + std::to_string(index) + "): " + msg, id);
  };
  if (!rec.is_object()) throw fail("record is not an object");
  for (const char* key : {"question", "context", "supporting_facts"})
    if (!rec.contains(key)) throw fail(std::string("missing field '") + key + "'");
  if (!rec["question"].is_string()) throw fail("'question' must be a string");
  if (!rec["context"].is_array()) throw fail("'context' must be an array");
  if (!rec["supporting_facts"].is_array()) throw fail("'supporting_facts' must be an array");

  Example ex;
  ex.id = id;
  ex.question = tokenize(rec["question"].get<std::string>(), options.tokenizer);
  if (ex.question.empty()) throw fail("question is empty after tokenization");

  std::unordered_map<std::string, std::size_t> passage_of_title;
  for (const auto& entry : rec["context"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_array())
      throw fail("context entries must be [title, [sentences...]]");
    Passage p;
    p.title = entry[0].get<std::string>();
    for (const auto& raw : entry[1]) {
      if (!raw.is_string()) throw fail("sentence in '" + p.title + "' is not a string");
      TokenSeq toks = tokenize(raw.get<std::string>(), options.tokenizer);
      if (toks.empty()) toks.emplace_back(kEmptySentenceToken);
      p.sentences.push_back(std::move(toks));
    }
    if (p.sentences.empty()) throw fail("passage '" + p.title + "' has no sentences");
    passage_of_title.emplace(p.title, ex.passages.size());
    ex.passages.push_back(std::move(p));
  }
  if (ex.passages.empty()) throw fail("no passages");

  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& p : ex.passages) {
    offsets.push_back(total);
    total += p.sentences.size();
  }
  ex.labels.assign(total, 0);
  for (const auto& fact : rec["supporting_facts"]) {
    if (!fact.is_array() || fact.size() != 2 || !fact[0].is_string() || !fact[1].is_number_integer())
      throw fail("supporting_facts entries must be [title, sentence_index]");
    const auto title = fact[0].get<std::string>();
    const auto it = passage_of_title.find(title);
    if (it == passage_of_title.end()) throw fail("supporting fact references unknown title '" + title + "'");
    const auto sent = fact[1].get<long long>();
    const auto& passage = ex.passages[it->second];
    if (sent < 0 || static_cast<std::size_t>(sent) >= passage.sentences.size())
      throw fail("supporting fact index " + std::to_string(sent) + " out of range for '" + title + "'");
    ex.labels[offsets[it->second] + static_cast<std::size_t>(sent)] = 1;
  }
  if (ex.positive_count() == 0) throw fail("no supporting sentences (zero positives)");
  return ex;
}

}  // namespace

IngestResult ingest(const json& records, const IngestOptions& options) {
  if (!records.is_array()) throw ParseError("corpus root must be a JSON array", 0);
  IngestResult result;
  StatsAccumulator stats;
  std::size_t index = 0;
  for (const auto& rec : records) {
    try {
      Example ex = convert_record(rec, index, options);
      stats.add(ex);
      result.examples.push_back(std::move(ex));
    } catch (const IngestError& e) {
      if (options.strict) throw;
      result.warnings.push_back(std::string("skipped ") + e.what());
    }
    ++index;
  }
  result.streaming_stats = stats.result();
  return result;
}

IngestResult ingest(std::istream& in, const IngestOptions& options) {
  // Count completed top-level records so a syntax error can name the record
  // it occurred in.
  std::size_t completed = 0;
  json::parser_callback_t track = [&completed](int depth, json::parse_event_t event, json&) {
    if (depth == 1 && (event == json::parse_event_t::object_end || event == json::parse_event_t::array_end))
      ++completed;
    return true;
  };
  json records;
  try {
    records = json::parse(in, track);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON in record " + std::to_string(completed) + ": " + e.what(), completed);
  }
  return ingest(records, options);
}

Vocabulary::Vocabulary() {
  tokens_.emplace_back(kUnkToken);
  index_.emplace(std::string(kUnkToken), 0);
}

Vocabulary Vocabulary::from_frequencies(const std::map<std::string, std::size_t>& counts,
                                        std::size_t min_frequency) {
  if (min_frequency < 1) throw ConfigError("min_frequency must be >= 1");
  if (counts.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [tok, n] : counts)
    if (n >= min_frequency && tok != kUnkToken) kept.emplace_back(tok, n);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary v;
  v.min_frequency_ = min_frequency;
  for (auto& [tok, n] : kept) {
    v.index_.emplace(tok, v.tokens_.size());
    v.tokens_.push_back(tok);
  }
  for (const auto& [tok, n] : counts) v.frequencies_.emplace(tok, n);
  return v;
}

Vocabulary Vocabulary::build(const std::vector<Example>& examples, std::size_t min_frequency) {
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : examples) {
    for (const auto& t : ex.question) ++counts[t];
    for (const auto& p : ex.passages)
      for (const auto& s : p.sentences)
        for (const auto& t : s) ++counts[t];
  }
  return from_frequencies(counts, min_frequency);
}

std::size_t Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? unk_index() : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

std::size_t Vocabulary::frequency(std::string_view token) const {
  auto it = frequencies_.find(token);
  return it == frequencies_.end() ? 0 : it->second;
}

std::string Vocabulary::hash() const {
  std::string joined;
  for (const auto& t : tokens_) {
    joined += t;
    joined.push_back('\n');
  }
  return sha256_hex(joined);
}

json Vocabulary::to_json() const {
  json freq = json::object();
  for (const auto& [tok, n] : frequencies_) freq[tok] = n;
  return json{{"format_version", kCacheFormatVersion},
              {"min_frequency", min_frequency_},
              {"tokens", tokens_},
              {"frequencies", std::move(freq)},
              {"hash", hash()}};
}

Vocabulary Vocabulary::from_json(const json& j) {
  if (j.value("format_version", 0) != kCacheFormatVersion)
    throw DataError("unsupported vocabulary format version");
  const auto tokens = j.at("tokens").get<std::vector<std::string>>();
  if (tokens.empty() || tokens.front() != kUnkToken) throw DataError("vocabulary must start with the UNK token");
  Vocabulary v;
  v.min_frequency_ = j.at("min_frequency").get<std::size_t>();
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (!v.index_.emplace(tokens[i], i).second) throw DataError("duplicate vocabulary token " + tokens[i]);
    v.tokens_.push_back(tokens[i]);
  }
  if (j.contains("frequencies"))
    for (const auto& [tok, n] : j["frequencies"].items()) v.frequencies_.emplace(tok, n.get<std::size_t>());
  if (j.contains("hash") && j["hash"].get<std::string>() != v.hash())
    throw DataError("vocabulary hash mismatch");
  return v;
}

json example_to_json(const Example& ex) {
  json passages = json::array();
  for (const auto& p : ex.passages) passages.push_back({{"title", p.title}, {"sentences", p.sentences}});
  return json{{"id", ex.id}, {"question", ex.question}, {"passages", std::move(passages)}, {"labels", ex.labels}};
}

Example example_from_json(const json& j) {
  Example ex;
  ex.id = j.at("id").get<std::string>();
  ex.question = j.at("question").get<TokenSeq>();
  for (const auto& p : j.at("passages"))
    ex.passages.push_back({p.at("title").get<std::string>(), p.at("sentences").get<std::vector<TokenSeq>>()});
  ex.labels = j.at("labels").get<Labels>();
  validate(ex);
  return ex;
}

json stats_to_json(const CorpusStats& s) {
  return json{{"n_questions", s.n_questions},
              {"n_sentences", s.n_sentences},
              {"passages_per_question", s.passages_per_question},
              {"sentences_per_passage", s.sentences_per_passage},
              {"sentences_per_question", s.sentences_per_question},
              {"supporting_per_question", s.supporting_per_question},
              {"avg_tokens_question", s.avg_tokens_question},
              {"avg_tokens_sentence", s.avg_tokens_sentence}};
}

CorpusStats stats_from_json(const json& j) {
  CorpusStats s;
  s.n_questions = j.at("n_questions").get<std::size_t>();
  s.n_sentences = j.at("n_sentences").get<std::size_t>();
  s.passages_per_question = j.at("passages_per_question").get<double>();
  s.sentences_per_passage = j.at("sentences_per_passage").get<double>();
  s.sentences_per_question = j.at("sentences_per_question").get<double>();
  s.supporting_per_question = j.at("supporting_per_question").get<double>();
  s.avg_tokens_question = j.at("avg_tokens_question").get<double>();
  s.avg_tokens_sentence = j.at("avg_tokens_sentence").get<double>();
  return s;
}

void write_example_cache(std::ostream& out, const std::vector<Example>& examples) {
  out << json{{"format_version", kCacheFormatVersion}, {"kind", "example_cache"}, {"count", examples.size()}}.dump()
      << '\n';
  for (const auto& ex : examples) out << example_to_json(ex).dump() << '\n';
}

std::vector<Example> read_example_cache(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("example cache is empty");
  const json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("kind", "") != "example_cache")
    throw DataError("example cache header missing");
  if (header.value("format_version", 0) != kCacheFormatVersion)
    throw DataError("unsupported example cache format version " + header.value("format_version", json(0)).dump());
  std::vector<Example> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError("example cache line " + std::to_string(lineno) + " is not valid JSON");
    out.push_back(example_from_json(j));
  }
  if (header.contains("count") && header["count"].get<std::size_t>() != out.size())
    throw DataError("example cache is truncated");
  return out;
}

}  // namespace propsel
