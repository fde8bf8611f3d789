#include "propsel/synthetic.hpp"

#include "propsel/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace propsel {

namespace {

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

nlohmann::json generate_synthetic(const SyntheticOptions& o) {
  if (o.questions <= 0 || o.passages <= 0 || o.sentences_per_passage <= 0 || o.marker_pairs < 2 ||
      o.filler_vocabulary <= 0 || o.min_sentence_length < 1 || o.max_sentence_length < o.min_sentence_length)
    throw std::invalid_argument("generate_synthetic: invalid options");
  const int total = o.passages * o.sentences_per_passage;
  if (o.supporting < 1 || o.supporting > total) throw std::invalid_argument("generate_synthetic: bad supporting count");

  Rng rng(o.seed);
  auto filler = [&] { return "w" + std::to_string(uniform_int(rng, 0, o.filler_vocabulary - 1)); };
  auto sentence_body = [&] {
    std::vector<std::string> words(static_cast<std::size_t>(uniform_int(rng, o.min_sentence_length, o.max_sentence_length)));
    for (auto& w : words) w = filler();
    return words;
  };
  auto insert_at_random = [&](std::vector<std::string>& words, const std::string& token) {
    const auto pos = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(words.size())));
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), token);
  };

  nlohmann::json records = nlohmann::json::array();
  for (int q = 0; q < o.questions; ++q) {
    const int pair = uniform_int(rng, 0, o.marker_pairs - 1);
    const std::string cue = "cue" + std::to_string(pair);
    const std::string marker = o.shared_token ? cue : "mark" + std::to_string(pair);

    std::vector<std::string> question(static_cast<std::size_t>(o.question_length));
    for (auto& w : question) w = filler();
    insert_at_random(question, cue);

    std::vector<int> slots(static_cast<std::size_t>(total));
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);
    std::vector<bool> is_support(static_cast<std::size_t>(total), false);
    for (int i = 0; i < o.supporting; ++i) is_support[static_cast<std::size_t>(slots[static_cast<std::size_t>(i)])] = true;

    nlohmann::json context = nlohmann::json::array();
    nlohmann::json facts = nlohmann::json::array();
    for (int p = 0; p < o.passages; ++p) {
      const std::string title = "Q" + std::to_string(q) + " passage " + std::to_string(p);
      nlohmann::json sents = nlohmann::json::array();
      for (int s = 0; s < o.sentences_per_passage; ++s) {
        auto words = sentence_body();
        if (is_support[static_cast<std::size_t>(p * o.sentences_per_passage + s)]) {
          insert_at_random(words, marker);
          facts.push_back({title, s});
        } else if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < o.distractor_marker_rate) {
          int other = uniform_int(rng, 0, o.marker_pairs - 2);
          if (other >= pair) ++other;
          insert_at_random(words, o.shared_token ? "cue" + std::to_string(other) : "mark" + std::to_string(other));
        }
        sents.push_back(join(words) + " .");
      }
      context.push_back({title, std::move(sents)});
    }
    records.push_back({{"_id", "synth-" + std::to_string(q)},
                       {"question", join(question) + " ?"},
                       {"answer", "yes"},
                       {"context", std::move(context)},
                       {"supporting_facts", std::move(facts)}});
  }
  return records;
}

}  // namespace propsel
