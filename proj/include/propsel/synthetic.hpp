#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>

namespace propsel {

/// Generator for a small HotpotQA-format corpus. Each question carries a cue
/// token; its supporting sentences carry the marker paired with that cue,
/// while distractor sentences carry markers of other pairs.
struct SyntheticOptions {
  int questions = 200;
  int passages = 3;
  int sentences_per_passage = 3;
  int supporting = 2;
  int marker_pairs = 10;
  int filler_vocabulary = 40;
  int min_sentence_length = 4;
  int max_sentence_length = 8;
  int question_length = 5;
  /// Probability that a distractor sentence carries a foreign marker.
  double distractor_marker_rate = 0.8;
  /// Put the cue token itself in the supporting sentences instead of a
  /// paired marker.
  bool shared_token = false;
  std::uint64_t seed = 7;
};

/// Returns a JSON array of records with `_id`, `question`, `context` and
/// `supporting_facts`.
nlohmann::json generate_synthetic(const SyntheticOptions& options);

}  // namespace propsel
