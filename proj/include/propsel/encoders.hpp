#pragma once

#include "propsel/corpus.hpp"
#include "propsel/tensor.hpp"

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace propsel {

enum class EmbedderKind { trainable_lookup, static_file, contextual_precomputed };
enum class EncoderKind { recurrent, average, precomputed_sentence };

std::string_view to_string(EmbedderKind kind);
std::string_view to_string(EncoderKind kind);
EmbedderKind parse_embedder_kind(std::string_view name);
EncoderKind parse_encoder_kind(std::string_view name);

/// Identifies a node's text inside a precomputed store: "example_id/node_index"
/// with node 0 the question and 1..n the sentences in global order.
struct NodeKey {
  std::string example_id;
  int node_index = 0;
  std::string str() const { return example_id + "/" + std::to_string(node_index); }
};

/// Maps a token sequence to a (length x d) matrix, one row per token.
class WordEmbedder {
 public:
  virtual ~WordEmbedder() = default;
  virtual EmbedderKind kind() const = 0;
  virtual int dim() const = 0;
  virtual Matrix embed(const TokenSeq& tokens, const NodeKey& key) const = 0;
  /// Accumulates d(loss)/d(rows of embed()). No-op for frozen embedders.
  virtual void backward(const TokenSeq& /*tokens*/, const NodeKey& /*key*/, const Matrix& /*grad_rows*/) {}
  virtual void collect_parameters(ParameterRefs& /*out*/) {}
};

class TrainableLookup final : public WordEmbedder {
 public:
  TrainableLookup(std::shared_ptr<const Vocabulary> vocab, int dim, Rng& rng);

  EmbedderKind kind() const override { return EmbedderKind::trainable_lookup; }
  int dim() const override { return static_cast<int>(table_.value.cols()); }
  Matrix embed(const TokenSeq& tokens, const NodeKey& key) const override;
  void backward(const TokenSeq& tokens, const NodeKey& key, const Matrix& grad_rows) override;
  void collect_parameters(ParameterRefs& out) override { out.push_back(&table_); }

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  Parameter table_;  // vocabulary size x d
};

/// Frozen vectors from a text file: one line per token, the token followed by
/// d whitespace-separated decimals. Unknown tokens use the `<unk>` entry when
/// the file has one, otherwise the zero vector.
class StaticVectors final : public WordEmbedder {
 public:
  /// `expected_dim` of 0 accepts whatever width the first line has.
  static StaticVectors load(std::istream& in, int expected_dim = 0);
  static StaticVectors load_file(const std::string& path, int expected_dim = 0);

  EmbedderKind kind() const override { return EmbedderKind::static_file; }
  int dim() const override { return dim_; }
  Matrix embed(const TokenSeq& tokens, const NodeKey& key) const override;
  std::size_t size() const { return vectors_.size(); }

 private:
  int dim_ = 0;
  std::unordered_map<std::string, Vector> vectors_;
  Vector unk_;
};

/// Precomputed contextual vectors. JSON-lines, one record per node:
///   {"key": "ex1/3", "tokens": [[...], ...]}   per-token vectors (dim d)
///   {"key": "ex1/3", "sentence": [...]}       one sentence vector (dim d')
class EmbeddingStore {
 public:
  static EmbeddingStore load(std::istream& in, int expected_dim = 0);
  static EmbeddingStore load_file(const std::string& path, int expected_dim = 0);

  void insert_tokens(const std::string& key, Matrix rows);
  void insert_sentence(const std::string& key, Vector v);

  const Matrix& token_vectors(const std::string& key) const;
  const Vector& sentence_vector(const std::string& key) const;
  int dim() const { return dim_; }

 private:
  void check_dim(Eigen::Index d, const std::string& key);

  int dim_ = 0;
  std::unordered_map<std::string, Matrix> tokens_;
  std::unordered_map<std::string, Vector> sentences_;
};

/// Returns the stored per-token rows for the node; the surface tokens are not
/// consulted, so the store's own tokenisation is authoritative.
class ContextualEmbedder final : public WordEmbedder {
 public:
  explicit ContextualEmbedder(std::shared_ptr<const EmbeddingStore> store) : store_(std::move(store)) {}
  EmbedderKind kind() const override { return EmbedderKind::contextual_precomputed; }
  int dim() const override { return store_->dim(); }
  Matrix embed(const TokenSeq& tokens, const NodeKey& key) const override;

 private:
  std::shared_ptr<const EmbeddingStore> store_;
};

/// Intermediate values of one encode() call, consumed by backward().
struct EncoderTrace {
  Matrix inputs;      // len x d, after input dropout
  Matrix input_mask;  // len x d, empty when dropout is off
  std::vector<Vector> hidden;  // len + 1 states, hidden[0] = 0
  std::vector<Vector> update_gate;
  std::vector<Vector> reset_gate;
  std::vector<Vector> candidate;
};

/// Reduces a (length x d) token matrix to a single node vector.
class NodeEncoder {
 public:
  virtual ~NodeEncoder() = default;
  virtual EncoderKind kind() const = 0;
  virtual int output_dim() const = 0;
  /// `dropout_rng` null means inference mode.
  virtual Vector encode(const Matrix& tokens, const NodeKey& key, EncoderTrace* trace,
                        Rng* dropout_rng) const = 0;
  /// Accumulates parameter gradients and returns d(loss)/d(tokens).
  virtual Matrix backward(const EncoderTrace& trace, const Vector& grad_out) = 0;
  virtual void collect_parameters(ParameterRefs& /*out*/) {}
};

/// Forward GRU; the node vector is the last hidden state.
///   z = sigmoid(Wz x + Uz h + bz)      r = sigmoid(Wr x + Ur h + br)
///   n = tanh(Wn x + Un (r * h) + bn)   h' = (1 - z) * n + z * h
/// Hidden-to-hidden matrices start orthogonal.
class GruEncoder final : public NodeEncoder {
 public:
  GruEncoder(int input_dim, int hidden_dim, double input_dropout, Rng& rng);

  EncoderKind kind() const override { return EncoderKind::recurrent; }
  int output_dim() const override { return static_cast<int>(bias_z.value.rows()); }
  int input_dim() const { return static_cast<int>(input_z.value.cols()); }
  Vector encode(const Matrix& tokens, const NodeKey& key, EncoderTrace* trace, Rng* dropout_rng) const override;
  Matrix backward(const EncoderTrace& trace, const Vector& grad_out) override;
  void collect_parameters(ParameterRefs& out) override;

  double input_dropout = 0.0;
  Parameter input_z, input_r, input_n;     // d' x d
  Parameter hidden_z, hidden_r, hidden_n;  // d' x d'
  Parameter bias_z, bias_r, bias_n;        // d' x 1
};

/// Column-wise mean of the token rows.
class AverageEncoder final : public NodeEncoder {
 public:
  explicit AverageEncoder(int dim) : dim_(dim) {}
  EncoderKind kind() const override { return EncoderKind::average; }
  int output_dim() const override { return dim_; }
  Vector encode(const Matrix& tokens, const NodeKey& key, EncoderTrace* trace, Rng* dropout_rng) const override;
  Matrix backward(const EncoderTrace& trace, const Vector& grad_out) override;

 private:
  int dim_;
};

/// Looks the node vector up by key and ignores the token matrix.
class PrecomputedSentenceEncoder final : public NodeEncoder {
 public:
  explicit PrecomputedSentenceEncoder(std::shared_ptr<const EmbeddingStore> store) : store_(std::move(store)) {}
  EncoderKind kind() const override { return EncoderKind::precomputed_sentence; }
  int output_dim() const override { return store_->dim(); }
  Vector encode(const Matrix& tokens, const NodeKey& key, EncoderTrace* trace, Rng* dropout_rng) const override;
  Matrix backward(const EncoderTrace& trace, const Vector& grad_out) override;

 private:
  std::shared_ptr<const EmbeddingStore> store_;
};

}  // namespace propsel
