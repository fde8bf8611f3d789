#include "propsel/encoders.hpp"

#include "propsel/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace propsel {

std::string_view to_string(EmbedderKind kind) {
  switch (kind) {
    case EmbedderKind::trainable_lookup: return "trainable";
    case EmbedderKind::static_file: return "static";
    case EmbedderKind::contextual_precomputed: return "contextual";
  }
  return "?";
}

std::string_view to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::recurrent: return "recurrent";
    case EncoderKind::average: return "average";
    case EncoderKind::precomputed_sentence: return "precomputed";
  }
  return "?";
}

EmbedderKind parse_embedder_kind(std::string_view name) {
  for (auto k : {EmbedderKind::trainable_lookup, EmbedderKind::static_file, EmbedderKind::contextual_precomputed})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown embedder '" + std::string(name) + "' (expected trainable|static|contextual)");
}

EncoderKind parse_encoder_kind(std::string_view name) {
  for (auto k : {EncoderKind::recurrent, EncoderKind::average, EncoderKind::precomputed_sentence})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown encoder '" + std::string(name) + "' (expected recurrent|average|precomputed)");
}

// ---- embedders ---------------------------------------------------------------

TrainableLookup::TrainableLookup(std::shared_ptr<const Vocabulary> vocab, int dim, Rng& rng)
    : vocab_(std::move(vocab)),
      table_("embedding", uniform_init(static_cast<Eigen::Index>(vocab_->size()), dim, 0.1, rng)) {}

Matrix TrainableLookup::embed(const TokenSeq& tokens, const NodeKey&) const {
  Matrix out(static_cast<Eigen::Index>(tokens.size()), dim());
  for (std::size_t t = 0; t < tokens.size(); ++t)
    out.row(static_cast<Eigen::Index>(t)) = table_.value.row(static_cast<Eigen::Index>(vocab_->index_of(tokens[t])));
  return out;
}

void TrainableLookup::backward(const TokenSeq& tokens, const NodeKey&, const Matrix& grad_rows) {
  for (std::size_t t = 0; t < tokens.size(); ++t)
    table_.grad.row(static_cast<Eigen::Index>(vocab_->index_of(tokens[t]))) +=
        grad_rows.row(static_cast<Eigen::Index>(t));
}

StaticVectors StaticVectors::load(std::istream& in, int expected_dim) {
  StaticVectors sv;
  sv.dim_ = expected_dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    double x;
    while (fields >> x) values.push_back(x);
    if (!fields.eof()) throw DataError("static vectors line " + std::to_string(lineno) + ": non-numeric value");
    if (sv.dim_ == 0) sv.dim_ = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != sv.dim_)
      throw ConfigError("static vectors line " + std::to_string(lineno) + ": expected " + std::to_string(sv.dim_) +
                        " values, found " + std::to_string(values.size()));
    sv.vectors_[token] = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  if (sv.dim_ == 0) throw DataError("static vector file is empty");
  auto unk = sv.vectors_.find(std::string(Vocabulary::kUnkToken));
  sv.unk_ = unk != sv.vectors_.end() ? unk->second : Vector::Zero(sv.dim_);
  return sv;
}

StaticVectors StaticVectors::load_file(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open static vector file " + path);
  return load(in, expected_dim);
}

Matrix StaticVectors::embed(const TokenSeq& tokens, const NodeKey&) const {
  Matrix out(static_cast<Eigen::Index>(tokens.size()), dim_);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    auto it = vectors_.find(tokens[t]);
    out.row(static_cast<Eigen::Index>(t)) = (it == vectors_.end() ? unk_ : it->second).transpose();
  }
  return out;
}

void EmbeddingStore::check_dim(Eigen::Index d, const std::string& key) {
  if (dim_ == 0) dim_ = static_cast<int>(d);
  if (d != dim_)
    throw ConfigError("embedding store entry '" + key + "' has dimension " + std::to_string(d) + ", expected " +
                      std::to_string(dim_));
}

void EmbeddingStore::insert_tokens(const std::string& key, Matrix rows) {
  check_dim(rows.cols(), key);
  tokens_[key] = std::move(rows);
}

void EmbeddingStore::insert_sentence(const std::string& key, Vector v) {
  check_dim(v.size(), key);
  sentences_[key] = std::move(v);
}

EmbeddingStore EmbeddingStore::load(std::istream& in, int expected_dim) {
  EmbeddingStore store;
  store.dim_ = expected_dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("key"))
      throw DataError("embedding store line " + std::to_string(lineno) + " is malformed");
    const auto key = j["key"].get<std::string>();
    if (j.contains("tokens")) {
      const auto rows = j["tokens"].get<std::vector<std::vector<double>>>();
      if (rows.empty()) throw DataError("embedding store entry '" + key + "' has no token vectors");
      Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size())
          throw DataError("embedding store entry '" + key + "' has ragged rows");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
      store.insert_tokens(key, std::move(m));
    } else if (j.contains("sentence")) {
      const auto v = j["sentence"].get<std::vector<double>>();
      store.insert_sentence(key, Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    } else {
      throw DataError("embedding store entry '" + key + "' has neither 'tokens' nor 'sentence'");
    }
  }
  return store;
}

EmbeddingStore EmbeddingStore::load_file(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding store " + path);
  return load(in, expected_dim);
}

const Matrix& EmbeddingStore::token_vectors(const std::string& key) const {
  auto it = tokens_.find(key);
  if (it == tokens_.end()) throw LookupError("no token vectors for node key '" + key + "'");
  return it->second;
}

const Vector& EmbeddingStore::sentence_vector(const std::string& key) const {
  auto it = sentences_.find(key);
  if (it == sentences_.end()) throw LookupError("no sentence vector for node key '" + key + "'");
  return it->second;
}

Matrix ContextualEmbedder::embed(const TokenSeq&, const NodeKey& key) const {
  return store_->token_vectors(key.str());
}

// ---- node encoders -------------------------------------------------------------

namespace {

Vector sigmoid(const Vector& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

void require_rows(const Matrix& tokens) {
  if (tokens.rows() == 0) throw std::invalid_argument("encode_node: empty token matrix");
}

}  // namespace

GruEncoder::GruEncoder(int input_dim, int hidden_dim, double dropout, Rng& rng)
    : input_dropout(dropout),
      input_z("gru.input_z", glorot_init(hidden_dim, input_dim, rng)),
      input_r("gru.input_r", glorot_init(hidden_dim, input_dim, rng)),
      input_n("gru.input_n", glorot_init(hidden_dim, input_dim, rng)),
      hidden_z("gru.hidden_z", orthogonal_init(hidden_dim, rng)),
      hidden_r("gru.hidden_r", orthogonal_init(hidden_dim, rng)),
      hidden_n("gru.hidden_n", orthogonal_init(hidden_dim, rng)),
      bias_z("gru.bias_z", Matrix::Zero(hidden_dim, 1)),
      bias_r("gru.bias_r", Matrix::Zero(hidden_dim, 1)),
      bias_n("gru.bias_n", Matrix::Zero(hidden_dim, 1)) {}

void GruEncoder::collect_parameters(ParameterRefs& out) {
  for (auto* p : {&input_z, &input_r, &input_n, &hidden_z, &hidden_r, &hidden_n, &bias_z, &bias_r, &bias_n})
    out.push_back(p);
}

Vector GruEncoder::encode(const Matrix& tokens, const NodeKey&, EncoderTrace* trace, Rng* dropout_rng) const {
  require_rows(tokens);
  if (tokens.cols() != input_dim())
    throw ConfigError("GRU expects " + std::to_string(input_dim()) + "-dimensional tokens, got " +
                      std::to_string(tokens.cols()));
  Matrix inputs = tokens;
  Matrix mask;
  if (dropout_rng && input_dropout > 0.0) {
    mask = dropout_mask(tokens.rows(), tokens.cols(), input_dropout, *dropout_rng);
    inputs = inputs.cwiseProduct(mask);
  }
  const Eigen::Index hdim = output_dim();
  Vector h = Vector::Zero(hdim);
  if (trace) {
    trace->hidden.assign(1, h);
    trace->update_gate.clear();
    trace->reset_gate.clear();
    trace->candidate.clear();
  }
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    const Vector x = inputs.row(t).transpose();
    const Vector z = sigmoid(input_z.value * x + hidden_z.value * h + bias_z.value.col(0));
    const Vector r = sigmoid(input_r.value * x + hidden_r.value * h + bias_r.value.col(0));
    const Vector n =
        (input_n.value * x + hidden_n.value * r.cwiseProduct(h) + bias_n.value.col(0)).array().tanh().matrix();
    h = (Vector::Ones(hdim) - z).cwiseProduct(n) + z.cwiseProduct(h);
    if (trace) {
      trace->update_gate.push_back(z);
      trace->reset_gate.push_back(r);
      trace->candidate.push_back(n);
      trace->hidden.push_back(h);
    }
  }
  if (trace) {
    trace->inputs = std::move(inputs);
    trace->input_mask = std::move(mask);
  }
  return h;
}

Matrix GruEncoder::backward(const EncoderTrace& trace, const Vector& grad_out) {
  const Eigen::Index len = trace.inputs.rows();
  Matrix grad_inputs = Matrix::Zero(len, trace.inputs.cols());
  Vector dh = grad_out;
  for (Eigen::Index t = len - 1; t >= 0; --t) {
    const auto ti = static_cast<std::size_t>(t);
    const Vector& h_prev = trace.hidden[ti];
    const Vector& z = trace.update_gate[ti];
    const Vector& r = trace.reset_gate[ti];
    const Vector& n = trace.candidate[ti];
    const Vector x = trace.inputs.row(t).transpose();

    const Vector dn = dh.cwiseProduct(Vector::Ones(z.size()) - z);
    const Vector dz = dh.cwiseProduct(h_prev - n);
    Vector dh_prev = dh.cwiseProduct(z);

    const Vector da_n = dn.cwiseProduct((1.0 - n.array().square()).matrix());
    const Vector rh = r.cwiseProduct(h_prev);
    input_n.grad += da_n * x.transpose();
    hidden_n.grad += da_n * rh.transpose();
    bias_n.grad.col(0) += da_n;
    const Vector drh = hidden_n.value.transpose() * da_n;
    Vector dx = input_n.value.transpose() * da_n;
    dh_prev += drh.cwiseProduct(r);

    const Vector da_r = drh.cwiseProduct(h_prev).cwiseProduct((r.array() * (1.0 - r.array())).matrix());
    input_r.grad += da_r * x.transpose();
    hidden_r.grad += da_r * h_prev.transpose();
    bias_r.grad.col(0) += da_r;
    dx += input_r.value.transpose() * da_r;
    dh_prev += hidden_r.value.transpose() * da_r;

    const Vector da_z = dz.cwiseProduct((z.array() * (1.0 - z.array())).matrix());
    input_z.grad += da_z * x.transpose();
    hidden_z.grad += da_z * h_prev.transpose();
    bias_z.grad.col(0) += da_z;
    dx += input_z.value.transpose() * da_z;
    dh_prev += hidden_z.value.transpose() * da_z;

    grad_inputs.row(t) = dx.transpose();
    dh = dh_prev;
  }
  if (trace.input_mask.size() > 0) grad_inputs = grad_inputs.cwiseProduct(trace.input_mask);
  return grad_inputs;
}

Vector AverageEncoder::encode(const Matrix& tokens, const NodeKey&, EncoderTrace* trace, Rng*) const {
  require_rows(tokens);
  if (tokens.cols() != dim_)
    throw ConfigError("average encoder expects " + std::to_string(dim_) + "-dimensional tokens");
  if (trace) trace->inputs = tokens;
  return tokens.colwise().mean().transpose();
}

Matrix AverageEncoder::backward(const EncoderTrace& trace, const Vector& grad_out) {
  const auto len = trace.inputs.rows();
  return (grad_out / static_cast<double>(len)).transpose().replicate(len, 1);
}

Vector PrecomputedSentenceEncoder::encode(const Matrix& tokens, const NodeKey& key, EncoderTrace* trace, Rng*) const {
  if (trace) trace->inputs = Matrix::Zero(tokens.rows(), tokens.cols());
  return store_->sentence_vector(key.str());
}

Matrix PrecomputedSentenceEncoder::backward(const EncoderTrace& trace, const Vector&) {
  return Matrix::Zero(trace.inputs.rows(), trace.inputs.cols());
}

}  // namespace propsel
