#include "propsel/encoders.hpp"
#include "propsel/errors.hpp"

#include "gradcheck.hpp"

#include <doctest.h>

#include <sstream>

using namespace propsel;
using propsel::testing::check_gradients;
using propsel::testing::check_input_gradient;

namespace {

Matrix random_tokens(int len, int dim, Rng& rng) { return uniform_init(len, dim, 1.0, rng); }

}  // namespace

TEST_SUITE("encoders") {
  TEST_CASE("one GRU step from the zero state matches the scalar oracle") {
    Rng rng(1);
    GruEncoder gru(2, 2, 0.0, rng);
    gru.input_z.value << 0.2, -0.1, 0.4, 0.3;
    gru.bias_z.value << 0.1, -0.2;
    gru.input_n.value << -0.3, 0.5, 0.6, 0.1;
    gru.bias_n.value << 0.0, 0.05;
    Matrix x(1, 2);
    x << 0.5, -1.0;
    const Vector h = gru.encode(x, {}, nullptr, nullptr);
    CHECK(h(0) == doctest::Approx(-0.24327843198154678).epsilon(1e-12));
    CHECK(h(1) == doctest::Approx(0.1406916928453317).epsilon(1e-12));
  }

  TEST_CASE("hidden-to-hidden matrices start orthogonal") {
    Rng rng(11);
    GruEncoder gru(5, 16, 0.0, rng);
    for (const Parameter* p : {&gru.hidden_z, &gru.hidden_r, &gru.hidden_n}) {
      const Matrix gram = p->value.transpose() * p->value;
      CHECK((gram - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-5);
    }
    const Matrix q = orthogonal_init(7, rng);
    CHECK((q * q.transpose() - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-5);
  }

  TEST_CASE("averaging ignores token order, the GRU does not") {
    Rng rng(3);
    const Matrix tokens = random_tokens(4, 3, rng);
    Matrix reversed = tokens.colwise().reverse();
    AverageEncoder avg(3);
    CHECK((avg.encode(tokens, {}, nullptr, nullptr) - avg.encode(reversed, {}, nullptr, nullptr)).norm() < 1e-14);
    GruEncoder gru(3, 4, 0.0, rng);
    CHECK((gru.encode(tokens, {}, nullptr, nullptr) - gru.encode(reversed, {}, nullptr, nullptr)).norm() > 1e-6);
  }

  TEST_CASE("GRU gradients match finite differences") {
    Rng rng(5);
    GruEncoder gru(3, 4, 0.0, rng);
    Matrix tokens = random_tokens(5, 3, rng);
    const Vector weights = uniform_init(4, 1, 1.0, rng);
    auto loss = [&] { return weights.dot(gru.encode(tokens, {}, nullptr, nullptr)); };
    ParameterRefs params;
    gru.collect_parameters(params);
    CHECK(params.size() == 9);
    Matrix token_grad;
    const auto r = check_gradients(params, loss, [&] {
      EncoderTrace trace;
      gru.encode(tokens, {}, &trace, nullptr);
      token_grad = gru.backward(trace, weights);
    });
    INFO("worst ", r.worst_parameter, " analytic ", r.analytic, " numeric ", r.numeric);
    CHECK(r.max_relative_error < 1e-4);
    CHECK(check_input_gradient(tokens, token_grad, loss).max_relative_error < 1e-4);
  }

  TEST_CASE("GRU input dropout is inverted and only active with an rng") {
    Rng rng(8);
    GruEncoder gru(6, 4, 0.5, rng);
    const Matrix tokens = random_tokens(3, 6, rng);
    const Vector a = gru.encode(tokens, {}, nullptr, nullptr);
    CHECK((a - gru.encode(tokens, {}, nullptr, nullptr)).norm() == 0.0);
    Rng drop(9);
    EncoderTrace trace;
    const Vector b = gru.encode(tokens, {}, &trace, &drop);
    CHECK((a - b).norm() > 0.0);
    for (Eigen::Index i = 0; i < trace.input_mask.size(); ++i) {
      const double m = trace.input_mask.data()[i];
      CHECK((m == 0.0 || m == doctest::Approx(2.0)));
    }
    const Matrix big = dropout_mask(400, 400, 0.3, drop);
    CHECK(big.mean() == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("trainable lookup routes gradients to the looked-up rows") {
    const auto vocab = std::make_shared<const Vocabulary>(
        Vocabulary::from_frequencies({{"alpha", 5}, {"beta", 5}}, 1));
    Rng rng(2);
    TrainableLookup emb(vocab, 3, rng);
    const TokenSeq tokens{"beta", "unknown", "beta"};
    const Matrix rows = emb.embed(tokens, {});
    CHECK(rows.rows() == 3);
    CHECK(rows.row(1) == emb.embed({"never-seen"}, {}).row(0));
    ParameterRefs params;
    emb.collect_parameters(params);
    Matrix grad = Matrix::Ones(3, 3);
    emb.backward(tokens, {}, grad);
    const auto beta = static_cast<Eigen::Index>(vocab->index_of("beta"));
    CHECK(params[0]->grad.row(beta).sum() == doctest::Approx(6.0));
    CHECK(params[0]->grad.row(0).sum() == doctest::Approx(3.0));
    CHECK(params[0]->grad.row(static_cast<Eigen::Index>(vocab->index_of("alpha"))).sum() == 0.0);
  }

  TEST_CASE("static vectors load, fall back for unknown tokens, and check width") {
    std::istringstream in("alpha 1 2\nbeta 3 4\n");
    const StaticVectors sv = StaticVectors::load(in, 2);
    const Matrix rows = sv.embed({"beta", "zeta"}, {});
    CHECK(rows(0, 1) == 4.0);
    CHECK(rows.row(1).norm() == 0.0);
    std::istringstream with_unk("<unk> 9 9\nalpha 1 2\n");
    CHECK(StaticVectors::load(with_unk).embed({"zeta"}, {})(0, 0) == 9.0);
    std::istringstream wide("alpha 1 2 3\n");
    CHECK_THROWS_AS(StaticVectors::load(wide, 2), ConfigError);
  }

  TEST_CASE("precomputed stores serve tokens and sentences by node key") {
    std::istringstream in(R"({"key": "ex1/0", "tokens": [[1, 2], [3, 4]]}
{"key": "ex1/1", "tokens": [[5, 6]]}
)");
    const auto store = std::make_shared<const EmbeddingStore>(EmbeddingStore::load(in, 2));
    ContextualEmbedder emb(store);
    CHECK(emb.embed({"ignored"}, NodeKey{"ex1", 0}).rows() == 2);
    CHECK_THROWS_AS(emb.embed({"x"}, NodeKey{"ex1", 7}), LookupError);

    std::istringstream sent(R"({"key": "ex1/1", "sentence": [0.5, 0.25, 1]})");
    const auto sstore = std::make_shared<const EmbeddingStore>(EmbeddingStore::load(sent));
    PrecomputedSentenceEncoder enc(sstore);
    CHECK(enc.output_dim() == 3);
    CHECK(enc.encode(Matrix::Zero(1, 3), NodeKey{"ex1", 1}, nullptr, nullptr)(1) == 0.25);

    std::istringstream bad(R"({"key": "a/0", "tokens": [[1, 2, 3]]})");
    CHECK_THROWS_AS(EmbeddingStore::load(bad, 2), ConfigError);
  }

  TEST_CASE("encoders reject empty token matrices") {
    Rng rng(1);
    GruEncoder gru(2, 2, 0.0, rng);
    CHECK_THROWS_AS(gru.encode(Matrix(0, 2), {}, nullptr, nullptr), std::invalid_argument);
    CHECK_THROWS_AS(AverageEncoder(2).encode(Matrix(0, 2), {}, nullptr, nullptr), std::invalid_argument);
  }
}
