#include "propsel/compaggr.hpp"

#include "gradcheck.hpp"

#include <doctest.h>

using namespace propsel;
using propsel::testing::check_gradients;
using propsel::testing::check_input_gradient;

namespace {

// Columns are token vectors.
Matrix question_tokens() {
  Matrix q(2, 2);
  q << 1.0, 0.5, 0.0, -1.0;
  return q;
}

Matrix sentence_tokens() {
  Matrix s(2, 3);
  s << 0.2, -0.4, 0.7, 0.3, 1.0, -0.2;
  return s;
}

Matrix attention_matrix() {
  Matrix w(2, 2);
  w << 0.3, 0.1, -0.2, 0.5;
  return w;
}

}  // namespace

TEST_SUITE("compaggr") {
  TEST_CASE("question-side alignment matches the scalar oracle") {
    const Matrix a = compaggr_attend(question_tokens(), sentence_tokens().leftCols(2), attention_matrix());
    CHECK(a(0, 0) == doctest::Approx(0.7711989703871756).epsilon(1e-12));
    CHECK(a(1, 0) == doctest::Approx(-0.457602059225649).epsilon(1e-12));
    CHECK(a(0, 1) == doctest::Approx(0.7872212584058296).epsilon(1e-12));
    CHECK(a(1, 1) == doctest::Approx(-0.425557483188341).epsilon(1e-12));
  }

  TEST_CASE("alignment columns sum to one") {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
      const Matrix x = uniform_init(4, 1 + t % 6, 2.0, rng);
      const Matrix y = uniform_init(4, 1 + t % 5, 2.0, rng);
      AlignmentTrace trace;
      soft_align(x, y, uniform_init(4, 4, 1.0, rng), 0, &trace);
      for (Eigen::Index j = 0; j < trace.weights.cols(); ++j)
        REQUIRE(trace.weights.col(j).sum() == doctest::Approx(1.0).epsilon(1e-6));
      AlignmentTrace top;
      soft_align(x, y, uniform_init(4, 4, 1.0, rng), 2, &top);
      for (Eigen::Index j = 0; j < top.weights.cols(); ++j) {
        REQUIRE(top.weights.col(j).sum() == doctest::Approx(1.0).epsilon(1e-6));
        REQUIRE((top.weights.col(j).array() > 0).count() <= 2);
      }
    }
  }

  TEST_CASE("score with one width-2 filter matches the scalar oracle") {
    Rng rng(1);
    CompAggrConfig cfg;
    cfg.filter_widths = {2};
    cfg.feature_maps = 1;
    CompAggr net(2, cfg, rng);
    net.attention.value = attention_matrix();
    // Filter rows are indexed offset * d + dimension.
    net.filters[0].value.resize(1, 4);
    net.filters[0].value << 0.4, 0.2, -0.3, 0.5;
    net.filter_bias[0].value << 0.1;
    net.output.value.resize(1, 2);
    net.output.value << 0.8, -0.6;
    net.output_bias.value << 0.05, -0.05;
    CompAggr::Trace trace;
    const auto p = net.score(question_tokens(), sentence_tokens(), &trace);
    CHECK(trace.features(0) == doctest::Approx(0.015926256745064857).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(0.5305361398700307).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.4694638601299694).epsilon(1e-12));
  }

  TEST_CASE("pair loss matches the scalar oracle") {
    const std::vector<std::array<double, 2>> preds{{0.8, 0.2}, {0.3, 0.7}, {0.6, 0.4}};
    CHECK(compaggr_loss(preds, Labels{1, 0, 0}) == doctest::Approx(1.4961092271270973).epsilon(1e-12));
  }

  TEST_CASE("short inputs are padded to the widest filter") {
    Rng rng(2);
    CompAggr net(3, CompAggrConfig{{1, 2, 3, 4, 5}, 4, false, 3}, rng);
    const auto p = net.score(uniform_init(3, 2, 1.0, rng), uniform_init(3, 1, 1.0, rng));
    CHECK(p[0] + p[1] == doctest::Approx(1.0));
    CHECK(net.feature_count() == 20);
    CompAggr kmax(3, CompAggrConfig{{1, 2}, 4, true, 2}, rng);
    CHECK(kmax.feature_count() == 16);
  }

  TEST_CASE("gradients match finite differences for both variants") {
    for (bool use_kmax : {false, true}) {
      Rng rng(use_kmax ? 8 : 7);
      CompAggr net(3, CompAggrConfig{{1, 2, 3}, 3, use_kmax, 2}, rng);
      Matrix q = uniform_init(3, 4, 1.0, rng);
      Matrix s = uniform_init(3, 5, 1.0, rng);
      auto loss = [&] { return -std::log(net.score(q, s)[0]); };
      ParameterRefs params;
      net.collect_parameters(params);
      Matrix dq, ds;
      const auto r = check_gradients(params, loss, [&] {
        CompAggr::Trace trace;
        const auto p = net.score(q, s, &trace);
        Vector g(2);
        g << p[0] - 1.0, p[1];
        std::tie(dq, ds) = net.backward(trace, g);
      });
      INFO("kmax=", use_kmax, " worst ", r.worst_parameter, " analytic ", r.analytic, " numeric ", r.numeric);
      CHECK(r.max_relative_error < 1e-4);
      CHECK(check_input_gradient(q, dq, loss).max_relative_error < 1e-4);
      CHECK(check_input_gradient(s, ds, loss).max_relative_error < 1e-4);
    }
  }
}
