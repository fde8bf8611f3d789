#include "propsel/errors.hpp"
#include "propsel/graph.hpp"
#include "propsel/propagation.hpp"

#include "gradcheck.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace propsel;
using propsel::testing::check_gradients;
using propsel::testing::check_input_gradient;

namespace {

SentenceGraph path3() {
  std::vector<NodeId> nodes{{0, NodeKind::question, {}, {}}, {1, NodeKind::sentence, 0, 0}, {2, NodeKind::sentence, 0, 1}};
  return SentenceGraph(nodes, {{0, 1, EdgeClass::question_link}, {1, 2, EdgeClass::intra_passage}});
}

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

PropagationParams fixed_params(const std::vector<Matrix>& w, const std::vector<Matrix>& wp) {
  Rng rng(0);
  PropagationParams p = PropagationParams::create(static_cast<int>(w[0].rows()), static_cast<int>(w.size()), false, 0.0, rng);
  for (std::size_t k = 0; k < w.size(); ++k) {
    p.transform[k].value = w[k];
    p.update[k].value = wp[k];
  }
  return p;
}

std::vector<std::size_t> random_sizes(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> passages(1, 4), sentences(1, 4);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(passages(rng)));
  for (auto& s : sizes) s = static_cast<std::size_t>(sentences(rng));
  return sizes;
}

}  // namespace

TEST_SUITE("propagation") {
  TEST_CASE("one hop on a 3-node path matches the scalar oracle") {
    const SentenceGraph g = path3();
    const Matrix n0 = rows({{0.5, -0.2}, {0.1, 0.4}, {-0.3, 0.8}});
    const Matrix w = rows({{0.6, -0.1}, {0.2, 0.3}});
    const Matrix wp = rows({{0.5, -0.3, 0.2, 0.1}, {0.1, 0.4, -0.2, 0.3}});

    const HopAttention a = attend(n0, g, w);
    CHECK(a[0][0] == doctest::Approx(1.0));
    CHECK(a[1][0] == doctest::Approx(0.5004999998333334).epsilon(1e-12));
    CHECK(a[1][1] == doctest::Approx(0.49950000016666657).epsilon(1e-12));
    CHECK(a[2][0] == doctest::Approx(1.0));

    const Matrix agg = aggregate(n0, a, g, w);
    CHECK(agg(0, 0) == doctest::Approx(0.019997333759930923).epsilon(1e-12));
    CHECK(agg(0, 1) == doctest::Approx(0.13909244787845804).epsilon(1e-12));
    CHECK(agg(1, 0) == doctest::Approx(0.030280739770687303).epsilon(1e-12));
    CHECK(agg(1, 1) == doctest::Approx(0.10948930992128689).epsilon(1e-12));

    const Matrix next = update(n0, agg, wp);
    const Matrix expected = rows({{0.31664041132261067, 0.007728113755413277},
                                  {-0.052945365321864835, 0.19428904774836075},
                                  {-0.3558195854662939, 0.31647804963519566}});
    CHECK((next - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("two hops on the 5-node full graph match the scalar oracle") {
    const std::vector<std::size_t> sizes{2, 2};
    const SentenceGraph g = build_graph(sizes, TopologyKind::full);
    const Matrix n0 = rows({{0.2, -0.1}, {0.4, 0.3}, {-0.5, 0.1}, {0.0, 0.6}, {0.3, -0.4}});
    const auto params = fixed_params({rows({{0.6, -0.1}, {0.2, 0.3}}), rows({{-0.4, 0.5}, {0.1, 0.7}})},
                                     {rows({{0.5, -0.3, 0.2, 0.1}, {0.1, 0.4, -0.2, 0.3}}),
                                      rows({{0.3, 0.2, -0.5, 0.4}, {-0.1, 0.6, 0.2, -0.3}})});
    const PropagationResult r = propagate(g, n0, params);
    REQUIRE(r.states.hops.size() == 3);
    const double hop1[] = {0.2567449059586033, 0.23700541954188628, 0.24300524030253196, 0.2632444341969785};
    const double hop2[] = {0.2504403326780573, 0.25195641682773573, 0.254312298410541, 0.24329095208366594};
    for (int u = 1; u <= 4; ++u) {
      CHECK(r.attention.weight(g, 0, 0, u) == doctest::Approx(hop1[u - 1]).epsilon(1e-12));
      CHECK(r.attention.weight(g, 1, 0, u) == doctest::Approx(hop2[u - 1]).epsilon(1e-12));
    }
    const Matrix expected = rows({{0.042096646148312884, -0.026456523631649218},
                                  {0.05041223270897233, 0.1017933537393511},
                                  {-0.041830497127839414, -0.009618630945098352},
                                  {0.043555254043708386, 0.11971862527051085},
                                  {0.0641250128094118, -0.10536360254147689}});
    CHECK((r.states.final_states() - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.attention.weight(g, 0, 2, 4) == 0.0);
  }

  TEST_CASE("attention distributions sum to one; isolated nodes stay empty") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
      const auto sizes = random_sizes(rng);
      const TopologyKind kind = kAllTopologies[static_cast<std::size_t>(trial % 4)];
      const SentenceGraph g = build_graph(sizes, kind);
      const int dim = 3;
      Rng prng(static_cast<std::uint64_t>(trial));
      const auto params = PropagationParams::create(dim, 2, false, 0.0, prng);
      const Matrix init = uniform_init(g.node_count(), dim, 2.0, prng);
      const PropagationResult r = propagate(g, init, params);
      for (const auto& hop : r.attention.hops)
        for (int v = 0; v < g.node_count(); ++v) {
          const auto& dist = hop[static_cast<std::size_t>(v)];
          REQUIRE(dist.size() == g.neighbors(v).size());
          if (dist.empty()) continue;
          REQUIRE(std::accumulate(dist.begin(), dist.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
        }
      if (kind == TopologyKind::type3) {
        REQUIRE(r.attention.hops[0][0].empty());
        REQUIRE(r.aggregated[0].row(0).norm() == 0.0);
      }
    }
  }

  TEST_CASE("information travels at most one edge per hop") {
    // A single chained passage without question links is a path 1-2-3-4-5.
    const std::vector<std::size_t> sizes{5};
    const SentenceGraph type1 = build_graph(sizes, TopologyKind::type1);
    std::vector<Edge> edges;
    for (const auto& e : type1.edges())
      if (e.cls != EdgeClass::question_link) edges.push_back(e);
    const SentenceGraph chain(type1.nodes(), edges);

    Rng rng(4);
    const auto params = PropagationParams::create(3, 3, false, 0.0, rng);
    const Matrix init = uniform_init(chain.node_count(), 3, 1.0, rng);
    Matrix perturbed = init;
    perturbed.row(1) += Eigen::RowVectorXd::Constant(3, 0.5);
    const PropagationResult a = propagate(chain, init, params);
    const PropagationResult b = propagate(chain, perturbed, params);
    for (std::size_t k = 1; k <= 3; ++k) {
      for (int v = 1; v <= 5; ++v) {
        const double diff = (a.states.hops[k].row(v) - b.states.hops[k].row(v)).norm();
        if (static_cast<std::size_t>(v - 1) > k) CHECK(diff == 0.0);
        else CHECK(diff > 0.0);
      }
      CHECK((a.states.hops[k].row(0) - b.states.hops[k].row(0)).norm() == 0.0);
    }
  }

  TEST_CASE("relabelling nodes permutes the states") {
    const std::vector<std::size_t> sizes{2, 3};
    const SentenceGraph g = build_graph(sizes, TopologyKind::full);
    const int n = g.node_count();
    std::vector<int> perm{0, 4, 2, 5, 1, 3};  // old index -> new index
    std::vector<NodeId> nodes(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
      NodeId id = g.node(v);
      id.index = perm[static_cast<std::size_t>(v)];
      nodes[static_cast<std::size_t>(id.index)] = id;
    }
    std::vector<Edge> edges;
    for (const auto& e : g.edges()) {
      int a = perm[static_cast<std::size_t>(e.a)], b = perm[static_cast<std::size_t>(e.b)];
      if (a > b) std::swap(a, b);
      edges.push_back({a, b, e.cls});
    }
    const SentenceGraph h(nodes, edges);
    Rng rng(6);
    const auto params = PropagationParams::create(4, 2, false, 0.0, rng);
    const Matrix init = uniform_init(n, 4, 1.0, rng);
    Matrix pinit(n, 4);
    for (int v = 0; v < n; ++v) pinit.row(perm[static_cast<std::size_t>(v)]) = init.row(v);
    const Matrix out = propagate(g, init, params).states.final_states();
    const Matrix pout = propagate(h, pinit, params).states.final_states();
    for (int v = 0; v < n; ++v) CHECK((out.row(v) - pout.row(perm[static_cast<std::size_t>(v)])).norm() < 1e-12);
  }

  TEST_CASE("backward pass matches finite differences, untied and tied") {
    const std::vector<std::size_t> sizes{2, 2};
    const SentenceGraph g = build_graph(sizes, TopologyKind::full);
    for (bool tied : {false, true}) {
      Rng rng(tied ? 21 : 12);
      auto params = PropagationParams::create(3, 2, tied, 0.0, rng);
      Matrix init = uniform_init(g.node_count(), 3, 1.0, rng);
      const Matrix weights = uniform_init(g.node_count(), 3, 1.0, rng);
      // A direct attention term exercises the softmax backward as well.
      auto loss = [&] {
        const auto r = propagate(g, init, params);
        double l = (weights.array() * r.states.final_states().array()).sum();
        for (std::size_t k = 0; k < r.attention.hops.size(); ++k) l -= 0.7 * std::log(r.attention.hops[k][0][1]);
        return l;
      };
      ParameterRefs refs;
      params.collect_parameters(refs);
      CHECK(refs.size() == (tied ? 2u : 4u));
      Matrix init_grad;
      const auto res = check_gradients(refs, loss, [&] {
        const auto r = propagate(g, init, params);
        std::vector<HopAttention> ga(r.attention.hops.size());
        for (std::size_t k = 0; k < ga.size(); ++k) {
          ga[k].resize(r.attention.hops[k].size());
          ga[k][0].assign(r.attention.hops[k][0].size(), 0.0);
          ga[k][0][1] = -0.7 / r.attention.hops[k][0][1];
        }
        init_grad = propagate_backward(g, r, params, weights, ga);
      });
      INFO("tied=", tied, " worst ", res.worst_parameter, " analytic ", res.analytic, " numeric ", res.numeric);
      CHECK(res.max_relative_error < 1e-4);
      CHECK(check_input_gradient(init, init_grad, loss).max_relative_error < 1e-4);
    }
  }

  TEST_CASE("attention dropout masks the transform only in training mode") {
    const std::vector<std::size_t> sizes{2, 2};
    const SentenceGraph g = build_graph(sizes, TopologyKind::full);
    Rng rng(3);
    const auto params = PropagationParams::create(4, 2, false, 0.5, rng);
    const Matrix init = uniform_init(g.node_count(), 4, 1.0, rng);
    const auto eval = propagate(g, init, params);
    for (const auto& m : eval.transform_mask) CHECK(m.size() == 0);
    Rng drop(10);
    const auto trainm = propagate(g, init, params, &drop);
    REQUIRE(trainm.transform_mask.size() == 2);
    CHECK(trainm.transform_mask[0].size() == 16);
    CHECK((trainm.states.final_states() - eval.states.final_states()).norm() > 0.0);
  }

  TEST_CASE("non-finite states raise a numeric error naming the hop") {
    const SentenceGraph g = path3();
    Rng rng(1);
    const auto params = PropagationParams::create(2, 2, false, 0.0, rng);
    Matrix init = Matrix::Zero(3, 2);
    init(2, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
      propagate(g, init, params);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(e.hop() == 1);
    }
  }
}
