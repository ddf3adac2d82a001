#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mtplab/circuit.hpp"
#include "mtplab/error.hpp"
#include "mtplab/model.hpp"
#include "support.hpp"

using namespace mtplab;

TEST_CASE("reference graph encoding") {
  const auto ex = encode(testing::reference_instance(), 10, 10);
  CHECK(ex.context.tokens() == std::vector<NodeId>{3, 7, 6, 10, 7, 2, 3, 6, 10, 3});
  CHECK(ex.y1 == 6);
  CHECK(ex.y2 == 10);
  CHECK(ex.start == 3);
  CHECK(ex.t_end_ctx == 3);
  CHECK(ex.t_v_ctx == 2);
  const auto zp = ar_context(ex);
  CHECK(zp.tokens()[9] == 6);
}

TEST_CASE("encoding invariants on seeded stars") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = gen_star(2, 3, 10, seed);
    const auto ex = encode(g, 10, 10);
    const auto& tok = ex.context.tokens();
    CHECK(ex.t_v_ctx + 1 == ex.t_end_ctx);
    CHECK(tok[ex.t_v_ctx] == g.path[1]);
    CHECK(tok[ex.t_end_ctx] == g.end);
    CHECK(tok[8] == tok[ex.t_end_ctx]);
    CHECK(tok[9] == g.start);
    const auto zp = ar_context(ex);
    int diff = 0;
    for (std::size_t t = 0; t < 10; ++t) diff += zp.tokens()[t] != tok[t];
    CHECK(diff == 1);
  }
}

TEST_CASE("size mismatch is an encoding error") {
  try {
    encode(gen_star(2, 3, 10, 0), 12, 10);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::encoding);
  }
  try {
    encode(gen_star(3, 3, 10, 0), 10, 10);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::encoding);
  }
}

TEST_CASE("ContentMatrix with_token to the same label is the identity") {
  const auto ex = testing::star_example(4);
  CHECK(ex.context.with_token(9, ex.start) == ex.context);
}

TEST_CASE("zero model: uniform layer 1, f2 averages the content rows") {
  const auto ex = testing::star_example(1);
  const auto tr = forward(DisentangledModel::zeros(10, 10), ex.context);
  for (std::size_t t = 0; t < 10; ++t)
    for (std::size_t j = 0; j <= t; ++j) CHECK(tr.S1(t, j) == doctest::Approx(1.0 / (t + 1)));
  std::vector<double> avg(10, 0.0);
  for (NodeId tok : ex.context.tokens()) avg[tok - 1] += 0.1;
  for (std::size_t i = 0; i < 10; ++i) CHECK(tr.f2[i] == doctest::Approx(avg[i]).epsilon(1e-14));
}

TEST_CASE("circuit at gamma 30 puts f1 on v") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ex = testing::star_example(seed);
    const auto tr = forward(construct_circuit(30, 10, 10), ex.context);
    CHECK(tr.f1[ex.y1 - 1] >= 1.0 - 1e-9);
  }
}

TEST_CASE("random weights give distributions with causal support") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ex = testing::star_example(seed);
    const auto tr = forward(testing::random_model(seed + 100, 10, 10, 3.0), ex.context);
    CHECK(is_distribution(tr.f1));
    CHECK(is_distribution(tr.f2));
    for (std::size_t t = 0; t < 10; ++t) {
      CHECK(is_distribution(tr.S1.row(t)));
      CHECK(is_distribution(tr.S2.row(t)));
      for (std::size_t j = t + 1; j < 10; ++j) CHECK(tr.S1(t, j) + tr.S2(t, j) == 0.0);
    }
  }
}

TEST_CASE("last-row-only layer 2 matches the full pass") {
  const auto ex = testing::star_example(2);
  const auto m = testing::random_model(5);
  const auto full = forward(m, ex.context), last = forward(m, ex.context, Layer2Rows::last);
  CHECK(full.f1 == last.f1);
  CHECK(full.f2 == last.f2);
  CHECK(full.layer2_logits == last.layer2_logits);
}

TEST_CASE("forward is deterministic") {
  const auto ex = testing::star_example(8);
  const auto m = testing::random_model(8);
  const auto a = forward(m, ex.context), b = forward(m, ex.context);
  CHECK(a.S1 == b.S1);
  CHECK(a.S2 == b.S2);
  CHECK(a.f1 == b.f1);
}

TEST_CASE("layer 1 is content-blind when W0_1 is zero") {
  auto m = testing::random_model(9);
  m.layer1.content = Matrix(10, 10);
  const auto a = forward(m, testing::star_example(1).context);
  const auto b = forward(m, testing::star_example(2).context);
  CHECK(a.S1 == b.S1);
}

TEST_CASE("losses") {
  const auto ex = testing::star_example(3);
  const auto z = mtp_loss(DisentangledModel::zeros(10, 10), ex);
  CHECK(std::isfinite(z.total));
  CHECK(z.total == doctest::Approx(0.5 * (0.5 * (z.l1a + z.l1b) + z.l2)));
  CHECK(ntp_loss(DisentangledModel::zeros(10, 10), ex) == z.l1a);

  const auto c = mtp_loss(construct_circuit(20, 10, 10), ex);
  CHECK(c.l1a <= std::exp(-20.0 + 5.0));
  CHECK(c.l1b >= 17.0);
  CHECK(c.l1b <= 23.0);

  CHECK(neg_log(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  bool clamped = false;
  CHECK(neg_log(0.0, &clamped) == doctest::Approx(-std::log(kProbabilityFloor)));
  CHECK(clamped);
}

TEST_CASE("label symmetry") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<NodeId> pi(10);
    std::iota(pi.begin(), pi.end(), 1);
    std::shuffle(pi.begin(), pi.end(), rng);
    const auto ex = testing::star_example(trial);
    const auto m = testing::random_model(trial + 50);
    const auto a = mtp_loss(m, ex), b = mtp_loss(testing::conjugate(m, pi), testing::relabel(ex, pi));
    CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
    CHECK(a.l1b == doctest::Approx(b.l1b).epsilon(1e-12));
  }
}

TEST_CASE("checkpoint round trip is bit-exact") {
  const auto m = testing::random_model(21, 7, 5, 1e3);
  std::stringstream ss;
  save_checkpoint(m, ss);
  CHECK(load_checkpoint(ss) == m);

  std::stringstream bad("not a checkpoint\n");
  try {
    load_checkpoint(bad);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse);
  }
}
