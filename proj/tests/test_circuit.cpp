#include <cmath>

#include "doctest.h"
#include "mtplab/circuit.hpp"
#include "mtplab/error.hpp"
#include "mtplab/grad.hpp"
#include "support.hpp"

using namespace mtplab;

TEST_CASE("construction") {
  CHECK(construct_circuit(0, 10, 10) == DisentangledModel::zeros(10, 10));
  const auto m = construct_circuit(10, 10, 10);
  const auto tr = forward(m, testing::star_example(0).context);
  const double e = std::exp(10.0);
  CHECK(tr.S1(4, 3) == doctest::Approx(e / (e + 4.0)).epsilon(1e-14));
  CHECK(m.layer2.positional(8, 8) == -10.0);
  CHECK(m.layer2.positional.max_abs() == 10.0);
  CHECK(m.layer1.content.max_abs() == 0.0);
}

TEST_CASE("at gamma 30 everything but the teacher-forced term is solved") {
  const auto m = construct_circuit(30, 10, 10);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto l = mtp_loss(m, testing::star_example(seed));
    CHECK(l.without_ar() <= 1e-9);
    CHECK(l.l1b >= 27.0);
  }
}

TEST_CASE("stationarity conditions") {
  const auto ex = testing::star_example(4);
  const auto on = check_stationary(forward(construct_circuit(30, 10, 10), ex.context), ex);
  CHECK(on.predecessor);
  CHECK(on.content_match);
  const auto off = check_stationary(forward(DisentangledModel::zeros(10, 10), ex.context), ex);
  CHECK_FALSE(off.predecessor);
  CHECK_FALSE(off.content_match);
}

TEST_CASE("conditions at 1e-8 pin the AR-free gradient") {
  const auto m = construct_circuit(40, 10, 10);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ex = testing::star_example(seed);
    const auto st = check_stationary(forward(m, ex.context), ex, 1e-8);
    REQUIRE(st.both());
    CHECK(grad_without_ar(m, ex).max_abs() <= 1e-6);
  }
}

TEST_CASE("AR collapse probe at gamma 20") {
  const auto ex = testing::star_example(7);
  const auto r = ar_collapse_probe(construct_circuit(20, 10, 10), ex);
  CHECK(r.ar_argmax == ex.y1);
  CHECK(r.loss.l1b >= 17.0);
  CHECK(r.loss.l1b <= 23.0);
  CHECK(r.noar_grad_max <= 1e-6);
  CHECK_FALSE(r.ar_near_uniform);
  CHECK(r.s2_mass >= 0.999);
}

TEST_CASE("AR collapse probe at gamma 0 is near-uniform with a low-index tie break") {
  const auto ex = testing::star_example(7);
  const auto r = ar_collapse_probe(construct_circuit(0, 10, 10), ex);
  CHECK(r.ar_near_uniform);
  const auto tr = forward(DisentangledModel::zeros(10, 10), ar_context(ex));
  CHECK(r.ar_argmax == argmax(tr.f1) + 1);
}

TEST_CASE("sweep table and slope fit") {
  std::vector<TrainingExample> exs;
  for (std::uint64_t s = 0; s < 5; ++s) exs.push_back(testing::star_example(s));
  const auto rows = gamma_sweep({5, 10, 15, 20, 25}, exs);
  REQUIRE(rows.size() == 5);
  const std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("gamma,L1a,L1b,L2,total,grad_max,s1_T_max,s1_ctx_max,s2_mass,ar_argmax_correct", 0) ==
        0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const auto v = judge_sweep(rows);
  CHECK(v.noar_loss_slope == doctest::Approx(-1.0).epsilon(0.1));
  CHECK(v.noar_grad_slope == doctest::Approx(-1.0).epsilon(0.15));
  for (const auto& r : rows) CHECK(r.ar_argmax_correct == 0.0);

  CHECK_THROWS_AS(gamma_sweep({41}, exs), Error);
  CHECK(fit_log_slope({1, 2, 3}, {std::exp(-2.0), std::exp(-4.0), std::exp(-6.0)}) ==
        doctest::Approx(-2.0));
  CHECK_THROWS_AS(fit_log_slope({1, 2}, {1.0, 0.0}), Error);
}
