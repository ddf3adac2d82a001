#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "mtplab/circuit.hpp"
#include "mtplab/error.hpp"
#include "mtplab/train.hpp"
#include "support.hpp"

using namespace mtplab;

namespace {

const StarSplit& small_split() {
  static const StarSplit s = make_star_split(64, 128, 3);
  return s;
}

}  // namespace

TEST_CASE("star split keeps graphs apart") {
  const auto s = make_star_split(200, 300, 11);
  CHECK(s.train.size() == 200);
  CHECK(s.eval.size() == 300);
  std::set<std::string> train_ids;
  for (const auto& g : s.train_graphs) train_ids.insert(star_identity(g));
  CHECK(train_ids.size() == 200);
  for (const auto& g : s.eval_graphs) CHECK(train_ids.count(star_identity(g)) == 0);
  // identity ignores edge order
  auto g = s.train_graphs.front();
  std::reverse(g.edges.begin(), g.edges.end());
  CHECK(star_identity(g) == star_identity(s.train_graphs.front()));
}

TEST_CASE("init") {
  TrainConfig c;
  CHECK(init_model(10, 10, c) == DisentangledModel::zeros(10, 10));
  c.init = InitKind::uniform;
  c.init_scale = 0.3;
  const auto m = init_model(10, 10, c);
  CHECK(m.layer2.content.max_abs() <= 0.3);
  CHECK(m.layer2.content.max_abs() > 0.0);
  CHECK(init_model(10, 10, c) == m);
}

TEST_CASE("learning rate 0 leaves the model alone") {
  const auto& s = small_split();
  TrainConfig c;
  c.learning_rate = 0.0;
  c.epochs = 5;
  c.eval_every = 1;
  c.init = InitKind::uniform;
  const auto r = train(c, s.train, s.eval);
  CHECK(r.model == init_model(10, 10, c));
  const auto before = evaluate(init_model(10, 10, c), s.eval);
  CHECK(r.metrics.back().eval.v_accuracy == before.v_accuracy);
}

TEST_CASE("zero epochs give the zero model") {
  const auto& s = small_split();
  TrainConfig c;
  c.epochs = 0;
  CHECK(train(c, s.train, s.eval).model == DisentangledModel::zeros(10, 10));
  c.objective = Objective::cascaded;
  c.phase1_epochs = 0;
  CHECK(train_cascaded(c, s.train, s.eval).model == DisentangledModel::zeros(10, 10));
}

TEST_CASE("training is bit-reproducible and keeps the shallow term off layer 2") {
  const auto& s = small_split();
  TrainConfig c;
  c.epochs = 60;
  c.eval_every = 20;
  c.batch_size = 16;
  c.seed = 4;
  const auto a = train(c, s.train, s.eval), b = train(c, s.train, s.eval);
  CHECK(a.model == b.model);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i)
    CHECK(metrics_line(a.metrics[i]) == metrics_line(b.metrics[i]));
  CHECK(a.decoupling_held);
  CHECK(a.metrics.back().train_loss.total < a.metrics.front().train_loss.total);
}

TEST_CASE("pinned W0_1 stays at its initial value") {
  const auto& s = small_split();
  TrainConfig c;
  c.epochs = 30;
  const auto r = train(c, s.train, s.eval);
  CHECK(r.model.layer1.content.max_abs() == 0.0);
  c.pin_content1 = false;
  CHECK(train(c, s.train, s.eval).model.layer1.content.max_abs() > 0.0);
}

TEST_CASE("a runaway learning rate is reported as divergence with a finite model") {
  const auto& s = small_split();
  TrainConfig c;
  c.epochs = 200;
  c.learning_rate = 1e300;
  c.init = InitKind::uniform;
  const auto r = train(c, s.train, s.eval);
  CHECK(r.diverged);
  bool finite = true;
  for_each_matrix(r.model, [&](int, const Matrix& w) { finite = finite && w.all_finite(); });
  CHECK(finite);
}

TEST_CASE("bad configs") {
  TrainConfig c;
  c.learning_rate = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.eval_every = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.objective = Objective::cascaded;
  c.phase2_target = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(objective_from_name("mtp-no-ar") == Objective::mtp_no_ar);
  CHECK_FALSE(objective_from_name("sgd"));
}

TEST_CASE("evaluation of fixed models") {
  const auto& s = small_split();
  for (double gamma : {20.0, 30.0}) {
    const auto r = evaluate(construct_circuit(gamma, 10, 10), s.eval);
    CHECK(r.full_path_accuracy == 1.0);
    CHECK(r.v_accuracy == 1.0);
    // the teacher-forced step sits on v, not on the end node
    CHECK(r.ar_step_accuracy == 0.0);
  }
  const auto z = evaluate(DisentangledModel::zeros(10, 10), s.eval);
  CHECK(std::isfinite(z.loss.total));
  CHECK(z.v_accuracy <= 0.6);
  CHECK(z.count == s.eval.size());
}

TEST_CASE("relabelled eval set with a conjugated model gives the same report") {
  const auto& s = small_split();
  std::vector<NodeId> pi(10);
  std::iota(pi.begin(), pi.end(), 1);
  std::shuffle(pi.begin(), pi.end(), std::mt19937_64(8));
  const auto m = testing::random_model(31);
  std::vector<TrainingExample> moved;
  for (const auto& ex : s.eval) moved.push_back(testing::relabel(ex, pi));
  const auto a = evaluate(m, s.eval), b = evaluate(testing::conjugate(m, pi), moved);
  CHECK(a.v_accuracy == b.v_accuracy);
  CHECK(a.full_path_accuracy == b.full_path_accuracy);
  CHECK(a.s2_concentration == doctest::Approx(b.s2_concentration).epsilon(1e-12));
  CHECK(a.loss.total == doctest::Approx(b.loss.total).epsilon(1e-12));
}

TEST_CASE("phase II with a uniform layer 1 never content-matches") {
  const auto& s = small_split();
  PhaseTwoConfig c;
  c.gamma_frozen = 0.0;
  c.max_steps = 2000;
  const auto r = phase2_simulate(s.train, c);
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.content_match);
}

TEST_CASE("metrics format") {
  CHECK(metrics_header() == "epoch,loss_total,L1a,L1b,L2,v_acc,path_acc,s1_conc,s2_conc");
  MetricRecord r;
  r.epoch = 7;
  CHECK(metrics_line(r).rfind("7,", 0) == 0);
}
