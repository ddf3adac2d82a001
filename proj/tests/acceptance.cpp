// Acceptance run: one PASS/FAIL line per criterion. With an argument N only
// criterion N runs; exit status is 1 if any criterion that ran failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mtplab/circuit.hpp"
#include "mtplab/dynamics.hpp"
#include "mtplab/grad.hpp"
#include "mtplab/taskgen.hpp"
#include "mtplab/train.hpp"
#include "oracles/central_diff.hpp"
#include "oracles/countdown_search.hpp"
#include "oracles/dpll.hpp"
#include "oracles/graph_walk.hpp"
#include "support.hpp"

using namespace mtplab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

void info(const char* fmt, auto... args) {
  std::printf("      ");
  std::printf(fmt, args...);
  std::printf("\n");
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr std::size_t kGradPairs = 200;

// ------------------------------------------------------------------ 1, 2

struct PairSweep {
  std::array<double, 4> worst{};
  double shallow_layer2 = 0.0;
};

const PairSweep& gradient_pairs() {
  static const PairSweep sweep = [] {
    PairSweep s;
    for (std::size_t i = 0; i < kGradPairs; ++i) {
      const auto ex = testing::star_example(i);
      const auto model = testing::random_model(10'000 + i);
      const GradSet closed = grad_total(model, ex);
      const auto fd = oracle::central_diff(
          [&](const DisentangledModel& m) { return mtp_loss(m, ex).total; }, model);
      for_each_matrix(closed, [&](int m, const Matrix& w) {
        for (std::size_t k = 0; k < w.size(); ++k)
          s.worst[m] = std::max(s.worst[m], relative_error(w.values()[k], fd[m][k]));
      });
      const GradSet sh = grad_shallow(forward(model, ex.context), ex.context, ex.y2);
      s.shallow_layer2 =
          std::max({s.shallow_layer2, sh.layer2.content.max_abs(), sh.layer2.positional.max_abs()});
    }
    return s;
  }();
  return sweep;
}

Outcome gradient_oracle() {
  const auto& s = gradient_pairs();
  const bool pass = std::all_of(s.worst.begin(), s.worst.end(), [](double e) { return e <= 1e-4; });
  return {pass, fmt("%zu pairs, max rel err W0_1=%.2e W1_1=%.2e W0_2=%.2e W1_2=%.2e (tol 1e-4)",
                    kGradPairs, s.worst[0], s.worst[1], s.worst[2], s.worst[3])};
}

Outcome decoupling() {
  const auto& s = gradient_pairs();
  return {s.shallow_layer2 == 0.0,
          fmt("%zu pairs, shallow-head layer-2 max-norm %.1e", kGradPairs, s.shallow_layer2)};
}

// ------------------------------------------------------------------ 3, 4

std::vector<TrainingExample> star_examples(std::size_t n, std::uint64_t base) {
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testing::star_example(base + i));
  return out;
}

Outcome decay() {
  const auto rows = gamma_sweep({5, 10, 15, 20, 25}, star_examples(100, 500));
  const auto v = judge_sweep(rows);
  for (const auto& r : rows)
    info("gamma %4.0f  total %.4e  L1b %.4f  grad_max %.4e  without-AR loss %.4e grad %.4e",
         r.gamma, r.total, r.l1b, r.grad_max, r.noar_loss, r.noar_grad_max);
  info("without the teacher-forced term: loss slope %.4f, grad slope %.4f", v.noar_loss_slope,
       v.noar_grad_slope);
  info("total loss strictly decreasing along the sweep: %s", v.loss_monotone ? "yes" : "no");
  return {v.loss_decays && v.grad_decays,
          fmt("log-loss slope %.4f (want -1 +-10%%), log-grad slope %.4f (want -1 +-15%%)",
              v.loss_slope, v.grad_slope)};
}

Outcome stationarity() {
  const auto model = construct_circuit(30, 10, 10);
  double grad_max = 0.0, noar_max = 0.0, min_l1b = std::numeric_limits<double>::infinity();
  double max_total = 0.0, implied_max = 0.0;
  std::size_t both = 0, ar_on_v = 0;
  const auto exs = star_examples(100, 900);
  for (const auto& ex : exs) {
    const auto loss = mtp_loss(model, ex);
    const double g = grad_total(model, ex).max_abs();
    grad_max = std::max(grad_max, g);
    noar_max = std::max(noar_max, grad_without_ar(model, ex).max_abs());
    min_l1b = std::min(min_l1b, loss.l1b);
    max_total = std::max(max_total, loss.total);
    const auto st = check_stationary(forward(model, ex.context), ex, 1e-8);
    if (st.both()) {
      ++both;
      implied_max = std::max(implied_max, g);
    }
    if (ar_collapse_probe(model, ex).ar_argmax == ex.y1) ++ar_on_v;
  }
  info("both attention conditions at tol 1e-8 on %zu/%zu; grad_total there up to %.4e (want <= 1e-6)",
       both, exs.size(), implied_max);
  info("total loss up to %.4f (want <= 1e-9); teacher-forced step returns v on %zu/%zu",
       max_total, ar_on_v, exs.size());
  info("gradient without the teacher-forced term: max %.2e", noar_max);
  return {grad_max <= 1e-8 && min_l1b >= 20.0,
          fmt("gamma 30, %zu instances: max |grad_total| %.4e (want <= 1e-8), min L1b %.3f (want >= 20)",
              exs.size(), grad_max, min_l1b)};
}

// ------------------------------------------------------------------ 5, 6

Outcome phase_one() {
  const double gap = phase1_rhs({}).gap();
  const double gap_err = std::abs(gap - 7.0 / 16.0);
  const bool gap_ok = gap_err <= 4 * std::numeric_limits<double>::epsilon();

  const auto traj = integrate_phase1({}, 0.1, 20000);
  std::size_t first = 0;
  while (first < traj.size() && traj[first].s_p < 0.999) ++first;
  const bool reach = traj.back().s_p >= 0.999;

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> base(-10.0, 10.0), lead(0.0, 10.0);
  std::size_t positive = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10'000; ++i) {
    const double wc = base(rng);
    const double d = phase1_rhs({wc + lead(rng), wc, 0.0}).gap();
    worst = std::min(worst, d);
    positive += d > 0.0;
  }
  info("s_p after 5000 steps of 0.1: %.6f; first >= 0.999 at step %zu", traj[5000].s_p, first);
  return {gap_ok && reach && positive == 10'000,
          fmt("gap at origin %.17g (|err| %.1e); s_p %.6f after 20000 steps of 0.1; "
              "gap > 0 at %zu/10000 random states with x >= 1 (min %.3e)",
              gap, gap_err, traj.back().s_p, positive, worst)};
}

Outcome ntp_field() {
  const auto c = ntp_expected_grad_coefficients(10);
  bool exact = c[0] == Rational(548, 648000);
  for (std::size_t k = 2; k <= 8; ++k) exact = exact && c[k - 1] == Rational(-2096, 5184000);

  const auto emp = ntp_expected_grad_empirical(10);
  const auto closed = ntp_expected_grad_closed(10, emp.mu0);
  double worst = 0.0;
  bool signs = emp.at(1) > 0.0;
  for (std::size_t k = 1; k <= 9; ++k) {
    worst = std::max(worst, std::abs(emp.at(k) / closed.at(k) - 1.0));
    if (k >= 2) signs = signs && emp.at(k) < 0.0;
  }
  info("offset 9 coefficient %s (boundary slot, see README)", c[8].str().c_str());
  return {exact && worst <= 1e-9 && signs,
          fmt("c1 = %s, c2..c8 = %s, exact match %s; enumerated vs closed max rel %.2e; "
              "sign pattern %s",
              c[0].str().c_str(), c[1].str().c_str(), exact ? "yes" : "no", worst,
              signs ? "+ then -" : "broken")};
}

// ------------------------------------------------------------------ 7, 8

struct RunSummary {
  double v = 0, s1 = 0, s2 = 0, path = 0;
};

RunSummary run(Objective obj, std::uint64_t seed, std::size_t epochs) {
  const auto split = make_star_split(512, 1000, seed);
  TrainConfig c;
  c.objective = obj;
  c.epochs = epochs;
  c.seed = seed;
  c.eval_every = epochs;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = train(c, split.train, split.eval);
  const auto& e = r.metrics.back().eval;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  info("%-9s seed %llu: v %.3f path %.3f s1 %.3f s2 %.3f  L1a %.3f L1b %.3f L2 %.3f  (%.0fs)",
       objective_name(obj), static_cast<unsigned long long>(seed), e.v_accuracy,
       e.full_path_accuracy, e.s1_concentration, e.s2_concentration, e.loss.l1a, e.loss.l1b,
       e.loss.l2, secs);
  std::fflush(stdout);
  return {e.v_accuracy, e.s1_concentration, e.s2_concentration, e.full_path_accuracy};
}

Outcome separation() {
  RunSummary mtp, ntp;
  for (std::uint64_t seed : {0, 1, 2}) {
    const auto m = run(Objective::mtp, seed, 20000);
    const auto n = run(Objective::ntp, seed, 20000);
    mtp.v += m.v / 3;
    mtp.s1 += m.s1 / 3;
    mtp.s2 += m.s2 / 3;
    ntp.v += n.v / 3;
  }
  run(Objective::mtp_no_ar, 0, 2000);
  const bool mtp_ok = mtp.v >= 0.95 && mtp.s1 >= 0.9 && mtp.s2 >= 0.9;
  const bool ntp_ok = ntp.v <= 0.65;
  return {mtp_ok && ntp_ok,
          fmt("3 seeds, 512 graphs, 2e4 full-batch steps: MTP v %.3f s1 %.3f s2 %.3f (want >= "
              "0.95/0.9/0.9) %s; NTP v %.3f (want <= 0.65) %s",
              mtp.v, mtp.s1, mtp.s2, mtp_ok ? "ok" : "short", ntp.v, ntp_ok ? "ok" : "too high")};
}

Outcome cascaded() {
  const auto split = make_star_split(512, 1000, 0);
  TrainConfig c;
  c.objective = Objective::cascaded;
  const auto r = train_cascaded(c, split.train, split.eval);
  std::size_t pred = 0, content = 0;
  double min_mass = 1.0;
  for (const auto& ex : split.eval) {
    const auto tr = forward(r.model, ex.context);
    const auto st = check_stationary(tr, ex, 1e-2);
    pred += st.predecessor;
    content += st.content_match;
    min_mass = std::min(min_mass, tr.S2(ex.context.seq_len() - 1, ex.t_end_ctx));
  }
  const auto e = evaluate(r.model, split.eval);
  const auto& p2 = *r.phase2;
  const std::size_t n = split.eval.size();
  info("phase I s1 concentration %.4f; phase II %zu steps, converged %s", r.phase1_s1_concentration,
       p2.trajectory.back().step, p2.converged ? "yes" : "no");
  info("self-mask strictly decreasing %s (peak at step %zu); W1_2 outside row T-2 untouched %s",
       p2.self_mask_decreasing ? "yes" : "no", p2.self_mask_peak_step,
       p2.outside_row_zero ? "yes" : "no");
  const bool pass = pred == n && content == n && e.full_path_accuracy == 1.0 &&
                    p2.rank1_positional && p2.rank1_content;
  return {pass, fmt("held-out %zu graphs: predecessor %zu, content match %zu (min mass %.4f), "
                    "path accuracy %.4f; rank-1 every step: W1_2 %s, W0_2 %s",
                    n, pred, content, min_mass, e.full_path_accuracy,
                    p2.rank1_positional ? "yes" : "no", p2.rank1_content ? "yes" : "no")};
}

// ------------------------------------------------------------------ 9

Outcome task_oracles() {
  std::size_t cd_ok = 0, sat_ok = 0, graph_ok = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto c = gen_countdown(4, seed);
    std::vector<int> leaves;
    const auto value = oracle::eval_tree(c.solution.nodes(), c.solution.root(), leaves);
    std::sort(leaves.begin(), leaves.end());
    const bool tree_ok = value == c.target && leaves == c.operands;
    cd_ok += tree_ok && oracle::reachable(c.operands).count(c.target) == 1 && verify_countdown(c);

    const auto s = gen_sat(seed);
    bool shape = s.clauses.size() == 45 && s.var_count == 7;
    for (const auto& cl : s.clauses)
      shape = shape && cl.size() == 3 && std::abs(cl[0]) != std::abs(cl[1]) &&
              std::abs(cl[0]) != std::abs(cl[2]) && std::abs(cl[1]) != std::abs(cl[2]);
    const auto found = oracle::solve_sat(s.clauses, s.var_count);
    sat_ok += shape && oracle::satisfies(s.clauses, s.witness) && found &&
              oracle::satisfies(s.clauses, *found);

    const bool star = seed % 2 == 0;
    const auto g = star ? gen_star(2 + seed % 4, 3 + seed % 3, 40, seed)
                        : gen_binary_tree(1 + seed % 5, seed);
    const auto kind = star ? GraphKind::star : GraphKind::tree;
    const std::string line = serialize(g);
    const auto back = parse_graph(line, kind, PromptOrder::start_end, g.node_count);
    const auto walk = star ? oracle::check_star(g) : oracle::check_tree(g);
    graph_ok += back == g && serialize(back) == line && walk.ok;
  }
  return {cd_ok == 1000 && sat_ok == 1000 && graph_ok == 1000,
          fmt("countdown %zu/1000 via exhaustive search, sat %zu/1000 witness + DPLL, graphs "
              "%zu/1000 round-trip and re-walk",
              cd_ok, sat_ok, graph_ok)};
}

// ------------------------------------------------------------------ table

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "gradient oracle equivalence", gradient_oracle},
      {2, "gradient decoupling exactness", decoupling},
      {3, "exponential decay at the circuit", decay},
      {4, "stationarity at gamma 30 with trapped AR error", stationarity},
      {5, "phase I constants and pointer growth", phase_one},
      {6, "NTP offset-gradient constants", ntp_field},
      {7, "end-to-end MTP / NTP separation", separation},
      {8, "cascaded schedule", cascaded},
      {9, "task oracles", task_oracles},
  };
  return all;
}

void not_reproducible() {
  std::printf(
      "[NOT-REPRODUCIBLE] 10 full-scale results: the scaling curves, the Countdown "
      "(60.27 -> 64.93) and 3-SAT (10.40 -> 87.47) accuracies and the 8-layer attention "
      "heatmaps need multi-million-parameter transformer training; criteria 1-9 stand in\n");
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > 10) {
      std::fprintf(stderr, "usage: %s [1-10]\n", argv[0]);
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& c : criteria()) {
    if (only && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  if (!only || only == 10) not_reproducible();
  return all_pass ? 0 : 1;
}
