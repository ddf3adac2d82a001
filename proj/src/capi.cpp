#include "mtplab/mtplab.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <new>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "mtplab/circuit.hpp"
#include "mtplab/dynamics.hpp"
#include "mtplab/error.hpp"
#include "mtplab/grad.hpp"
#include "mtplab/heatmap.hpp"
#include "mtplab/train.hpp"

struct mtp_model {
  mtplab::DisentangledModel m;
};

struct mtp_dataset {
  mtplab::StarSplit split;
};

namespace {

using namespace mtplab;

thread_local std::string g_last_error;

mtp_status to_status(Errc c) {
  switch (c) {
    case Errc::dimension: return MTP_E_DIMENSION;
    case Errc::capacity: return MTP_E_CAPACITY;
    case Errc::parse: return MTP_E_PARSE;
    case Errc::singular_loss: return MTP_E_SINGULAR_LOSS;
    case Errc::evaluation: return MTP_E_EVALUATION;
    case Errc::generation: return MTP_E_GENERATION;
    case Errc::encoding: return MTP_E_ENCODING;
    case Errc::integration: return MTP_E_INTEGRATION;
    case Errc::divergence: return MTP_E_DIVERGENCE;
    case Errc::io: return MTP_E_IO;
    case Errc::invalid_argument: return MTP_E_INVALID_ARGUMENT;
  }
  return MTP_E_INTERNAL;
}

template <typename Fn>
mtp_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MTP_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MTP_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MTP_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw Error(Errc::invalid_argument, std::string(what) + " is null");
}

std::ofstream open_out(const char* path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, std::string("cannot open ") + path + " for writing");
  return out;
}

void write_file(const char* path, const std::string& body) {
  if (!path) return;
  auto out = open_out(path);
  out << body;
  if (!out) throw Error(Errc::io, std::string("write failed: ") + path);
}

Matrix& pick(DisentangledModel& m, int which) {
  switch (which) {
    case 0: return m.layer1.content;
    case 1: return m.layer1.positional;
    case 2: return m.layer2.content;
    case 3: return m.layer2.positional;
  }
  throw Error(Errc::invalid_argument, "matrix index must be 0..3");
}

std::vector<TrainingExample> seeded_stars(std::size_t count, std::uint64_t seed) {
  std::vector<TrainingExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(encode(gen_star(2, 3, 10, seed + i), 10, 10));
  return out;
}

TrainConfig from_c(const mtp_train_config& c) {
  TrainConfig t;
  switch (c.objective) {
    case MTP_OBJ_MTP: t.objective = Objective::mtp; break;
    case MTP_OBJ_MTP_NO_AR: t.objective = Objective::mtp_no_ar; break;
    case MTP_OBJ_NTP: t.objective = Objective::ntp; break;
    case MTP_OBJ_CASCADED: t.objective = Objective::cascaded; break;
    default: throw Error(Errc::invalid_argument, "unknown objective");
  }
  t.learning_rate = c.learning_rate;
  t.batch_size = c.batch_size;
  t.epochs = c.epochs;
  t.seed = c.seed;
  t.init = c.init_uniform ? InitKind::uniform : InitKind::zero;
  t.init_scale = c.init_scale;
  t.pin_content1 = c.pin_content1 != 0;
  t.eval_every = c.eval_every;
  t.gamma_phase1 = c.gamma_phase1;
  t.phase1_epochs = c.phase1_epochs;
  t.toeplitz_phase1 = c.toeplitz_phase1 != 0;
  t.phase2_target = c.phase2_target;
  t.validate();
  return t;
}

mtp_eval_report to_c(const EvalReport& r) {
  mtp_eval_report o{};
  o.count = r.count;
  o.v_accuracy = r.v_accuracy;
  o.full_path_accuracy = r.full_path_accuracy;
  o.ar_step_accuracy = r.ar_step_accuracy;
  o.s1_concentration = r.s1_concentration;
  o.s2_concentration = r.s2_concentration;
  o.loss_total = r.loss.total;
  o.l1a = r.loss.l1a;
  o.l1b = r.loss.l1b;
  o.l2 = r.loss.l2;
  return o;
}

}  // namespace

extern "C" {

const char* mtp_version(void) { return "0.1.0"; }

const char* mtp_status_name(mtp_status s) {
  switch (s) {
    case MTP_OK: return "ok";
    case MTP_E_DIMENSION: return "dimension";
    case MTP_E_CAPACITY: return "capacity";
    case MTP_E_PARSE: return "parse";
    case MTP_E_SINGULAR_LOSS: return "singular_loss";
    case MTP_E_EVALUATION: return "evaluation";
    case MTP_E_GENERATION: return "generation";
    case MTP_E_ENCODING: return "encoding";
    case MTP_E_INTEGRATION: return "integration";
    case MTP_E_DIVERGENCE: return "divergence";
    case MTP_E_IO: return "io";
    case MTP_E_INVALID_ARGUMENT: return "invalid_argument";
    case MTP_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mtp_last_error(void) { return g_last_error.c_str(); }

// ---------------------------------------------------------------- models

mtp_status mtp_model_zeros(size_t seq_len, size_t vocab, mtp_model** out) {
  return guard([&] {
    need(out, "out");
    if (seq_len == 0 || vocab == 0) throw Error(Errc::dimension, "T and N must be >= 1");
    *out = new mtp_model{DisentangledModel::zeros(seq_len, vocab)};
  });
}

mtp_status mtp_model_circuit(double gamma, size_t seq_len, size_t vocab, mtp_model** out) {
  return guard([&] {
    need(out, "out");
    *out = new mtp_model{construct_circuit(gamma, seq_len, vocab)};
  });
}

mtp_status mtp_model_load(const char* path, mtp_model** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, std::string("cannot open ") + path);
    *out = new mtp_model{load_checkpoint(in)};
  });
}

mtp_status mtp_model_save(const mtp_model* model, const char* path) {
  return guard([&] {
    need(model, "model");
    need(path, "path");
    auto out = open_out(path);
    save_checkpoint(model->m, out);
  });
}

mtp_status mtp_model_dims(const mtp_model* model, size_t* seq_len, size_t* vocab) {
  return guard([&] {
    need(model, "model");
    if (seq_len) *seq_len = model->m.seq_len();
    if (vocab) *vocab = model->m.vocab();
  });
}

mtp_status mtp_model_get(const mtp_model* model, int which, double* buf, size_t len) {
  return guard([&] {
    need(model, "model");
    need(buf, "buf");
    const Matrix& m = pick(const_cast<DisentangledModel&>(model->m), which);
    if (len != m.size()) throw Error(Errc::dimension, "buffer length does not match the matrix");
    std::copy(m.values().begin(), m.values().end(), buf);
  });
}

mtp_status mtp_model_set(mtp_model* model, int which, const double* buf, size_t len) {
  return guard([&] {
    need(model, "model");
    need(buf, "buf");
    Matrix& m = pick(model->m, which);
    if (len != m.size()) throw Error(Errc::dimension, "buffer length does not match the matrix");
    for (size_t i = 0; i < len; ++i)
      if (!std::isfinite(buf[i])) throw Error(Errc::invalid_argument, "weights must be finite");
    std::copy(buf, buf + len, m.values().begin());
  });
}

void mtp_model_free(mtp_model* model) { delete model; }

// -------------------------------------------------------------- datasets

mtp_status mtp_dataset_generate(size_t train_count, size_t eval_count, uint64_t seed,
                                mtp_dataset** out) {
  return guard([&] {
    need(out, "out");
    *out = new mtp_dataset{make_star_split(train_count, eval_count, seed)};
  });
}

mtp_status mtp_dataset_read(const char* path, double eval_fraction, mtp_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
      throw Error(Errc::invalid_argument, "eval_fraction must lie in (0, 1)");
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, std::string("cannot open ") + path);
    std::vector<StarInstance> graphs;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        auto g = parse_graph(line, GraphKind::star, PromptOrder::start_end, 10);
        if (seen.insert(star_identity(g)).second) graphs.push_back(std::move(g));
      } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    const auto n_eval = static_cast<std::size_t>(std::ceil(eval_fraction * graphs.size()));
    if (graphs.size() < 2 || n_eval == 0 || n_eval >= graphs.size())
      throw Error(Errc::capacity, "dataset too small to split");
    auto* d = new mtp_dataset{};
    try {
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        const bool held_out = i >= graphs.size() - n_eval;
        (held_out ? d->split.eval : d->split.train).push_back(encode(graphs[i], 10, 10));
        (held_out ? d->split.eval_graphs : d->split.train_graphs).push_back(graphs[i]);
      }
    } catch (...) {
      delete d;
      throw;
    }
    *out = d;
  });
}

mtp_status mtp_dataset_sizes(const mtp_dataset* data, size_t* train, size_t* eval) {
  return guard([&] {
    need(data, "data");
    if (train) *train = data->split.train.size();
    if (eval) *eval = data->split.eval.size();
  });
}

void mtp_dataset_free(mtp_dataset* data) { delete data; }

// ---------------------------------------------------------------- tasks

void mtp_gen_params_default(mtp_gen_params* p) {
  if (!p) return;
  p->path_count = 2;
  p->path_len = 3;
  p->node_count = 10;
  p->depth = 3;
  p->operand_count = 4;
}

mtp_status mtp_generate(const char* task, const mtp_gen_params* params, size_t count,
                        uint64_t seed, const char* out_path, mtp_gen_summary* summary) {
  return guard([&] {
    need(task, "task");
    need(params, "params");
    need(out_path, "out_path");
    const auto kind = task_from_name(task);
    if (!kind) throw Error(Errc::invalid_argument, std::string("unknown task '") + task + "'");
    auto out = open_out(out_path);
    mtp_gen_summary s{};
    for (size_t i = 0; i < count; ++i) {
      const std::uint64_t sd = seed + i;
      switch (*kind) {
        case TaskKind::star:
        case TaskKind::tree: {
          const auto g = *kind == TaskKind::star
                             ? gen_star(params->path_count, params->path_len, params->node_count, sd)
                             : gen_binary_tree(params->depth, sd);
          out << serialize(g) << '\n';
          s.mean_size += g.edges.size();
          s.mean_answer += g.path.size();
          try {
            validate_graph(g);
            ++s.verified;
          } catch (const Error&) {
          }
          break;
        }
        case TaskKind::countdown: {
          const auto c = gen_countdown(params->operand_count, sd);
          out << serialize(c) << '\n';
          s.mean_size += c.operands.size();
          s.mean_answer += c.target;
          s.verified += verify_countdown(c);
          break;
        }
        case TaskKind::sat: {
          const auto f = gen_sat(sd);
          out << serialize(f) << '\n';
          s.mean_size += f.clauses.size();
          s.mean_answer += std::count(f.witness.begin(), f.witness.end(), true);
          s.verified += verify_sat(f, f.witness);
          break;
        }
      }
    }
    if (!out) throw Error(Errc::io, std::string("write failed: ") + out_path);
    s.count = count;
    if (count) {
      s.mean_size /= count;
      s.mean_answer /= count;
    }
    if (summary) *summary = s;
  });
}

// ------------------------------------------------------------ gradients

mtp_status mtp_check_gradients(size_t trials, uint64_t seed, double tol, double epsilon,
                               const char* csv_path, mtp_grad_summary* summary) {
  return guard([&] {
    mtp_grad_summary s{};
    std::ostringstream csv;
    csv << "trial,name,max_rel_err,pass\n";
    for (size_t trial = 0; trial < trials; ++trial) {
      const auto ex = encode(gen_star(2, 3, 10, seed + trial), 10, 10);
      auto model = DisentangledModel::zeros(10, 10);
      std::mt19937_64 rng(seed + trial);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for_each_matrix(model, [&](int, Matrix& m) {
        for (double& v : m.values()) v = u(rng);
      });
      const auto rep = check_grad(model, ex, epsilon, tol);
      s.passed += rep.pass;
      for (int k = 0; k < 4; ++k) s.worst_rel_err[k] = std::max(s.worst_rel_err[k], rep.max_rel_err[k]);
      std::istringstream rows(rep.to_csv());
      for (std::string row; std::getline(rows, row);) csv << trial << ',' << row << '\n';
      const auto tr = forward(model, ex.context, Layer2Rows::last);
      const auto gs = grad_shallow(tr, ex.context, ex.y2);
      s.shallow_layer2_max = std::max(
          {s.shallow_layer2_max, gs.layer2.content.max_abs(), gs.layer2.positional.max_abs()});
    }
    s.trials = trials;
    write_file(csv_path, csv.str());
    if (summary) *summary = s;
  });
}

// --------------------------------------------------------------- circuit

mtp_status mtp_verify_circuit(const double* gammas, size_t gamma_count, size_t example_count,
                              uint64_t seed, double stationary_gamma, const char* csv_path,
                              mtp_circuit_summary* summary) {
  return guard([&] {
    need(gammas, "gammas");
    const auto examples = seeded_stars(example_count, seed);
    const auto rows = gamma_sweep(std::vector<double>(gammas, gammas + gamma_count), examples);
    write_file(csv_path, sweep_csv(rows));
    const auto v = judge_sweep(rows);

    mtp_circuit_summary s{};
    s.loss_slope = v.loss_slope;
    s.grad_slope = v.grad_slope;
    s.noar_loss_slope = v.noar_loss_slope;
    s.noar_grad_slope = v.noar_grad_slope;
    s.loss_decays = v.loss_decays;
    s.grad_decays = v.grad_decays;
    s.loss_monotone = v.loss_monotone;
    s.stationary_gamma = stationary_gamma;
    s.conditions_hold = 1;
    s.implication_holds = 1;
    s.min_l1b = INFINITY;
    const auto model = construct_circuit(stationary_gamma, 10, 10);
    double collapsed = 0;
    for (const auto& ex : examples) {
      const auto tr = forward(model, ex.context, Layer2Rows::last);
      const auto r = ar_collapse_probe(model, ex);
      s.conditions_hold &= check_stationary(tr, ex, 1e-6).both();
      s.max_grad_total = std::max(s.max_grad_total, r.grad_max);
      s.max_grad_noar = std::max(s.max_grad_noar, r.noar_grad_max);
      s.min_l1b = std::min(s.min_l1b, r.loss.l1b);
      collapsed += r.ar_argmax == ex.y1;
      if (check_stationary(tr, ex, 1e-8).both() && r.grad_max > 1e-6) s.implication_holds = 0;
    }
    s.ar_collapse_rate = collapsed / static_cast<double>(examples.size());
    s.pass = s.loss_decays && s.grad_decays && s.loss_monotone && s.conditions_hold &&
             s.max_grad_total <= 1e-8 && s.min_l1b >= 20.0 && s.implication_holds;
    if (summary) *summary = s;
  });
}

// -------------------------------------------------------------- dynamics

mtp_status mtp_dynamics_phase1(double step, size_t steps, uint64_t seed, const char* csv_path,
                               mtp_phase1_summary* summary) {
  return guard([&] {
    mtp_phase1_summary s{};
    s.gap_at_zero = phase1_rhs({}).gap();
    const auto traj = integrate_phase1({}, step, steps);
    write_file(csv_path, phase1_csv(traj));
    s.final_s_p = traj.back().s_p;
    for (const auto& p : traj) {
      if (p.s_p >= 0.999) {
        s.first_step_reaching = p.step;
        break;
      }
    }
    s.gap_positive = 1;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double w_c = -5.0 + i, delta = 1.5 * j;
        s.gap_positive &= phase1_rhs({w_c + delta, w_c, 0.0}).gap() > 0.0;
      }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> wc(-10.0, 10.0), gap(0.0, 15.0);
    for (int i = 0; i < 10000; ++i) {
      const double c = wc(rng);
      s.gap_positive &= phase1_rhs({c + gap(rng), c, 0.0}).gap() > 0.0;
    }
    s.pass = std::abs(s.gap_at_zero - 7.0 / 16.0) <= 1e-15 && s.gap_positive &&
             s.final_s_p >= 0.999;
    if (summary) *summary = s;
  });
}

mtp_status mtp_dynamics_ntp_field(size_t seq_len, const char* csv_path,
                                  mtp_ntp_field_summary* summary) {
  return guard([&] {
    if (seq_len < 3 || seq_len > 17) throw Error(Errc::invalid_argument, "T must be in [3, 17]");
    const auto coeff = ntp_expected_grad_coefficients(seq_len);
    const auto emp = ntp_expected_grad_empirical(seq_len);
    const auto closed = ntp_expected_grad_closed(seq_len, emp.mu0);
    mtp_ntp_field_summary s{};
    s.mu0 = emp.mu0;
    s.signs_ok = 1;
    std::ostringstream csv;
    csv.precision(17);
    csv << "k,coefficient,closed,empirical\n";
    for (std::size_t k = 1; k < seq_len; ++k) {
      s.closed[k - 1] = closed.at(k);
      s.empirical[k - 1] = emp.at(k);
      s.worst_rel_err = std::max(s.worst_rel_err, std::abs(emp.at(k) / closed.at(k) - 1.0));
      s.signs_ok &= k == 1 ? emp.at(k) > 0.0 : emp.at(k) < 0.0;
      csv << k << ',' << coeff[k - 1] << ',' << closed.at(k) << ',' << emp.at(k) << '\n';
    }
    write_file(csv_path, csv.str());
    s.constants_ok = -1;
    if (seq_len == 10) {
      s.constants_ok = coeff[0] == Rational(548, 648000);
      for (std::size_t k = 2; k <= 8; ++k) s.constants_ok &= coeff[k - 1] == Rational(-2096, 5184000);
    }
    s.pass = s.worst_rel_err <= 1e-9 && s.signs_ok && s.constants_ok != 0;
    if (summary) *summary = s;
  });
}

mtp_status mtp_dynamics_phase2(size_t example_count, uint64_t seed, double gamma_frozen,
                               double learning_rate, size_t max_steps, const char* csv_path,
                               mtp_phase2_summary* summary) {
  return guard([&] {
    PhaseTwoConfig cfg;
    cfg.gamma_frozen = gamma_frozen;
    cfg.learning_rate = learning_rate;
    cfg.max_steps = max_steps;
    const auto rep = phase2_simulate(seeded_stars(example_count, seed), cfg);
    write_file(csv_path, phase2_csv(rep.trajectory));
    mtp_phase2_summary s{};
    s.steps = rep.trajectory.back().step;
    s.converged = rep.converged;
    s.diag_increasing = rep.diag_increasing;
    s.offdiag_negative = rep.offdiag_negative;
    s.offdiag_bounded = rep.offdiag_bounded;
    s.self_mask_decreasing = rep.self_mask_decreasing;
    s.self_mask_peak_step = rep.self_mask_peak_step;
    s.outside_row_zero = rep.outside_row_zero;
    s.rank1_positional = rep.rank1_positional;
    s.rank1_content = rep.rank1_content;
    s.content_match = rep.content_match;
    s.final_s2_mass = rep.trajectory.back().s2_mass;
    s.pass = rep.converged && rep.diag_increasing && rep.offdiag_negative && rep.offdiag_bounded &&
             rep.outside_row_zero && rep.rank1_positional && rep.rank1_content && rep.content_match;
    if (summary) *summary = s;
  });
}

// -------------------------------------------------------------- training

void mtp_train_config_default(mtp_train_config* c) {
  if (!c) return;
  const TrainConfig d;
  c->objective = MTP_OBJ_MTP;
  c->learning_rate = d.learning_rate;
  c->batch_size = d.batch_size;
  c->epochs = d.epochs;
  c->seed = d.seed;
  c->init_uniform = d.init == InitKind::uniform;
  c->init_scale = d.init_scale;
  c->pin_content1 = d.pin_content1;
  c->eval_every = d.eval_every;
  c->gamma_phase1 = d.gamma_phase1;
  c->phase1_epochs = d.phase1_epochs;
  c->toeplitz_phase1 = d.toeplitz_phase1;
  c->phase2_target = d.phase2_target;
}

mtp_status mtp_objective_from_name(const char* name, mtp_objective* out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    const auto o = objective_from_name(name);
    if (!o) throw Error(Errc::invalid_argument, std::string("unknown objective '") + name + "'");
    *out = static_cast<mtp_objective>(static_cast<int>(*o));
  });
}

mtp_status mtp_train(const mtp_train_config* config, const mtp_dataset* data,
                     const char* metrics_path, mtp_model** out, mtp_train_summary* summary) {
  return guard([&] {
    need(config, "config");
    need(data, "data");
    const TrainConfig cfg = from_c(*config);
    std::ofstream metrics;
    if (metrics_path) {
      metrics = open_out(metrics_path);
      metrics << metrics_header() << '\n';
    }
    MetricSink sink;
    if (metrics_path) sink = [&](const MetricRecord& r) { metrics << metrics_line(r) << '\n'; };
    auto res = train(cfg, data->split.train, data->split.eval, sink);
    if (metrics_path && !metrics) throw Error(Errc::io, std::string("write failed: ") + metrics_path);
    if (summary) {
      mtp_train_summary s{};
      s.records = res.metrics.size();
      s.diverged = res.diverged;
      s.decoupling_held = res.decoupling_held;
      s.final_eval = to_c(evaluate(res.model, data->split.eval));
      s.phase1_s1_concentration = res.phase1_s1_concentration;
      s.phase2_rank1 = res.phase2 && res.phase2->rank1_positional;
      s.phase2_converged = res.phase2 && res.phase2->converged;
      *summary = s;
    }
    if (out) *out = new mtp_model{std::move(res.model)};
  });
}

mtp_status mtp_evaluate(const mtp_model* model, const mtp_dataset* data, mtp_eval_report* report) {
  return guard([&] {
    need(model, "model");
    need(data, "data");
    need(report, "report");
    *report = to_c(evaluate(model->m, data->split.eval));
  });
}

// --------------------------------------------------------------- heatmap

mtp_status mtp_heatmap(const mtp_model* model, const char* instance_line, const char* csv_path,
                       const char* svg_path, double* s2_mass_at_end) {
  return guard([&] {
    need(model, "model");
    need(instance_line, "instance_line");
    const auto& m = model->m;
    const auto g = parse_graph(instance_line, GraphKind::star, PromptOrder::start_end, m.vocab());
    const auto ex = encode(g, m.seq_len(), m.vocab());
    const auto tr = forward(m, ex.context, Layer2Rows::all);
    if (csv_path) {
      auto out = open_out(csv_path);
      write_attention_csv(tr, out);
    }
    if (svg_path) write_file(svg_path, attention_svg(tr, ex.context));
    if (s2_mass_at_end) *s2_mass_at_end = tr.S2(m.seq_len() - 1, ex.t_end_ctx);
  });
}

}  // extern "C"
