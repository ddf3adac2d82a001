#include "mtplab/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "mtplab/error.hpp"
#include "mtplab/grad.hpp"
#include "parallel.hpp"

namespace mtplab {

std::optional<Objective> objective_from_name(std::string_view name) {
  if (name == "mtp") return Objective::mtp;
  if (name == "mtp-no-ar") return Objective::mtp_no_ar;
  if (name == "ntp") return Objective::ntp;
  if (name == "cascaded") return Objective::cascaded;
  return std::nullopt;
}

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::mtp: return "mtp";
    case Objective::mtp_no_ar: return "mtp-no-ar";
    case Objective::ntp: return "ntp";
    case Objective::cascaded: return "cascaded";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw Error(Errc::invalid_argument, "learning_rate must be finite and >= 0");
  if (init == InitKind::uniform && !(init_scale >= 0.0))
    throw Error(Errc::invalid_argument, "init_scale must be >= 0");
  if (objective == Objective::cascaded && !(gamma_phase1 > 0.0))
    throw Error(Errc::invalid_argument, "gamma_phase1 must be > 0");
  if (objective == Objective::cascaded && !(phase2_target > 0.0 && phase2_target < 1.0))
    throw Error(Errc::invalid_argument, "phase2_target must be in (0, 1)");
  if (eval_every == 0) throw Error(Errc::invalid_argument, "eval_every must be >= 1");
}

namespace {

struct EvalSums {
  double v = 0, path = 0, ar = 0, s1 = 0, s2 = 0;
  LossBreakdown loss;
};

void add_loss(LossBreakdown& acc, const LossBreakdown& x) {
  acc.total += x.total;
  acc.l1a += x.l1a;
  acc.l1b += x.l1b;
  acc.l2 += x.l2;
  acc.clamped = acc.clamped || x.clamped;
}

void scale_loss(LossBreakdown& l, double k) {
  l.total *= k;
  l.l1a *= k;
  l.l1b *= k;
  l.l2 *= k;
}

}  // namespace

EvalReport evaluate(const DisentangledModel& model, const std::vector<TrainingExample>& eval_set) {
  if (eval_set.empty()) throw Error(Errc::invalid_argument, "empty evaluation set");
  const std::size_t t = model.seq_len();
  const auto sums = detail::chunked_reduce(
      eval_set.size(),
      [&](std::size_t lo, std::size_t hi) {
        EvalSums s;
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& ex = eval_set[i];
          const auto tr = forward(model, ex.context, Layer2Rows::last);
          const auto trp = forward(model, ar_context(ex), Layer2Rows::last);
          const bool v_ok = argmax(tr.f1) + 1 == ex.y1;
          const bool end_ok = argmax(tr.f2) + 1 == ex.y2;
          s.v += v_ok;
          s.path += v_ok && end_ok;
          s.ar += argmax(trp.f1) + 1 == ex.y2;
          s.s1 += tr.S1(t - 1, t - 2);
          s.s2 += tr.S2(t - 1, ex.t_end_ctx);
          LossBreakdown l;
          l.l1a = neg_log(tr.f1[ex.y1 - 1], &l.clamped);
          l.l1b = neg_log(trp.f1[ex.y2 - 1], &l.clamped);
          l.l2 = neg_log(tr.f2[ex.y2 - 1], &l.clamped);
          l.total = 0.5 * (0.5 * (l.l1a + l.l1b) + l.l2);
          add_loss(s.loss, l);
        }
        return s;
      },
      [](EvalSums& acc, const EvalSums& p) {
        acc.v += p.v;
        acc.path += p.path;
        acc.ar += p.ar;
        acc.s1 += p.s1;
        acc.s2 += p.s2;
        add_loss(acc.loss, p.loss);
      },
      EvalSums{});
  const double k = 1.0 / static_cast<double>(eval_set.size());
  EvalReport r;
  r.count = eval_set.size();
  r.v_accuracy = sums.v * k;
  r.full_path_accuracy = sums.path * k;
  r.ar_step_accuracy = sums.ar * k;
  r.s1_concentration = sums.s1 * k;
  r.s2_concentration = sums.s2 * k;
  r.loss = sums.loss;
  scale_loss(r.loss, k);
  return r;
}

std::string metrics_header() {
  return "epoch,loss_total,L1a,L1b,L2,v_acc,path_acc,s1_conc,s2_conc";
}

std::string metrics_line(const MetricRecord& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.epoch << ',' << r.train_loss.total << ',' << r.train_loss.l1a << ',' << r.train_loss.l1b
     << ',' << r.train_loss.l2 << ',' << r.eval.v_accuracy << ',' << r.eval.full_path_accuracy
     << ',' << r.eval.s1_concentration << ',' << r.eval.s2_concentration;
  return os.str();
}

DisentangledModel init_model(std::size_t seq_len, std::size_t vocab, const TrainConfig& config) {
  config.validate();
  auto m = DisentangledModel::zeros(seq_len, vocab);
  if (config.init == InitKind::uniform && config.init_scale > 0.0) {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u(-config.init_scale, config.init_scale);
    for_each_matrix(m, [&](int, Matrix& w) {
      for (double& v : w.values()) v = u(rng);
    });
  }
  return m;
}

namespace {

struct Pass {
  GradSet grad;
  GradSet shallow;  // kept apart so decoupling can be checked
  LossBreakdown loss;
};

// Summed (not averaged) gradient and losses of the objective over idx.
Pass batch_pass(const DisentangledModel& model, const std::vector<TrainingExample>& data,
                const std::vector<std::size_t>& idx, Objective objective) {
  const std::size_t t = model.seq_len(), n = model.vocab();
  auto fresh = [&] { return Pass{GradSet::zeros(t, n), GradSet::zeros(t, n), {}}; };
  return detail::chunked_reduce(
      idx.size(),
      [&](std::size_t lo, std::size_t hi) {
        Pass p = fresh();
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& ex = data[idx[i]];
          const auto& z = ex.context;
          const auto tr = forward(model, z, Layer2Rows::last);
          LossBreakdown l;
          l.l1a = neg_log(tr.f1[ex.y1 - 1], &l.clamped);
          if (objective == Objective::ntp) {
            l.total = l.l1a;
            add_grad_deep(tr, z, ex.y1, 1.0, p.grad);
          } else {
            l.l2 = neg_log(tr.f2[ex.y2 - 1], &l.clamped);
            add_grad_deep(tr, z, ex.y1, 0.25, p.grad);
            add_grad_shallow(tr, z, ex.y2, 0.5, p.shallow);
            if (objective == Objective::mtp) {
              const auto zp = ar_context(ex);
              const auto trp = forward(model, zp, Layer2Rows::last);
              l.l1b = neg_log(trp.f1[ex.y2 - 1], &l.clamped);
              add_grad_deep(trp, zp, ex.y2, 0.25, p.grad);
              l.total = 0.5 * (0.5 * (l.l1a + l.l1b) + l.l2);
            } else {
              l.total = l.without_ar();
            }
          }
          add_loss(p.loss, l);
        }
        return p;
      },
      [](Pass& acc, const Pass& part) {
        acc.grad += part.grad;
        acc.shallow += part.shallow;
        add_loss(acc.loss, part.loss);
      },
      fresh());
}

bool loss_finite(const LossBreakdown& l) {
  return std::isfinite(l.total) && std::isfinite(l.l1a) && std::isfinite(l.l1b) &&
         std::isfinite(l.l2);
}

// Sums W[r][r-k] along each sub-diagonal; index k = offset.
std::vector<double> offset_sums(const Matrix& m) {
  std::vector<double> g(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t k = 0; k <= r; ++k) g[k] += m(r, r - k);
  return g;
}

Matrix toeplitz(const std::vector<double>& w) {
  Matrix m(w.size(), w.size());
  for (std::size_t r = 0; r < w.size(); ++r)
    for (std::size_t k = 0; k <= r; ++k) m(r, r - k) = w[k];
  return m;
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::vector<TrainingExample>& train_set,
                  const std::vector<TrainingExample>& eval_set, const MetricSink& sink) {
  config.validate();
  if (config.objective == Objective::cascaded) return train_cascaded(config, train_set, eval_set, sink);
  if (train_set.empty() || eval_set.empty())
    throw Error(Errc::invalid_argument, "training needs nonempty train and eval sets");
  const std::size_t t = train_set.front().context.seq_len();
  const std::size_t n = train_set.front().context.vocab();

  TrainResult res;
  res.model = init_model(t, n, config);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = config.batch_size == 0 ? order.size() : std::min(config.batch_size, order.size());
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  auto record = [&](std::size_t epoch, const LossBreakdown& loss) {
    MetricRecord m{epoch, loss, evaluate(res.model, eval_set)};
    res.metrics.push_back(m);
    if (sink) sink(m);
  };

  for (std::size_t epoch = 0;; ++epoch) {
    if (bs < order.size()) std::shuffle(order.begin(), order.end(), rng);
    LossBreakdown epoch_loss;
    bool stop = epoch == config.epochs;
    for (std::size_t lo = 0; lo < order.size(); lo += bs) {
      const std::vector<std::size_t> idx(order.begin() + lo,
                                         order.begin() + std::min(order.size(), lo + bs));
      Pass p;
      try {
        p = batch_pass(res.model, train_set, idx, config.objective);
      } catch (const Error& e) {
        if (e.code() != Errc::singular_loss) throw;
        res.diverged = true;
        break;
      }
      add_loss(epoch_loss, p.loss);
      res.decoupling_held = res.decoupling_held && p.shallow.layer2.content.max_abs() == 0.0 &&
                            p.shallow.layer2.positional.max_abs() == 0.0;
      p.grad += p.shallow;
      if (!loss_finite(p.loss) || !p.grad.all_finite()) {
        res.diverged = true;
        break;
      }
      if (stop) continue;  // final pass only measures the loss
      if (config.pin_content1) p.grad.layer1.content *= 0.0;
      p.grad *= -config.learning_rate / static_cast<double>(idx.size());
      DisentangledModel next = res.model;
      next.layer1.content += p.grad.layer1.content;
      next.layer1.positional += p.grad.layer1.positional;
      next.layer2.content += p.grad.layer2.content;
      next.layer2.positional += p.grad.layer2.positional;
      res.model = std::move(next);
    }
    if (res.diverged) {
      record(epoch, epoch_loss);
      break;
    }
    // Losses are measured before this epoch's updates.
    scale_loss(epoch_loss, 1.0 / static_cast<double>(order.size()));
    if (stop || epoch % config.eval_every == 0) record(epoch, epoch_loss);
    if (stop) break;
  }
  return res;
}

TrainResult train_cascaded(const TrainConfig& config, const std::vector<TrainingExample>& train_set,
                           const std::vector<TrainingExample>& eval_set, const MetricSink& sink) {
  config.validate();
  if (train_set.empty() || eval_set.empty())
    throw Error(Errc::invalid_argument, "training needs nonempty train and eval sets");
  const std::size_t t = train_set.front().context.seq_len();
  const std::size_t n = train_set.front().context.vocab();
  TrainResult res;
  res.model = DisentangledModel::zeros(t, n);
  if (config.phase1_epochs == 0 && config.epochs == 0) return res;

  auto emit = [&](std::size_t epoch, const LossBreakdown& loss) {
    MetricRecord m{epoch, loss, evaluate(res.model, eval_set)};
    res.metrics.push_back(m);
    if (sink) sink(m);
  };

  // Phase I: layer 1 on the shallow loss, content weights pinned at zero.
  std::vector<std::size_t> all(train_set.size());
  std::iota(all.begin(), all.end(), 0);
  const double k = 1.0 / static_cast<double>(all.size());
  std::vector<double> offsets(t, 0.0);
  for (std::size_t epoch = 0; epoch <= config.phase1_epochs; ++epoch) {
    // Only the shallow term is needed; mtp_no_ar carries it in p.shallow.
    const Pass p = batch_pass(res.model, train_set, all, Objective::mtp_no_ar);
    LossBreakdown loss = p.loss;
    scale_loss(loss, k);
    if (epoch == config.phase1_epochs || epoch % config.eval_every == 0) emit(epoch, loss);
    if (epoch == config.phase1_epochs) break;
    // p.shallow carries 0.5 * dL2; undo the weight.
    Matrix g = p.shallow.layer1.positional;
    g *= -config.learning_rate * 2.0 * k;
    if (config.toeplitz_phase1) {
      const auto go = offset_sums(g);
      for (std::size_t o = 0; o < t; ++o) offsets[o] += go[o];
      res.model.layer1.positional = toeplitz(offsets);
    } else {
      res.model.layer1.positional += g;
    }
  }
  res.phase1_s1_concentration = evaluate(res.model, train_set).s1_concentration;

  // Phase II: layer 1 frozen at its pointer limit, layer 2 from zero on L1a.
  PhaseTwoConfig p2;
  p2.gamma_frozen = config.gamma_phase1;
  p2.learning_rate = config.learning_rate;
  p2.max_steps = config.epochs;
  p2.target_mass = config.phase2_target;
  res.phase2 = phase2_simulate(train_set, p2);
  res.model = res.phase2->model;
  const LossBreakdown final_loss = evaluate(res.model, train_set).loss;
  emit(config.phase1_epochs + res.phase2->trajectory.back().step, final_loss);
  return res;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string star_identity(const StarInstance& g) {
  auto edges = g.edges;
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  std::ostringstream os;
  os << g.start << '>' << g.end << ':';
  for (const auto& e : edges) os << e.from << ',' << e.to << ';';
  return os.str();
}

StarSplit make_star_split(std::size_t train_count, std::size_t eval_count, std::uint64_t seed,
                          std::size_t seq_len, std::size_t vocab) {
  StarSplit split;
  std::set<std::string> seen;
  const std::size_t want = train_count + eval_count;
  const std::size_t budget = 64 * want + 1024;
  for (std::uint64_t i = 0; split.train.size() + split.eval.size() < want; ++i) {
    if (i >= budget) throw Error(Errc::capacity, "not enough distinct star graphs for the split");
    auto g = gen_star(2, 3, vocab, splitmix64(seed * 0x100000001b3ULL + i));
    if (!seen.insert(star_identity(g)).second) continue;
    auto ex = encode(g, seq_len, vocab);
    if (split.train.size() < train_count) {
      split.train.push_back(std::move(ex));
      split.train_graphs.push_back(std::move(g));
    } else {
      split.eval.push_back(std::move(ex));
      split.eval_graphs.push_back(std::move(g));
    }
  }
  return split;
}

}  // namespace mtplab
