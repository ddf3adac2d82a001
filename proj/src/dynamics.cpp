#include "mtplab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mtplab/error.hpp"
#include "mtplab/grad.hpp"
#include "mtplab/circuit.hpp"
#include "parallel.hpp"

namespace mtplab {

namespace {

void require_toeplitz_len(std::size_t seq_len) {
  if (seq_len < 3) throw Error(Errc::dimension, "Toeplitz reduction needs T >= 3");
}

}  // namespace

ToeplitzWeights toeplitz_softmax(const ToeplitzState& s, std::size_t seq_len) {
  require_toeplitz_len(seq_len);
  const double ctx = static_cast<double>(seq_len - 2);
  const double m = std::max({s.w_p, s.w_c, s.w_q});
  const double ep = std::exp(s.w_p - m), ec = std::exp(s.w_c - m), eq = std::exp(s.w_q - m);
  const double z = ep + ctx * ec + eq;
  return {ep / z, ec / z, eq / z};
}

PhaseOneRate phase1_rhs(const ToeplitzState& state, std::size_t seq_len) {
  const auto w = toeplitz_softmax(state, seq_len);
  const double ctx = static_cast<double>(seq_len - 2);
  const double hit = w.s_p + w.s_c;
  return {-w.s_p + w.s_p / hit, -w.s_c + (1.0 / ctx) * w.s_c / hit};
}

std::vector<PhaseOnePoint> integrate_phase1(const ToeplitzState& initial, double step,
                                            std::size_t steps, std::size_t seq_len) {
  if (!(step >= 0.0) || !std::isfinite(step))
    throw Error(Errc::invalid_argument, "Euler step must be finite and >= 0");
  std::vector<PhaseOnePoint> out;
  out.reserve(steps + 1);
  ToeplitzState s = initial;
  for (std::size_t k = 0;; ++k) {
    const auto w = toeplitz_softmax(s, seq_len);
    if (!std::isfinite(s.w_p) || !std::isfinite(s.w_c) || !std::isfinite(w.s_p)) {
      throw Error(Errc::integration, "state became non-finite after step " +
                                         std::to_string(out.empty() ? 0 : out.back().step));
    }
    out.push_back({k, s.w_p, s.w_c, w.s_p, s.w_p - s.w_c});
    if (k == steps) break;
    const auto r = phase1_rhs(s, seq_len);
    s.w_p += step * r.dw_p;
    s.w_c += step * r.dw_c;
  }
  return out;
}

std::string phase1_csv(const std::vector<PhaseOnePoint>& trajectory) {
  std::ostringstream os;
  os.precision(17);
  os << "step,w_p,w_c,s_p,delta\n";
  for (const auto& p : trajectory)
    os << p.step << ',' << p.w_p << ',' << p.w_c << ',' << p.s_p << ',' << p.delta << '\n';
  return os.str();
}

std::vector<Rational> ntp_expected_grad_coefficients(std::size_t seq_len) {
  require_toeplitz_len(seq_len);
  const auto t = static_cast<std::int64_t>(seq_len);
  const Rational inv_t(1, t);
  const Rational far(1, (t - 1) * (t - 1) * (t - 2));  // missed target, uniform row
  const Rational near(2, t * t * (t - 2));
  std::vector<Rational> c(seq_len - 1);
  c[0] = inv_t * (Rational(1, t * t) - far);
  for (std::size_t k = 2; k + 1 < seq_len; ++k) c[k - 1] = -(inv_t * (far + near));
  // The oldest offset only exists on the last row, so the far term drops out.
  c[seq_len - 2] = -(inv_t * near);
  return c;
}

OffsetGradient ntp_expected_grad_closed(std::size_t seq_len, double mu0) {
  if (!(mu0 > 0.0)) throw Error(Errc::invalid_argument, "mu0 must be > 0");
  OffsetGradient g;
  g.mu0 = mu0;
  for (const auto& c : ntp_expected_grad_coefficients(seq_len)) g.values.push_back(c.value() / mu0);
  return g;
}

OffsetGradient ntp_expected_grad_empirical(std::size_t seq_len) {
  require_toeplitz_len(seq_len);
  std::vector<NodeId> labels(seq_len);
  for (std::size_t i = 0; i < seq_len; ++i) labels[i] = static_cast<NodeId>(i + 1);
  const ContentMatrix z(labels, seq_len);
  const auto model = DisentangledModel::zeros(seq_len, seq_len);
  const auto trace = forward(model, z, Layer2Rows::last);

  const std::size_t placements = seq_len - 2;
  std::vector<double> dmu(seq_len - 1, 0.0);
  double mu_sum = 0.0;
  for (std::size_t p = 0; p < placements; ++p) {
    const NodeId y = labels[p];
    const double mu = trace.f1[y - 1];
    const Matrix dA = deep_logit_grad(trace, z, y);  // of -log mu
    for (std::size_t k = 1; k < seq_len; ++k) {
      double g = 0.0;
      for (std::size_t r = k; r < seq_len; ++r) g += dA(r, r - k);
      dmu[k - 1] += -mu * g;
    }
    mu_sum += mu;
  }
  OffsetGradient out;
  out.mu0 = mu_sum / static_cast<double>(placements);
  for (double d : dmu) out.values.push_back(-(d / static_cast<double>(placements)) / out.mu0);
  return out;
}

namespace {

struct PhaseTwoBatch {
  GradSet grad;
  double s2_mass = 0.0;
  double s2_min = 1.0;
  bool rank1_positional = true;
  bool rank1_content = true;
};

bool rows_outside_zero(const Matrix& m, std::size_t keep) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i == keep) continue;
    for (double v : m.row(i))
      if (v != 0.0) return false;
  }
  return true;
}

}  // namespace

PhaseTwoReport phase2_simulate(const std::vector<TrainingExample>& examples,
                               const PhaseTwoConfig& config) {
  if (examples.empty()) throw Error(Errc::invalid_argument, "phase II needs examples");
  if (!(config.learning_rate >= 0.0))
    throw Error(Errc::invalid_argument, "learning rate must be >= 0");
  const std::size_t t = examples.front().context.seq_len();
  const std::size_t n = examples.front().context.vocab();
  const std::size_t query = t - 2;

  PhaseTwoReport rep;
  rep.model = DisentangledModel::zeros(t, n);
  rep.model.layer1.positional = Matrix::lower_shift(t);
  rep.model.layer1.positional *= config.gamma_frozen;
  rep.rank1_positional = rep.rank1_content = true;
  const double scale = 1.0 / static_cast<double>(examples.size());

  for (std::size_t step = 0;; ++step) {
    const auto& model = rep.model;
    auto batch = detail::chunked_reduce(
        examples.size(),
        [&](std::size_t lo, std::size_t hi) {
          PhaseTwoBatch b{GradSet::zeros(t, n)};
          for (std::size_t i = lo; i < hi; ++i) {
            const auto& ex = examples[i];
            const auto tr = forward(model, ex.context, Layer2Rows::last);
            const auto g = grad_deep_layer2(tr, ex.context, ex.y1);
            b.rank1_positional = b.rank1_positional && rows_outside_zero(g.layer2.positional, query);
            b.rank1_content =
                b.rank1_content && rows_outside_zero(g.layer2.content, ex.context.column(query));
            b.s2_mass += tr.S2(t - 1, ex.t_end_ctx);
            b.s2_min = std::min(b.s2_min, tr.S2(t - 1, ex.t_end_ctx));
            b.grad += g;
          }
          return b;
        },
        [](PhaseTwoBatch& acc, const PhaseTwoBatch& part) {
          acc.grad += part.grad;
          acc.s2_mass += part.s2_mass;
          acc.s2_min = std::min(acc.s2_min, part.s2_min);
          acc.rank1_positional = acc.rank1_positional && part.rank1_positional;
          acc.rank1_content = acc.rank1_content && part.rank1_content;
        },
        PhaseTwoBatch{GradSet::zeros(t, n)});

    PhaseTwoPoint pt;
    pt.step = step;
    const Matrix& w0 = model.layer2.content;
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) (i == j ? pt.diag_mean : off) += w0(i, j);
    pt.diag_mean /= static_cast<double>(n);
    pt.offdiag_mean = n > 1 ? off / static_cast<double>(n * (n - 1)) : 0.0;
    pt.self_mask = model.layer2.positional(query, query);
    pt.s2_mass = batch.s2_mass * scale;
    pt.s2_min = batch.s2_min;
    rep.trajectory.push_back(pt);
    rep.rank1_positional = rep.rank1_positional && batch.rank1_positional;
    rep.rank1_content = rep.rank1_content && batch.rank1_content;

    if (pt.s2_min >= config.target_mass) {
      rep.converged = true;
      break;
    }
    if (step >= config.max_steps) break;
    if (!batch.grad.all_finite()) throw Error(Errc::divergence, "phase II gradient is not finite");
    batch.grad *= -config.learning_rate * scale;
    rep.model.layer2.content += batch.grad.layer2.content;
    rep.model.layer2.positional += batch.grad.layer2.positional;
  }

  const auto& tr = rep.trajectory;
  rep.diag_increasing = rep.self_mask_decreasing = true;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    rep.diag_increasing = rep.diag_increasing && tr[i].diag_mean > tr[i - 1].diag_mean;
    rep.self_mask_decreasing = rep.self_mask_decreasing && tr[i].self_mask < tr[i - 1].self_mask;
  }
  rep.self_mask_peak_step = tr.size() - 1;
  while (rep.self_mask_peak_step > 0 &&
         tr[rep.self_mask_peak_step].self_mask < tr[rep.self_mask_peak_step - 1].self_mask)
    --rep.self_mask_peak_step;
  rep.offdiag_negative = tr.back().offdiag_mean < 0.0;

  // Boundedness checked on the final weights: no off-diagonal entry of W0_2
  // outgrows the diagonal.
  const Matrix& w0 = rep.model.layer2.content;
  double max_diag = 0.0, max_off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      (i == j ? max_diag : max_off) = std::max(i == j ? max_diag : max_off, std::abs(w0(i, j)));
  rep.offdiag_bounded = max_off <= max_diag;
  rep.outside_row_zero = rows_outside_zero(rep.model.layer2.positional, query);

  rep.content_match = true;
  for (const auto& ex : examples) {
    const auto trace = forward(rep.model, ex.context, Layer2Rows::last);
    rep.content_match = rep.content_match && check_stationary(trace, ex, 1e-2).content_match;
  }
  return rep;
}

std::string phase2_csv(const std::vector<PhaseTwoPoint>& trajectory) {
  std::ostringstream os;
  os.precision(17);
  os << "step,diag_mean,self_mask,s2_mass,offdiag_mean,s2_min\n";
  for (const auto& p : trajectory)
    os << p.step << ',' << p.diag_mean << ',' << p.self_mask << ',' << p.s2_mass << ','
       << p.offdiag_mean << ',' << p.s2_min << '\n';
  return os.str();
}

}  // namespace mtplab
