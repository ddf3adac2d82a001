#include "mtplab/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mtplab/error.hpp"
#include "mtplab/grad.hpp"

namespace mtplab {

DisentangledModel construct_circuit(double gamma, std::size_t seq_len, std::size_t vocab) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    throw Error(Errc::invalid_argument, "circuit gamma must be finite and >= 0");
  if (seq_len < 2) throw Error(Errc::dimension, "circuit needs T >= 2");
  DisentangledModel m = DisentangledModel::zeros(seq_len, vocab);
  if (gamma == 0.0) return m;
  m.layer1.positional = Matrix::lower_shift(seq_len);
  m.layer1.positional *= gamma;
  m.layer2.content = Matrix::identity(vocab);
  m.layer2.content *= gamma;
  m.layer2.positional(seq_len - 2, seq_len - 2) = -gamma;
  return m;
}

Stationarity check_stationary(const ForwardTrace& trace, const TrainingExample& example,
                              double tol) {
  if (!(tol >= 0.0)) throw Error(Errc::invalid_argument, "tolerance must be >= 0");
  const std::size_t t = trace.S1.rows();
  if (trace.S2.rows() != t || example.context.seq_len() != t)
    throw Error(Errc::dimension, "trace and example disagree on T");
  Stationarity s;
  s.predecessor = trace.S1(t - 1, t - 2) >= 1.0 - tol &&
                  trace.S1(example.t_end_ctx, example.t_v_ctx) >= 1.0 - tol;
  s.content_match = trace.S2(t - 1, example.t_end_ctx) >= 1.0 - tol;
  return s;
}

CircuitReport ar_collapse_probe(const DisentangledModel& model, const TrainingExample& example) {
  const std::size_t t = model.seq_len();
  const auto tr = forward(model, example.context, Layer2Rows::last);
  CircuitReport r;
  r.loss = mtp_loss(model, example);
  r.s1_last = tr.S1(t - 1, t - 2);
  r.s1_ctx = tr.S1(example.t_end_ctx, example.t_v_ctx);
  r.s2_mass = tr.S2(t - 1, example.t_end_ctx);

  const auto trp = forward(model, ar_context(example), Layer2Rows::last);
  r.ar_argmax = static_cast<NodeId>(argmax(trp.f1) + 1);
  // No retrieval: the layer-2 last row is flat, so the pick is a token count
  // and ties go to the lowest label.
  const auto last = trp.S2.row(t - 1);
  const auto [lo, hi] = std::minmax_element(last.begin(), last.end());
  r.ar_near_uniform = *hi - *lo < 1e-9;

  r.grad_max = grad_total(model, example).max_abs();
  r.ar_grad_max = grad_ar(model, example).max_abs();
  r.noar_grad_max = grad_without_ar(model, example).max_abs();
  return r;
}

std::vector<SweepRow> gamma_sweep(const std::vector<double>& gammas,
                                  const std::vector<TrainingExample>& examples) {
  if (gammas.empty() || examples.empty())
    throw Error(Errc::invalid_argument, "sweep needs at least one gamma and one example");
  const std::size_t t = examples.front().context.seq_len();
  const std::size_t n = examples.front().context.vocab();
  std::vector<SweepRow> rows;
  for (double g : gammas) {
    if (g > kMaxSweepGamma) throw Error(Errc::invalid_argument, "sweep gamma above 40");
    const auto model = construct_circuit(g, t, n);
    SweepRow row;
    row.gamma = g;
    for (const auto& ex : examples) {
      const auto r = ar_collapse_probe(model, ex);
      row.l1a += r.loss.l1a;
      row.l1b += r.loss.l1b;
      row.l2 += r.loss.l2;
      row.total += r.loss.total;
      row.grad_max += r.grad_max;
      row.s1_last += r.s1_last;
      row.s1_ctx += r.s1_ctx;
      row.s2_mass += r.s2_mass;
      row.ar_argmax_correct += r.ar_argmax == ex.y2 ? 1.0 : 0.0;
      row.ar_grad_max += r.ar_grad_max;
      row.noar_loss += r.loss.without_ar();
      row.noar_grad_max += r.noar_grad_max;
    }
    const double k = 1.0 / static_cast<double>(examples.size());
    for (double* f : {&row.l1a, &row.l1b, &row.l2, &row.total, &row.grad_max, &row.s1_last,
                      &row.s1_ctx, &row.s2_mass, &row.ar_argmax_correct, &row.ar_grad_max,
                      &row.noar_loss, &row.noar_grad_max})
      *f *= k;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "gamma,L1a,L1b,L2,total,grad_max,s1_T_max,s1_ctx_max,s2_mass,ar_argmax_correct,"
        "ar_grad_max,noar_loss,noar_grad_max\n";
  for (const auto& r : rows) {
    os << r.gamma << ',' << r.l1a << ',' << r.l1b << ',' << r.l2 << ',' << r.total << ','
       << r.grad_max << ',' << r.s1_last << ',' << r.s1_ctx << ',' << r.s2_mass << ','
       << r.ar_argmax_correct << ',' << r.ar_grad_max << ',' << r.noar_loss << ','
       << r.noar_grad_max << '\n';
  }
  return os.str();
}

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(Errc::invalid_argument, "slope fit needs two or more paired points");
  double mx = 0, my = 0;
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw Error(Errc::evaluation, "cannot take log of a non-positive value");
    ly[i] = std::log(y[i]);
    mx += x[i];
    my += ly[i];
  }
  mx /= x.size();
  my /= x.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (ly[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw Error(Errc::invalid_argument, "slope fit needs distinct x values");
  return sxy / sxx;
}

SweepVerdict judge_sweep(const std::vector<SweepRow>& rows) {
  std::vector<double> g, loss, grad, nl, ng;
  for (const auto& r : rows) {
    g.push_back(r.gamma);
    loss.push_back(r.total);
    grad.push_back(r.grad_max);
    nl.push_back(r.noar_loss);
    ng.push_back(r.noar_grad_max);
  }
  SweepVerdict v;
  v.loss_slope = fit_log_slope(g, loss);
  v.grad_slope = fit_log_slope(g, grad);
  v.noar_loss_slope = fit_log_slope(g, nl);
  v.noar_grad_slope = fit_log_slope(g, ng);
  v.loss_decays = std::abs(v.loss_slope + 1.0) <= 0.10;
  v.grad_decays = std::abs(v.grad_slope + 1.0) <= 0.15;
  v.loss_monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    v.loss_monotone = v.loss_monotone && rows[i].total < rows[i - 1].total;
  return v;
}

}  // namespace mtplab
