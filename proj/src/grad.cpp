#include "mtplab/grad.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mtplab/error.hpp"
#include "mtplab/finite_diff.hpp"

namespace mtplab {

namespace {

void require_mass(double p, const char* head) {
  if (!(p >= kProbabilityFloor)) {
    throw Error(Errc::singular_loss,
                std::string(head) + " head assigns (numerically) zero mass to its target");
  }
}

void check_out(const GradSet& out, const ContentMatrix& z) {
  if (out.layer1.positional.rows() != z.seq_len() || out.layer1.content.rows() != z.vocab())
    throw Error(Errc::dimension, "gradient accumulator does not match the context");
}

// dW1 += w dA on row r, dW0 += w (Z^T dA Z) for the same row.
void add_row(std::span<const double> dA_row, std::size_t r, const ContentMatrix& z, double w,
             LayerWeights& out) {
  auto pos = out.positional.row(r);
  auto con = out.content.row(z.column(r));
  for (std::size_t j = 0; j < dA_row.size(); ++j) {
    const double v = w * dA_row[j];
    pos[j] += v;
    con[z.column(j)] += v;
  }
}

// w_j = sum_i S1(j, i) [token_i == y]
std::vector<double> routed_mass(const Matrix& S1, const ContentMatrix& z, NodeId y) {
  std::vector<double> w(S1.rows(), 0.0);
  for (std::size_t j = 0; j < S1.rows(); ++j)
    for (std::size_t i = 0; i <= j; ++i)
      if (z.tokens()[i] == y) w[j] += S1(j, i);
  return w;
}

}  // namespace

void add_grad_shallow(const ForwardTrace& trace, const ContentMatrix& z, NodeId y2, double weight,
                      GradSet& out) {
  check_out(out, z);
  const std::size_t t = trace.S1.rows();
  const double p = trace.f2.at(y2 - 1);
  require_mass(p, "shallow");
  const auto s = trace.S1.row(t - 1);
  std::vector<double> g(t);
  for (std::size_t i = 0; i < t; ++i) g[i] = z.tokens()[i] == y2 ? -1.0 / p : 0.0;
  add_row(softmax_jacobian_apply(s, g), t - 1, z, weight, out.layer1);
}

GradSet grad_shallow(const ForwardTrace& trace, const ContentMatrix& z, NodeId y2) {
  GradSet out = GradSet::zeros(trace.S1.rows(), z.vocab());
  add_grad_shallow(trace, z, y2, 1.0, out);
  return out;
}

namespace {

// dL/d(layer-2 logits) for the deep head, plus the routed mass vector.
std::vector<double> layer2_delta(const ForwardTrace& trace, const std::vector<double>& w, double p) {
  const std::size_t t = trace.S1.rows();
  std::vector<double> g2(t);
  for (std::size_t j = 0; j < t; ++j) g2[j] = -w[j] / p;
  return softmax_jacobian_apply(trace.S2.row(t - 1), g2);
}

void add_deep_layer1(const ForwardTrace& trace, const ContentMatrix& z, NodeId y1, double p,
                     const std::vector<double>& delta, double weight, LayerWeights* out,
                     Matrix* dA) {
  const std::size_t t = trace.S1.rows();
  const auto s2 = trace.S2.row(t - 1);
  // G = dL/dS[1]: value path -s2_r u_i / p everywhere, query path A2 delta on
  // the last row.
  const auto query = matvec(trace.A2, delta);
  std::vector<double> g(t);
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t i = 0; i < t; ++i) g[i] = z.tokens()[i] == y1 ? -s2[r] / p : 0.0;
    if (r == t - 1)
      for (std::size_t i = 0; i < t; ++i) g[i] += query[i];
    const auto row = softmax_jacobian_apply(trace.S1.row(r), g);
    if (out) add_row(row, r, z, weight, *out);
    if (dA) std::copy(row.begin(), row.end(), dA->row(r).begin());
  }
}

}  // namespace

void add_grad_deep(const ForwardTrace& trace, const ContentMatrix& z, NodeId y1, double weight,
                   GradSet& out, bool layer1) {
  check_out(out, z);
  const std::size_t t = trace.S1.rows();
  const double p = trace.f1.at(y1 - 1);
  require_mass(p, "deep");
  const auto delta = layer2_delta(trace, routed_mass(trace.S1, z, y1), p);

  // Layer-2 logits are S[1]_T A[2]: query row r carries weight S[1](T-1, r).
  const auto q = trace.S1.row(t - 1);
  for (std::size_t r = 0; r < t; ++r) {
    if (q[r] == 0.0) continue;
    auto pos = out.layer2.positional.row(r);
    auto con = out.layer2.content.row(z.column(r));
    for (std::size_t j = 0; j < t; ++j) {
      const double v = weight * q[r] * delta[j];
      pos[j] += v;
      con[z.column(j)] += v;
    }
  }
  if (layer1) add_deep_layer1(trace, z, y1, p, delta, weight, &out.layer1, nullptr);
}

Matrix deep_logit_grad(const ForwardTrace& trace, const ContentMatrix& z, NodeId y1) {
  const std::size_t t = trace.S1.rows();
  const double p = trace.f1.at(y1 - 1);
  require_mass(p, "deep");
  const auto delta = layer2_delta(trace, routed_mass(trace.S1, z, y1), p);
  Matrix dA(t, t);
  add_deep_layer1(trace, z, y1, p, delta, 1.0, nullptr, &dA);
  return dA;
}

GradSet grad_deep_layer2(const ForwardTrace& trace, const ContentMatrix& z, NodeId y1) {
  GradSet out = GradSet::zeros(trace.S1.rows(), z.vocab());
  add_grad_deep(trace, z, y1, 1.0, out, false);
  return out;
}

GradSet grad_deep(const ForwardTrace& trace, const ContentMatrix& z, NodeId y1) {
  GradSet out = GradSet::zeros(trace.S1.rows(), z.vocab());
  add_grad_deep(trace, z, y1, 1.0, out);
  return out;
}

GradSet grad_ar(const DisentangledModel& model, const TrainingExample& example) {
  const auto zp = ar_context(example);
  return grad_deep(forward(model, zp, Layer2Rows::last), zp, example.y2);
}

GradSet grad_ntp(const DisentangledModel& model, const TrainingExample& example) {
  const auto& z = example.context;
  return grad_deep(forward(model, z, Layer2Rows::last), z, example.y1);
}

GradSet grad_without_ar(const DisentangledModel& model, const TrainingExample& example) {
  const auto& z = example.context;
  const auto tr = forward(model, z, Layer2Rows::last);
  GradSet g = GradSet::zeros(model.seq_len(), model.vocab());
  add_grad_deep(tr, z, example.y1, 0.25, g);
  add_grad_shallow(tr, z, example.y2, 0.5, g);
  return g;
}

GradSet grad_total(const DisentangledModel& model, const TrainingExample& example) {
  GradSet g = grad_without_ar(model, example);
  const auto zp = ar_context(example);
  add_grad_deep(forward(model, zp, Layer2Rows::last), zp, example.y2, 0.25, g);
  return g;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / (std::abs(a) + std::abs(b) + 1e-12);
}

GradCheckReport compare_grads(const GradSet& closed, const GradSet& numeric, double tol) {
  if (!(tol > 0.0)) throw Error(Errc::invalid_argument, "gradient check tolerance must be > 0");
  GradCheckReport rep;
  rep.tol = tol;
  std::array<const Matrix*, 4> a{}, b{};
  for_each_matrix(closed, [&](int k, const Matrix& m) { a[k] = &m; });
  for_each_matrix(numeric, [&](int k, const Matrix& m) { b[k] = &m; });
  rep.pass = true;
  for (int k = 0; k < 4; ++k) {
    const auto x = a[k]->values();
    const auto y = b[k]->values();
    if (x.size() != y.size()) throw Error(Errc::dimension, "gradient sets differ in shape");
    double worst = 0.0;
    for (std::size_t e = 0; e < x.size(); ++e) worst = std::max(worst, relative_error(x[e], y[e]));
    rep.max_rel_err[k] = worst;
    rep.pass = rep.pass && worst <= tol;
  }
  return rep;
}

GradCheckReport check_grad(const DisentangledModel& model, const TrainingExample& example,
                           double epsilon, double tol) {
  const GradSet closed = grad_total(model, example);
  const GradSet numeric = finite_diff_grad(
      [&](const DisentangledModel& m) { return mtp_loss(m, example).total; }, model, epsilon);
  return compare_grads(closed, numeric, tol);
}

std::string GradCheckReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  for (int k = 0; k < 4; ++k) {
    os << kWeightNames[k] << ',' << max_rel_err[k] << ',' << (max_rel_err[k] <= tol ? 1 : 0)
       << '\n';
  }
  return os.str();
}

}  // namespace mtplab
