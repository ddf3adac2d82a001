#include "mtplab/finite_diff.hpp"

#include <cmath>

#include "mtplab/error.hpp"

namespace mtplab {

GradSet finite_diff_grad(const LossFn& loss, const DisentangledModel& model, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(Errc::invalid_argument, "finite differences need epsilon > 0");
  model.check_shape();
  auto checked = [&](const DisentangledModel& m) {
    const double v = loss(m);
    if (!std::isfinite(v)) throw Error(Errc::evaluation, "loss is not finite at a probe point");
    return v;
  };
  checked(model);

  GradSet grad = GradSet::zeros(model.seq_len(), model.vocab());
  DisentangledModel probe = model;
  for (int which = 0; which < 4; ++which) {
    Matrix* slot = nullptr;
    Matrix* out = nullptr;
    for_each_matrix(probe, [&](int k, Matrix& m) { if (k == which) slot = &m; });
    for_each_matrix(grad, [&](int k, Matrix& m) { if (k == which) out = &m; });
    auto values = slot->values();
    auto result = out->values();
    for (std::size_t e = 0; e < values.size(); ++e) {
      const double saved = values[e];
      values[e] = saved + epsilon;
      const double up = checked(probe);
      values[e] = saved - epsilon;
      const double down = checked(probe);
      values[e] = saved;
      result[e] = (up - down) / (2.0 * epsilon);
    }
  }
  return grad;
}

}  // namespace mtplab
