#pragma once

#include <random>

#include "mtplab/model.hpp"
#include "mtplab/taskgen.hpp"

namespace testing {

// The worked reference graph, with node 0 relabelled to 10.
inline constexpr const char* kReferenceLine = "3,7 | 6,10 | 7,2 | 3,6 / 3,10 = 3,6,10";

inline mtplab::StarInstance reference_instance() {
  return mtplab::parse_graph(kReferenceLine, mtplab::GraphKind::star,
                             mtplab::PromptOrder::start_end, 10);
}

inline mtplab::TrainingExample star_example(std::uint64_t seed, std::size_t t = 10,
                                            std::size_t n = 10) {
  return mtplab::encode(mtplab::gen_star(2, 3, n, seed), t, n);
}

inline mtplab::DisentangledModel random_model(std::uint64_t seed, std::size_t t = 10,
                                              std::size_t n = 10, double a = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-a, a);
  auto m = mtplab::DisentangledModel::zeros(t, n);
  mtplab::for_each_matrix(m, [&](int, mtplab::Matrix& w) {
    for (double& v : w.values()) v = u(rng);
  });
  return m;
}

// Relabel by pi, where pi[label - 1] is the new label.
inline mtplab::TrainingExample relabel(const mtplab::TrainingExample& ex,
                                       const std::vector<mtplab::NodeId>& pi) {
  std::vector<mtplab::NodeId> toks;
  for (mtplab::NodeId t : ex.context.tokens()) toks.push_back(pi[t - 1]);
  mtplab::TrainingExample out = ex;
  out.context = mtplab::ContentMatrix(toks, ex.context.vocab());
  out.y1 = pi[ex.y1 - 1];
  out.y2 = pi[ex.y2 - 1];
  out.start = pi[ex.start - 1];
  return out;
}

// The matching change of basis on both content matrices.
inline mtplab::DisentangledModel conjugate(const mtplab::DisentangledModel& m,
                                           const std::vector<mtplab::NodeId>& pi) {
  auto out = m;
  const std::size_t n = m.vocab();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      out.layer1.content(pi[a] - 1, pi[b] - 1) = m.layer1.content(a, b);
      out.layer2.content(pi[a] - 1, pi[b] - 1) = m.layer2.content(a, b);
    }
  return out;
}

}  // namespace testing
