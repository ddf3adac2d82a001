#pragma once

// Two-layer disentangled attention model: content weights W0 (N x N) and
// positional weights W1 (T x T) per layer, fixed block-selector heads.
//
//   A[l]  = Z W0[l] Z^T + W1[l]
//   S[1]  = masked_softmax(A[1])
//   S[2]  = masked_softmax(S[1] A[2])
//   f2(Z) = S[1]_T Z            (shallow head)
//   f1(Z) = S[2]_T S[1] Z       (deep head)
//
// Layer-2 queries read the layer-1 attention output while keys are the raw
// tokens, so content logits are q^T W0 k with the query on the left.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mtplab/numerics.hpp"
#include "mtplab/taskgen.hpp"

namespace mtplab {

// Row-one-hot T x N matrix, stored as its token labels.
class ContentMatrix {
 public:
  ContentMatrix() = default;
  ContentMatrix(std::vector<NodeId> tokens, std::size_t vocab);

  std::size_t seq_len() const noexcept { return tokens_.size(); }
  std::size_t vocab() const noexcept { return vocab_; }
  const std::vector<NodeId>& tokens() const noexcept { return tokens_; }
  // Zero-based column of the one-hot entry in row t.
  std::size_t column(std::size_t t) const { return tokens_[t] - 1; }
  ContentMatrix with_token(std::size_t t, NodeId label) const;
  Matrix dense() const;

  bool operator==(const ContentMatrix&) const = default;

 private:
  std::vector<NodeId> tokens_;
  std::size_t vocab_ = 0;
};

struct LayerWeights {
  Matrix content;     // W0, N x N
  Matrix positional;  // W1, T x T
  bool operator==(const LayerWeights&) const = default;
};

struct DisentangledModel {
  LayerWeights layer1;
  LayerWeights layer2;

  static DisentangledModel zeros(std::size_t seq_len, std::size_t vocab);
  std::size_t seq_len() const noexcept { return layer1.positional.rows(); }
  std::size_t vocab() const noexcept { return layer1.content.rows(); }
  void check_shape() const;
  bool operator==(const DisentangledModel&) const = default;
};

// Gradients for the four weight matrices, laid out like the model.
struct GradSet {
  LayerWeights layer1;
  LayerWeights layer2;

  static GradSet zeros(std::size_t seq_len, std::size_t vocab);
  GradSet& operator+=(const GradSet& other);
  GradSet& operator*=(double scale);
  double max_abs() const noexcept;
  bool all_finite() const noexcept;
};

inline constexpr const char* kWeightNames[4] = {"W0_1", "W1_1", "W0_2", "W1_2"};

// Visits W0_1, W1_1, W0_2, W1_2 in that order.
template <typename Set, typename Fn>
void for_each_matrix(Set& set, Fn&& fn) {
  fn(0, set.layer1.content);
  fn(1, set.layer1.positional);
  fn(2, set.layer2.content);
  fn(3, set.layer2.positional);
}

struct ForwardTrace {
  Matrix A1, A2;  // logits; A2 is the raw Z W0 Z^T + W1, before the S[1] product
  Matrix S1, S2;
  std::vector<double> layer2_logits;  // last row of S[1] A[2]
  std::vector<double> f1, f2;
};

// Rows of S[2] other than the last only matter for plots; skipping them keeps
// training at O(T^2) per example.
enum class Layer2Rows { all, last };

ForwardTrace forward(const DisentangledModel& model, const ContentMatrix& z,
                     Layer2Rows rows = Layer2Rows::all);

// One encoded 2-path star prompt. Positions are zero-based: the prompt end
// node sits at T-2 and the start node at T-1.
struct TrainingExample {
  ContentMatrix context;
  NodeId y1 = 0;  // intermediate node v
  NodeId y2 = 0;  // end node
  NodeId start = 0;
  std::size_t t_end_ctx = 0;
  std::size_t t_v_ctx = 0;
};

TrainingExample encode(const StarInstance& instance, std::size_t seq_len, std::size_t vocab);

// Context with the last row replaced by the first target.
ContentMatrix ar_context(const TrainingExample& example);

inline constexpr double kProbabilityFloor = 1e-300;

struct LossBreakdown {
  double total = 0.0;
  double l1a = 0.0;  // deep head on Z, target v
  double l1b = 0.0;  // deep head on Z', target end
  double l2 = 0.0;   // shallow head on Z, target end
  bool clamped = false;
  // Everything but the teacher-forced deep term.
  double without_ar() const { return 0.5 * (0.5 * l1a + l2); }
};

LossBreakdown mtp_loss(const DisentangledModel& model, const TrainingExample& example);
double ntp_loss(const DisentangledModel& model, const TrainingExample& example);

// -log p with p floored at kProbabilityFloor; sets *clamped when it bites.
double neg_log(double p, bool* clamped = nullptr);

// Text checkpoints: a version line, dimensions, then each matrix row-major in
// shortest round-trip decimal form.
void save_checkpoint(const DisentangledModel& model, std::ostream& out);
DisentangledModel load_checkpoint(std::istream& in);

}  // namespace mtplab
