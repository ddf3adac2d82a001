#pragma once

// Closed-form gradients of the shallow and deep head losses.
//
// Shallow: L2 = -log f2(Z)[y]. Only the last row of A[1] moves, so the
// layer-2 blocks of the result are exactly zero.
//
// Deep: L1 = -log f1(Z)[y] with three paths,
//   (i)   through A[2] and J(S[2]_T)            -> layer 2
//   (ii)  query path, S[1]_T -> layer-2 logits  -> layer 1
//   (iii) value path, S[2]_T S[1] Z             -> layer 1
// (ii) and (iii) are summed into G = dL/dS[1] before the row-wise softmax
// Jacobians give dL/dA[1].

#include <array>
#include <string>

#include "mtplab/model.hpp"

namespace mtplab {

GradSet grad_shallow(const ForwardTrace& trace, const ContentMatrix& z, NodeId y2);
GradSet grad_deep(const ForwardTrace& trace, const ContentMatrix& z, NodeId y1);
// Layer-2 blocks of grad_deep only; the layer-1 blocks are left at zero.
GradSet grad_deep_layer2(const ForwardTrace& trace, const ContentMatrix& z, NodeId y1);

// In-place forms: out += weight * gradient. Training uses these to avoid
// building a GradSet per example. layer1 = false skips the layer-1 blocks.
void add_grad_shallow(const ForwardTrace& trace, const ContentMatrix& z, NodeId y2, double weight,
                      GradSet& out);
void add_grad_deep(const ForwardTrace& trace, const ContentMatrix& z, NodeId y1, double weight,
                   GradSet& out, bool layer1 = true);

// The intermediate dL1/dA[1] of the deep head.
Matrix deep_logit_grad(const ForwardTrace& trace, const ContentMatrix& z, NodeId y1);

// 1/4 deep(Z, v) + 1/4 deep(Z', end) + 1/2 shallow(Z, end).
GradSet grad_total(const DisentangledModel& model, const TrainingExample& example);
// Same objective with the teacher-forced deep term dropped.
GradSet grad_without_ar(const DisentangledModel& model, const TrainingExample& example);
// Unweighted gradient of the teacher-forced deep term alone.
GradSet grad_ar(const DisentangledModel& model, const TrainingExample& example);
// Deep head on Z only: the next-token baseline.
GradSet grad_ntp(const DisentangledModel& model, const TrainingExample& example);

double relative_error(double a, double b);

struct GradCheckReport {
  std::array<double, 4> max_rel_err{};  // W0_1, W1_1, W0_2, W1_2
  double tol = 0.0;
  bool pass = false;
  // One "name,max_rel_err,pass" line per matrix.
  std::string to_csv() const;
};

GradCheckReport check_grad(const DisentangledModel& model, const TrainingExample& example,
                           double epsilon, double tol);
GradCheckReport compare_grads(const GradSet& closed, const GradSet& numeric, double tol);

}  // namespace mtplab
