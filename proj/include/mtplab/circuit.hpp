#pragma once

// The reverse-reasoning circuit: explicit weights, the two attention
// conditions that characterise it, and the probe of the teacher-forced
// deep head sitting on top of it.

#include <string>
#include <vector>

#include "mtplab/model.hpp"

namespace mtplab {

inline constexpr double kMaxSweepGamma = 40.0;  // past this the log-loss clamp bites
inline constexpr double kDefaultAttentionTol = 1e-6;

// W0_1 = 0, W1_1 = gamma * strict subdiagonal, W0_2 = gamma * I, W1_2 zero
// except -gamma on the self-entry of the prompt end position (T-2, 0-based).
DisentangledModel construct_circuit(double gamma, std::size_t seq_len, std::size_t vocab);

struct Stationarity {
  bool predecessor = false;     // last row and the end-edge row point one step back
  bool content_match = false;   // layer-2 last row lands on the context copy of end
  bool both() const { return predecessor && content_match; }
};

Stationarity check_stationary(const ForwardTrace& trace, const TrainingExample& example,
                              double tol = kDefaultAttentionTol);

struct CircuitReport {
  double gamma = 0.0;
  LossBreakdown loss;
  double grad_max = 0.0;      // max-norm of the full objective's gradient
  double s1_last = 0.0;       // S1(T-1, T-2)
  double s1_ctx = 0.0;        // S1(t_end_ctx, t_v_ctx)
  double s2_mass = 0.0;       // S2(T-1, t_end_ctx)
  NodeId ar_argmax = 0;       // argmax f1(Z')
  bool ar_near_uniform = false;  // layer-2 last row on Z' is flat
  double ar_grad_max = 0.0;   // max-norm of grad L1b alone
  double noar_grad_max = 0.0; // max-norm of the objective without L1b
};

CircuitReport ar_collapse_probe(const DisentangledModel& model, const TrainingExample& example);

// One row per gamma, averaged over the examples. ar_argmax_correct is the
// fraction of examples whose teacher-forced step picks the end node.
struct SweepRow {
  double gamma = 0.0;
  double l1a = 0.0, l1b = 0.0, l2 = 0.0, total = 0.0;
  double grad_max = 0.0;
  double s1_last = 0.0, s1_ctx = 0.0, s2_mass = 0.0;
  double ar_argmax_correct = 0.0;
  double ar_grad_max = 0.0;
  double noar_loss = 0.0;
  double noar_grad_max = 0.0;
};

std::vector<SweepRow> gamma_sweep(const std::vector<double>& gammas,
                                  const std::vector<TrainingExample>& examples);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Least-squares slope of log(y) against x. Throws if any y <= 0.
double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepVerdict {
  double loss_slope = 0.0;
  double grad_slope = 0.0;
  double noar_loss_slope = 0.0;
  double noar_grad_slope = 0.0;
  bool loss_decays = false;       // slope within -1 +- 10%
  bool grad_decays = false;       // slope within -1 +- 15%
  bool loss_monotone = false;     // strictly decreasing total loss along the sweep
};

SweepVerdict judge_sweep(const std::vector<SweepRow>& rows);

}  // namespace mtplab
