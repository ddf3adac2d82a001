#pragma once

// Reduced training dynamics: the Toeplitz gradient flow of layer 1 under the
// shallow loss, the layer-2 descent with layer 1 frozen, and the expected
// offset gradient of the pure next-token loss at zero init.

#include <cstdint>
#include <string>
#include <vector>

#include "mtplab/model.hpp"
#include "mtplab/rational.hpp"

namespace mtplab {

inline constexpr std::size_t kToeplitzT = 10;

// Last-row logits are w_p on the predecessor, w_c on the T-2 older context
// slots and w_q on the position itself (held at 0).
struct ToeplitzState {
  double w_p = 0.0;
  double w_c = 0.0;
  double w_q = 0.0;
};

struct ToeplitzWeights {
  double s_p = 0.0;  // predecessor
  double s_c = 0.0;  // each context slot
  double s_q = 0.0;  // self
};

ToeplitzWeights toeplitz_softmax(const ToeplitzState& state, std::size_t seq_len = kToeplitzT);

struct PhaseOneRate {
  double dw_p = 0.0;
  double dw_c = 0.0;
  double gap() const { return dw_p - dw_c; }
};

PhaseOneRate phase1_rhs(const ToeplitzState& state, std::size_t seq_len = kToeplitzT);

struct PhaseOnePoint {
  std::size_t step = 0;
  double w_p = 0.0, w_c = 0.0, s_p = 0.0, delta = 0.0;
};

// Explicit Euler; one point per step including step 0. Throws
// Errc::integration (naming the last finite step) if the state blows up.
std::vector<PhaseOnePoint> integrate_phase1(const ToeplitzState& initial, double step,
                                            std::size_t steps, std::size_t seq_len = kToeplitzT);

std::string phase1_csv(const std::vector<PhaseOnePoint>& trajectory);

// values[k - 1] is E[dL/dw(k)] for offsets k = 1..T-1.
struct OffsetGradient {
  std::vector<double> values;
  double mu0 = 0.0;
  double at(std::size_t k) const { return values.at(k - 1); }
};

// Coefficients c_k with E[dL/dw(k)] = c_k / mu0.
std::vector<Rational> ntp_expected_grad_coefficients(std::size_t seq_len);
OffsetGradient ntp_expected_grad_closed(std::size_t seq_len, double mu0);
// Enumerates the T-2 placements of the target among distinct context labels
// at zero init and projects the exact gradient onto the offset directions.
OffsetGradient ntp_expected_grad_empirical(std::size_t seq_len);

struct PhaseTwoConfig {
  double gamma_frozen = 800.0;  // exp(-gamma) underflows: layer 1 is an exact pointer
  double learning_rate = 1.0;
  std::size_t max_steps = 100000;
  double target_mass = 0.99;
};

struct PhaseTwoPoint {
  std::size_t step = 0;
  double diag_mean = 0.0;     // mean diagonal of W0_2
  double offdiag_mean = 0.0;  // mean off-diagonal of W0_2
  double self_mask = 0.0;     // W1_2 at the prompt end self-entry
  double s2_mass = 0.0;       // mean S2(T-1, t_end_ctx)
  double s2_min = 0.0;        // worst example
};

struct PhaseTwoReport {
  std::vector<PhaseTwoPoint> trajectory;
  DisentangledModel model;
  bool converged = false;
  bool diag_increasing = false;          // strictly, every step
  bool offdiag_negative = false;         // mean off-diagonal < 0 at the end
  bool offdiag_bounded = false;          // |off-diagonal| never exceeds the largest diagonal
  bool self_mask_decreasing = false;     // strictly, every step
  std::size_t self_mask_peak_step = 0;   // last step before it starts falling for good
  bool outside_row_zero = false;         // W1_2 untouched outside row T-2
  bool rank1_positional = false;         // each per-example dW1_2 lives in row T-2
  bool rank1_content = false;            // each per-example dW0_2 lives in row end
  bool content_match = false;            // condition 2 at tol 1e-2 on every example
};

// Gradient descent on the mean of L1a over layer 2 from zero, layer 1 frozen
// at gamma_frozen * strict subdiagonal. Stops once every example puts at
// least target_mass of the layer-2 last row on its context end token.
PhaseTwoReport phase2_simulate(const std::vector<TrainingExample>& examples,
                               const PhaseTwoConfig& config);

std::string phase2_csv(const std::vector<PhaseTwoPoint>& trajectory);

}  // namespace mtplab
