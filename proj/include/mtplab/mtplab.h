#ifndef MTPLAB_H
#define MTPLAB_H

/* C interface to mtplab. All functions return an mtp_status; on failure
 * mtp_last_error() holds a message for the calling thread. Handles are
 * opaque and owned by the caller once returned. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MTP_API __declspec(dllexport)
#else
#define MTP_API __attribute__((visibility("default")))
#endif

typedef enum mtp_status {
  MTP_OK = 0,
  MTP_E_DIMENSION,
  MTP_E_CAPACITY,
  MTP_E_PARSE,
  MTP_E_SINGULAR_LOSS,
  MTP_E_EVALUATION,
  MTP_E_GENERATION,
  MTP_E_ENCODING,
  MTP_E_INTEGRATION,
  MTP_E_DIVERGENCE,
  MTP_E_IO,
  MTP_E_INVALID_ARGUMENT,
  MTP_E_INTERNAL
} mtp_status;

typedef struct mtp_model mtp_model;
typedef struct mtp_dataset mtp_dataset;

MTP_API const char* mtp_version(void);
MTP_API const char* mtp_status_name(mtp_status status);
MTP_API const char* mtp_last_error(void);

/* ---- models. which: 0 = W0_1, 1 = W1_1, 2 = W0_2, 3 = W1_2 */
MTP_API mtp_status mtp_model_zeros(size_t seq_len, size_t vocab, mtp_model** out);
MTP_API mtp_status mtp_model_circuit(double gamma, size_t seq_len, size_t vocab, mtp_model** out);
MTP_API mtp_status mtp_model_load(const char* path, mtp_model** out);
MTP_API mtp_status mtp_model_save(const mtp_model* model, const char* path);
MTP_API mtp_status mtp_model_dims(const mtp_model* model, size_t* seq_len, size_t* vocab);
MTP_API mtp_status mtp_model_get(const mtp_model* model, int which, double* buf, size_t len);
MTP_API mtp_status mtp_model_set(mtp_model* model, int which, const double* buf, size_t len);
MTP_API void mtp_model_free(mtp_model* model);

/* ---- datasets: encoded 2-path 3-node stars, T = N = 10 */
MTP_API mtp_status mtp_dataset_generate(size_t train_count, size_t eval_count, uint64_t seed,
                                        mtp_dataset** out);
/* One graph per line (start-first prompt order). Duplicates are dropped and
 * the tail eval_fraction of the distinct graphs is held out. */
MTP_API mtp_status mtp_dataset_read(const char* path, double eval_fraction, mtp_dataset** out);
MTP_API mtp_status mtp_dataset_sizes(const mtp_dataset* data, size_t* train, size_t* eval);
MTP_API void mtp_dataset_free(mtp_dataset* data);

/* ---- task generation */
typedef struct mtp_gen_params {
  size_t path_count;    /* star */
  size_t path_len;      /* star */
  size_t node_count;    /* star */
  size_t depth;         /* tree */
  size_t operand_count; /* countdown */
} mtp_gen_params;

typedef struct mtp_gen_summary {
  size_t count;
  double mean_size;     /* edges, operands or clauses per instance */
  double mean_answer;   /* path length, target or true variables */
  size_t verified;      /* instances accepted by their own oracle */
} mtp_gen_summary;

MTP_API void mtp_gen_params_default(mtp_gen_params* params);
/* task: "star", "tree", "countdown" or "sat". Instance i uses seed + i. */
MTP_API mtp_status mtp_generate(const char* task, const mtp_gen_params* params, size_t count,
                                uint64_t seed, const char* out_path, mtp_gen_summary* summary);

/* ---- gradient check: uniform(-1, 1) models on random stars */
typedef struct mtp_grad_summary {
  size_t trials;
  size_t passed;
  double worst_rel_err[4];
  double shallow_layer2_max; /* exact zero expected */
} mtp_grad_summary;

MTP_API mtp_status mtp_check_gradients(size_t trials, uint64_t seed, double tol, double epsilon,
                                       const char* csv_path, mtp_grad_summary* summary);

/* ---- circuit sweep */
typedef struct mtp_circuit_summary {
  double loss_slope, grad_slope;            /* full objective */
  double noar_loss_slope, noar_grad_slope;  /* without the teacher-forced term */
  int loss_decays, grad_decays, loss_monotone;
  /* probe at stationary_gamma over the examples */
  double stationary_gamma;
  int conditions_hold;       /* both attention conditions at tol 1e-6, every example */
  double max_grad_total;
  double max_grad_noar;
  double min_l1b;
  double ar_collapse_rate;   /* fraction with argmax f1(Z') == v */
  int implication_holds;     /* conditions at 1e-8 imply grad_total <= 1e-6 */
  int pass;
} mtp_circuit_summary;

MTP_API mtp_status mtp_verify_circuit(const double* gammas, size_t gamma_count,
                                      size_t example_count, uint64_t seed, double stationary_gamma,
                                      const char* csv_path, mtp_circuit_summary* summary);

/* ---- reduced dynamics */
typedef struct mtp_phase1_summary {
  double gap_at_zero;        /* d(w_p - w_c)/dt at the zero state */
  double final_s_p;
  size_t first_step_reaching; /* first step with s_p >= 0.999, or 0 if never */
  int gap_positive;          /* on the grid and random states with x >= 1 */
  int pass;
} mtp_phase1_summary;

MTP_API mtp_status mtp_dynamics_phase1(double step, size_t steps, uint64_t seed,
                                       const char* csv_path, mtp_phase1_summary* summary);

typedef struct mtp_ntp_field_summary {
  double mu0;
  double closed[16];         /* offsets 1..T-1 stored at [k-1], T <= 17 */
  double empirical[16];
  double worst_rel_err;
  int signs_ok;
  int constants_ok;          /* T = 10 only */
  int pass;
} mtp_ntp_field_summary;

MTP_API mtp_status mtp_dynamics_ntp_field(size_t seq_len, const char* csv_path,
                                          mtp_ntp_field_summary* summary);

typedef struct mtp_phase2_summary {
  size_t steps;
  int converged;
  int diag_increasing, offdiag_negative, offdiag_bounded;
  int self_mask_decreasing;
  size_t self_mask_peak_step;
  int outside_row_zero, rank1_positional, rank1_content, content_match;
  double final_s2_mass;
  int pass;
} mtp_phase2_summary;

MTP_API mtp_status mtp_dynamics_phase2(size_t example_count, uint64_t seed, double gamma_frozen,
                                       double learning_rate, size_t max_steps,
                                       const char* csv_path, mtp_phase2_summary* summary);

/* ---- training */
typedef enum mtp_objective {
  MTP_OBJ_MTP = 0,
  MTP_OBJ_MTP_NO_AR,
  MTP_OBJ_NTP,
  MTP_OBJ_CASCADED
} mtp_objective;

typedef struct mtp_train_config {
  mtp_objective objective;
  double learning_rate;
  size_t batch_size;        /* 0 = full batch */
  size_t epochs;
  uint64_t seed;
  int init_uniform;
  double init_scale;
  int pin_content1;
  size_t eval_every;
  double gamma_phase1;
  size_t phase1_epochs;
  int toeplitz_phase1;
  double phase2_target;
} mtp_train_config;

typedef struct mtp_eval_report {
  size_t count;
  double v_accuracy;
  double full_path_accuracy;
  double ar_step_accuracy;
  double s1_concentration;
  double s2_concentration;
  double loss_total, l1a, l1b, l2;
} mtp_eval_report;

typedef struct mtp_train_summary {
  size_t records;
  int diverged;
  int decoupling_held;
  mtp_eval_report final_eval;
  double phase1_s1_concentration; /* cascaded */
  int phase2_rank1;               /* cascaded */
  int phase2_converged;           /* cascaded */
} mtp_train_summary;

MTP_API void mtp_train_config_default(mtp_train_config* config);
MTP_API mtp_status mtp_objective_from_name(const char* name, mtp_objective* out);
/* Writes one metrics line per evaluation to metrics_path (NULL to skip). */
MTP_API mtp_status mtp_train(const mtp_train_config* config, const mtp_dataset* data,
                             const char* metrics_path, mtp_model** out,
                             mtp_train_summary* summary);
/* Evaluates on the held-out part of the dataset. */
MTP_API mtp_status mtp_evaluate(const mtp_model* model, const mtp_dataset* data,
                                mtp_eval_report* report);

/* ---- attention maps for one graph line (start-first order) */
MTP_API mtp_status mtp_heatmap(const mtp_model* model, const char* instance_line,
                               const char* csv_path, const char* svg_path,
                               double* s2_mass_at_end);

#ifdef __cplusplus
}
#endif

#endif
