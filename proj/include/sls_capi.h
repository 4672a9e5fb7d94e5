#ifndef SLS_CAPI_H
#define SLS_CAPI_H

/* C interface to the structured LQG synthesis library.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return sls_status; on failure the thread-local message from
 * sls_last_error() describes the problem. Out-parameters are untouched on
 * failure unless noted.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sls_status {
    SLS_OK = 0,
    SLS_ERR_INVALID_ARG = 1,
    SLS_ERR_PARSE = 2,
    SLS_ERR_IO = 3,
    SLS_ERR_INFEASIBLE = 4,
    SLS_ERR_NUMERIC = 5,
    SLS_ERR_PROTOCOL = 6,
    SLS_ERR_INSTABILITY = 7,
    SLS_ERR_INTERNAL = 8
} sls_status;

typedef struct sls_config sls_config;
typedef struct sls_system sls_system;
typedef struct sls_solution sls_solution;   /* structured factor (state feedback or estimator) */
typedef struct sls_clm sls_clm;             /* composed closed-loop maps */
typedef struct sls_trajectory sls_trajectory;

const char* sls_version(void);
/* Message for the most recent failing call on this thread ("" if none). */
const char* sls_last_error(void);

/* ---- configuration ------------------------------------------------- */
sls_status sls_config_default(sls_config** out);
sls_status sls_config_load(const char* path, sls_config** out);
sls_status sls_config_get_int(const sls_config* cfg, const char* key, long long* out);
sls_status sls_config_get_real(const sls_config* cfg, const char* key, double* out);
sls_status sls_config_set_int(sls_config* cfg, const char* key, long long value);
sls_status sls_config_set_real(sls_config* cfg, const char* key, double value);
/* FNV-1a hash of the canonical config text (stamped into CSV comments). */
sls_status sls_config_hash(const sls_config* cfg, uint64_t* out);
void sls_config_free(sls_config* cfg);

/* ---- plant --------------------------------------------------------- */
sls_status sls_system_chain(int n_nodes, double alpha, double rho, double q_scale,
                            double r_scale, sls_system** out);
sls_status sls_system_from_config(const sls_config* cfg, sls_system** out);
sls_status sls_system_save(const sls_system* sys, const char* path);
sls_status sls_system_load(const char* path, sls_system** out);
sls_status sls_system_dims(const sls_system* sys, int* n, int* m, int* p, int* n_nodes);
void sls_system_free(sls_system* sys);

/* ---- synthesis ------------------------------------------------------ */
/* State-feedback factor under the d-delayed localization constraints. */
sls_status sls_synthesize_sf(const sls_system* sys, int d, int t_eval, sls_solution** out);
/* Estimation factor (dual synthesis). */
sls_status sls_synthesize_kf(const sls_system* sys, int d, int t_eval, sls_solution** out);
sls_status sls_solution_cost(const sls_solution* sol, double* cost, double* tail_bound);
/* max_k ||Phi_x[k+1] - A Phi_x[k] - B Phi_u[k] - I delta_k0||, state-feedback factors only. */
sls_status sls_solution_sf_residual(const sls_solution* sol, const sls_system* sys,
                                    int horizon, double* out);
/* Per-column state-space blocks as CSV rows (column, matrix, row, col, value). */
sls_status sls_solution_dump_csv(const sls_solution* sol, const char* path,
                                 const char* comment);
void sls_solution_free(sls_solution* sol);

/* ---- composition and analysis --------------------------------------- */
sls_status sls_compose(const sls_system* sys, const sls_solution* sf, const sls_solution* kf,
                       int horizon, sls_clm** out);
sls_status sls_clm_h2_cost(const sls_clm* clm, const sls_system* sys, int horizon,
                           double* cost, double* tail_bound);
sls_status sls_clm_feasibility_residual(const sls_clm* clm, const sls_system* sys, int horizon,
                                        double* out);
sls_status sls_clm_localization_width(const sls_clm* clm, const sls_system* sys, int horizon,
                                      int* out);
sls_status sls_clm_dump_csv(const sls_clm* clm, const char* path, const char* comment);
void sls_clm_free(sls_clm* clm);

/* ---- oracles --------------------------------------------------------- */
/* Unstructured LQG reference cost (strictly proper controller). */
sls_status sls_centralized_lqg_cost(const sls_system* sys, double* out);
/* Centralized state-feedback cost trace(P W). */
sls_status sls_centralized_lqr_cost(const sls_system* sys, double* out);
/* FIR-restricted state-feedback cost at horizon H (column QPs). Returns
 * SLS_ERR_INFEASIBLE when the terminal condition cannot be met. */
sls_status sls_fir_sf_cost(const sls_system* sys, int d, int horizon, double* out);

/* ---- simulation ------------------------------------------------------ */
typedef struct sls_sim_options {
    int t_sim;
    uint64_t seed;
    int record_messages;    /* 0/1 */
    double noise_scale;     /* 0 disables noise */
    int impulse_t;          /* -1: none */
    int impulse_signal;     /* 0 none, 1 x, 2 y, 3 beta */
    int impulse_coord;
} sls_sim_options;

void sls_sim_options_init(sls_sim_options* opt);

/* Message-passing execution of the composed controller. */
sls_status sls_simulate_distributed(const sls_system* sys, const sls_solution* sf,
                                    const sls_solution* kf, int d,
                                    const sls_sim_options* opt, sls_trajectory** out);
/* Global reference controller driven by the identical noise stream. */
sls_status sls_simulate_centralized(const sls_system* sys, const sls_clm* clm,
                                    const sls_sim_options* opt, sls_trajectory** out);
sls_status sls_trajectory_running_cost(const sls_trajectory* traj, double* out);
sls_status sls_trajectory_length(const sls_trajectory* traj, int* out);
/* Max |difference| between the u (or beta) trajectories of two runs. */
sls_status sls_trajectory_max_deviation(const sls_trajectory* a, const sls_trajectory* b,
                                        double* u_dev, double* beta_dev);
/* Largest |u| (resp. |x|, |beta|) at time t; for decay probes. */
sls_status sls_trajectory_signal_norm(const sls_trajectory* traj, int t, double* out);
sls_status sls_trajectory_locality_violations(const sls_trajectory* traj, int* out);
/* Messages beyond the stage hop bounds (d for stages 1/3, 1 for stages 2/4). */
sls_status sls_trajectory_count_hop_violations(const sls_trajectory* traj,
                                               const sls_system* sys, int d, int* out);
sls_status sls_trajectory_dump_csv(const sls_trajectory* traj, const sls_system* sys,
                                   const char* path, const char* comment);
sls_status sls_trajectory_dump_messages_csv(const sls_trajectory* traj, const char* path,
                                            const char* comment);
void sls_trajectory_free(sls_trajectory* traj);

#ifdef __cplusplus
}
#endif

#endif /* SLS_CAPI_H */
