#pragma once

#include <vector>

#include "sls/slc.hpp"

namespace sls {

// Stage data of the transformed (cross-weighted, time-varying) LQR problem a
// column reduces to once the sparsity constraints are eliminated. Everything is
// projected onto the admissible supports so off-support modes are inert.
struct TransformedColumnData {
    // index 0..d-1 for stages k = 1..d; tail fields hold the static instance
    struct Stage {
        Mat kappa;  // m x n forced-input gain (already support-projected)
        Mat Q_t;    // n x n
        Mat Z_t;    // n_r x n cross weight
        Mat R_t;    // n_r x n_r
        Mat A_t;    // n x n
        Mat B_t;    // n x n_r
        Mat M_u_N;  // m x n_r  (M_u * N_F, reconstructs inputs from r)
        int n_r = 0;
    };
    std::vector<Stage> stage;  // size d
    Stage tail;
    int i = 0;
};

TransformedColumnData transform_column(const NetworkSystem& sys,
                                       const std::vector<ColumnEncoding>& encodings, int i);

struct RiccatiSolution {
    Mat X_tail;               // cost-to-go fixed point of the tail problem
    Mat K_tilde_tail;         // n_r x n gain in the reduced variable
    std::vector<Mat> X;       // X[k-1] for k = 1..d
    std::vector<Mat> K_tilde; // gains for k = 1..d
    std::vector<Mat> K_full;  // m x n maps phi_x[k] -> phi_u[k], k = 1..d
    Mat K_full_tail;
};

// Fixed-point iteration of the cross-weighted backward map on the tail data.
// Convergence: max-norm difference < tol, capped at max_iter sweeps.
std::pair<Mat, Mat> solve_tail_dare(const TransformedColumnData::Stage& tail,
                                    double tol = 1e-11, int max_iter = 100000);

RiccatiSolution riccati_backward(const TransformedColumnData& data, const Mat& x_tail,
                                 const Mat& k_tail);

// Block-companion realization of one column of the closed-loop maps:
// (d+1) n-blocks, subdiagonal closed-loop stage maps, self-looped tail block.
struct ColumnRealization {
    int i = 0;
    int d = 1;
    Mat A_blk;  // (d+1)n x (d+1)n
    Vec B_blk;  // (d+1)n   (seed e_i in the first block)
    Mat C_blk;  // n x (d+1)n   [I I ... I]
    Mat K_blk;  // m x (d+1)n   [K_full[1] ... K_full[d]  K_full_tail]
    double spectral_radius = 0.0;
};

ColumnRealization assemble_realization(const RiccatiSolution& sol,
                                       const TransformedColumnData& data, int i, int d);

// Whole-plant structured solution: per-column realizations plus kernels
// Phi_xw[k] (n x n) and Phi_uw[k] (m x n) for k = 1..t_eval.
struct StructuredSolution {
    std::vector<ColumnRealization> columns;
    std::vector<Mat> Phi_x;  // Phi_x[k], index 0 unused (zero matrix)
    std::vector<Mat> Phi_u;
    double cost = 0.0;        // squared H2, truncated at t_eval
    double tail_bound = 0.0;  // geometric bound on the truncation remainder
    int t_eval = 0;
};

// Solves every column problem (concurrently; results reduced in column order)
// and accumulates the weighted squared-H2 cost over t_eval kernels.
StructuredSolution synthesize_state_feedback(const NetworkSystem& sys,
                                             const SparsitySchedule& schedule, int t_eval);

// Dual estimation design: state-feedback synthesis on (A^T, C^T) with weights
// (W, V) and the kernel-wise transposed schedule; kernels are returned
// transposed so Phi_x holds Phi_ew (n x n) and Phi_u holds Phi_ev (n x p).
// Column realizations are kept in dual (untransposed) form for the simulator.
StructuredSolution synthesize_kalman_filter(const NetworkSystem& sys,
                                            const SparsitySchedule& schedule, int t_eval);

// Dual plant used by the Kalman synthesis; exposed for tests.
NetworkSystem dual_system(const NetworkSystem& sys);
SparsitySchedule transpose_schedule(const SparsitySchedule& schedule);

}  // namespace sls
