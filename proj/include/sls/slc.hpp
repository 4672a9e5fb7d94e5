#pragma once

#include <optional>
#include <vector>

#include "sls/system_model.hpp"

namespace sls {

// Sparsity schedule {S[k]}: S_x[k] bounds the state kernels, S_u[k] the input
// kernels, for k = 1..d with a constant tail equal to the k = d pattern.
// Entries are coordinate-level binary masks lifted from node level.
struct SparsitySchedule {
    int d = 1;
    std::vector<IntMat> S_x;  // size d, S_x[k-1] is the lag-k mask (n x n)
    std::vector<IntMat> S_u;  // size d (m x n)

    const IntMat& sx(int k) const { return S_x[static_cast<std::size_t>(std::min(k, d) - 1)]; }
    const IntMat& su(int k) const { return S_u[static_cast<std::size_t>(std::min(k, d) - 1)]; }
};

// Delayed localization: S[k] = k-hop balls of the interconnection graph for
// k <= d, constant thereafter. Inputs mirror the node-level state pattern.
SparsitySchedule build_delayed_localization(const InterconnectionGraph& graph,
                                            const NetworkSystem& sys, int d);

// No sparsity at all (every kernel unconstrained); the synthesis then reduces
// to the classical unstructured solution.
SparsitySchedule all_ones_schedule(const NetworkSystem& sys);

// Column i's supports, index 1..d+1 (d+1 = constant tail).
struct ColumnSparsity {
    int i = 0;
    std::vector<IntVec> s_x;  // [0] unused
    std::vector<IntVec> s_u;
};

ColumnSparsity column_sparsity(const SparsitySchedule& schedule, int i);

// Prune s_x to the continuation-feasible envelope: drop coordinates whose
// one-step leak cannot be cancelled by the admissible inputs (backward fixed
// point), then intersect with forward reachability from the seed. Any feasible
// trajectory already satisfies the pruned supports, so the constraint set and
// its optimum are unchanged. Throws SynthesisError if the seed itself is pruned.
void tighten_column_sparsity(const NetworkSystem& sys, ColumnSparsity& col);

// Selection machinery for one transition k -> k+1 of a column problem:
//   M_x picks the coordinates forced to zero at k+1, M_u embeds the free
//   inputs at k, F = M_x B M_u, N_F spans null(F).
struct ColumnEncoding {
    Mat M_x_next;     // (n - n_x[k+1]) x n
    Mat M_u;          // m x n_u[k]
    Mat F;            // rows(M_x_next) x n_u[k]
    Mat F_pinv;       // n_u[k] x rows
    Mat N_F;          // n_u[k] x n_r[k], orthonormal columns, sign-fixed
    IntVec s_x_cur;   // admissible support at k (length n)
    IntVec s_x_next;  // at k+1
    int n_r = 0;
};

// k is 1-based; k in 1..d are the transient stages, k = d+1 the tail (maps the
// tail support to itself).
ColumnEncoding encode_column(const ColumnSparsity& col, const NetworkSystem& sys, int k);

struct FeasibilityReport {
    bool feasible = true;
    int first_infeasible_k = 0;  // valid when !feasible
    double worst_residual = 0.0;
};

// Checks, for every stage k = 1..d+1 and every admissible basis vector phi,
// that M_x[k+1] A phi lies in the column space of F[k] (residual <= tol).
FeasibilityReport check_column_feasibility(const std::vector<ColumnEncoding>& encodings,
                                           const NetworkSystem& sys, int i,
                                           double tol = 1e-9);

// Convenience: sparsity -> tightened encodings for stages 1..d+1.
std::vector<ColumnEncoding> encode_all_stages(const ColumnSparsity& col,
                                              const NetworkSystem& sys);

}  // namespace sls
