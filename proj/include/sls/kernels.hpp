#pragma once

#include <string>
#include <vector>

#include "sls/sf_synthesis.hpp"

namespace sls {

// Truncated convolution-kernel representation of a transfer operator
// G(z) = sum_k z^{-k} G[k], k = 0..T.
struct KernelSequence {
    std::vector<Mat> kernels;  // size T+1
    bool strictly_proper = false;

    int horizon() const { return static_cast<int>(kernels.size()) - 1; }
    int rows() const { return kernels.empty() ? 0 : static_cast<int>(kernels[0].rows()); }
    int cols() const { return kernels.empty() ? 0 : static_cast<int>(kernels[0].cols()); }

    static KernelSequence zero(int rows, int cols, int T, bool strictly_proper = true);
};

// Multiply by z: G'[k] = G[k+1]. Requires a strictly proper input.
KernelSequence shift(const KernelSequence& g);

// (G * H)[k] = sum_j G[j] H[k-j], truncated at T.
KernelSequence convolve(const KernelSequence& g, const KernelSequence& h, int T);

// The four disturbance-to-signal closed-loop maps of an output-feedback
// controller, plus the factors they were composed from.
struct ClosedLoopMaps {
    KernelSequence Phi_xx, Phi_ux, Phi_xy, Phi_uy;
    // factors (state-feedback and estimation halves)
    KernelSequence sf_xw, sf_uw, kf_ew, kf_ev;
    int d = 0;
    int T = 0;
};

// Separation-principle composition of a state-feedback solution and an
// estimation solution into output-feedback closed-loop maps, at kernel level.
ClosedLoopMaps compose_output_feedback(const StructuredSolution& sf,
                                       const StructuredSolution& kf,
                                       const NetworkSystem& sys, int T);

// max_k || Phi_xw[k+1] - A Phi_xw[k] - B Phi_uw[k] - delta_{k,0} I ||_max over k <= T.
double verify_sf_feasibility(const std::vector<Mat>& phi_x, const std::vector<Mat>& phi_u,
                             const NetworkSystem& sys, int T);

// Max residual over both closed-loop identities (left and right, including the
// C-weighted columns).
double verify_of_feasibility(const ClosedLoopMaps& clm, const NetworkSystem& sys, int T);

struct H2Result {
    double cost = 0.0;  // squared H2 value, truncated
    double tail_bound = 0.0;
};

// Squared H2 norm of blockdiag(Q^1/2, R^1/2) * Phi * blockdiag(W^1/2, V^1/2).
H2Result h2_cost(const ClosedLoopMaps& clm, const NetworkSystem& sys, int T);

// Largest hop distance carrying a kernel entry above the zero threshold,
// scanned over all four composed maps.
int localization_width(const ClosedLoopMaps& clm, const InterconnectionGraph& graph,
                       const NetworkSystem& sys, int T, double zero_tol = 1e-10);
int localization_width(const std::vector<Mat>& phi_x, const std::vector<Mat>& phi_u,
                       const InterconnectionGraph& graph, const NetworkSystem& sys, int T,
                       double zero_tol = 1e-10);

// One row per (map, lag, i, j, value) in deterministic order; entries below
// zero_tol are omitted.
void dump_kernels_csv(const ClosedLoopMaps& clm, const std::string& path,
                      const std::string& comment, double zero_tol = 1e-10);

}  // namespace sls
