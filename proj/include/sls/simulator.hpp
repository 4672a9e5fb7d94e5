#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sls/kernels.hpp"

namespace sls {

// One logged exchange of Algorithm stage traffic. Stages 1 and 3 may travel up
// to d hops, stages 2 and 4 exactly one hop.
struct StageMessage {
    int t = 0;
    int stage = 0;  // 1..4
    int sender = 0;
    int receiver = 0;
    std::string payload;  // e.g. "beta", "y", "w_hat", "alpha_hat[3]"
    double value = 0.0;
};

// Per-node controller state for the message-passing execution of the composed
// output-feedback controller. Each node owns the realizations of its columns
// of the state-feedback factors (two instantiations: one driven by w~, one by
// v~) and the row realizations of the one-step-shifted estimation factors.
struct NodeController {
    int node = 0;
    std::vector<int> states;   // state coordinates owned by this node
    std::vector<int> inputs;   // input coordinates
    std::vector<int> outputs;  // output coordinates

    // row systems: one per owned state coordinate c, state dim (d+1)*n_dual
    std::vector<Mat> row_A;    // shared A-block transpose per column c
    std::vector<Mat> row_Bw;   // input from beta (n columns)
    std::vector<Mat> row_Bv;   // input from y (p columns)
    std::vector<Vec> row_out;  // output functional (seed row)
    std::vector<Vec> eta_w;    // states of z Phi_ew(c,:)
    std::vector<Vec> eta_v;    // states of z Phi_ev(c,:)

    // column systems: one per owned state coordinate c
    std::vector<const ColumnRealization*> sf_cols;
    std::vector<Vec> lambda;  // driven by w~ components
    std::vector<Vec> xi;      // driven by v~ components

    std::vector<int> n_in_1, n_in_d, n_out_1, n_out_d;  // cached node neighborhoods
};

struct TrajectoryRecord {
    // one row per timestep; coordinate-level signals
    std::vector<Vec> x, y, u, beta;
    std::vector<Vec> w_hat, v_hat, w_tilde, v_tilde, alpha, gamma, zeta, theta;
    std::vector<StageMessage> messages;
    double running_cost = 0.0;  // (1/T) sum x'Qx + u'Ru
    int locality_violations = 0;
};

// Deterministic noise stream shared by both simulators; optional impulses for
// the internal-stability probes.
struct SimOptions {
    int t_sim = 100;
    std::uint64_t seed = 0;
    bool record_messages = false;
    double noise_scale = 1.0;  // 0 disables noise
    int impulse_t = -1;        // -1: no injection
    enum class ImpulseAt { none, x, y, beta } impulse_at = ImpulseAt::none;
    int impulse_coord = 0;
    double divergence_guard = 1e9;
};

std::vector<NodeController> init_nodes(const StructuredSolution& sf,
                                       const StructuredSolution& kf,
                                       const NetworkSystem& sys,
                                       const InterconnectionGraph& graph, int d);

// Executes the four-stage message-passing loop against the plant. Message
// locality is enforced on every send; violations raise ProtocolError.
TrajectoryRecord run_closed_loop(const NetworkSystem& sys, const InterconnectionGraph& graph,
                                 std::vector<NodeController>& nodes, int d,
                                 const SimOptions& opt);

// Global reference controller: the composed maps evaluated by truncated-kernel
// convolution over history buffers, driven by the identical noise stream.
TrajectoryRecord run_centralized_reference(const ClosedLoopMaps& clm, const NetworkSystem& sys,
                                           const SimOptions& opt);

// CSV emission. Trajectory rows: (t, signal_name, node, value);
// message rows: (t, stage, sender, receiver, payload_name, value).
void dump_trajectory_csv(const TrajectoryRecord& rec, const NetworkSystem& sys,
                         const std::string& path, const std::string& comment);
void dump_messages_csv(const TrajectoryRecord& rec, const std::string& path,
                       const std::string& comment);

}  // namespace sls
