#pragma once

#include <limits>
#include <string>
#include <vector>

#include "sls/linalg.hpp"

namespace sls {

// Hop distance marker for unreachable node pairs.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// Plant, noise, and cost data for a networked LTI system
//   x(t+1) = A x(t) + B u(t) + w(t),  y(t) = C x(t) + v(t),
// with coordinates assigned to nodes by the partition maps.
struct NetworkSystem {
    Mat A;  // n x n
    Mat B;  // n x m
    Mat C;  // p x n
    Mat W;  // n x n process-noise covariance
    Mat V;  // p x p measurement-noise covariance
    Mat Q;  // n x n state cost
    Mat R;  // m x m input cost
    std::vector<int> node_of_state;
    std::vector<int> node_of_input;
    std::vector<int> node_of_output;
    int n_nodes = 0;

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int p() const { return static_cast<int>(C.rows()); }

    // Throws on asymmetric/indefinite weights or malformed partitions.
    void validate() const;
};

// Node-level coupling structure of the plant.
struct InterconnectionGraph {
    int n_nodes = 0;
    IntMat support;       // node-level Sp(A), with explicit self loops
    IntMat hop_distance;  // BFS shortest-path metric; kUnreachable off-component

    bool within(int i, int j, int k) const {
        int h = hop_distance(i, j);
        return h != kUnreachable && h <= k;
    }
    // Nodes whose signals reach node i within k hops.
    std::vector<int> in_neighborhood(int i, int k) const;
};

struct ExperimentConfig {
    int n_nodes = 15;
    double alpha = 0.6;
    double rho = 1.0;
    double q_scale = 1.0;
    double r_scale = 300.0;
    int d = 3;
    std::uint64_t seed = 0;
    int t_sim = 500;
    int t_eval = 200;
    int fir_horizon = 20;

    void validate() const;
};

// Bi-directional scalar chain: tridiagonal A with diagonal rho*(1-2*alpha) and
// off-diagonals rho*alpha; B = C = I, W = V = I, Q = q_scale*I, R = r_scale*I.
NetworkSystem build_chain_network(int n_nodes, double alpha, double rho, double q_scale,
                                  double r_scale);

NetworkSystem build_system(const ExperimentConfig& cfg);

InterconnectionGraph build_graph(const NetworkSystem& sys);

// key = value text config; unknown keys rejected, empty file yields defaults.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);
std::string config_to_text(const ExperimentConfig& cfg);

// FNV-1a over the canonical config text; stamped into CSV comment lines.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Bit-exact round trip (hex float formatting).
void save_system(const NetworkSystem& sys, const std::string& path);
NetworkSystem load_system(const std::string& path);

}  // namespace sls
