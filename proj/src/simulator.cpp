#include "sls/simulator.hpp"

#include <cstdio>

#include "sls/rng.hpp"

namespace sls {

namespace {

std::vector<std::vector<int>> coords_by_node(const std::vector<int>& node_of, int n_nodes) {
    std::vector<std::vector<int>> owned(static_cast<std::size_t>(n_nodes));
    for (std::size_t c = 0; c < node_of.size(); ++c)
        owned[static_cast<std::size_t>(node_of[c])].push_back(static_cast<int>(c));
    return owned;
}

struct NoiseStream {
    SplitMix64 rng;
    Mat w_half, v_half;
    double scale;
    explicit NoiseStream(const NetworkSystem& sys, const SimOptions& opt)
        : rng(opt.seed), w_half(symmetric_sqrt(sys.W)), v_half(symmetric_sqrt(sys.V)),
          scale(opt.noise_scale) {}
    // per timestep: v first (observed), then w (applied after u); fixed order
    Vec next_v() {
        Vec g(v_half.rows());
        for (Eigen::Index r = 0; r < g.size(); ++r) g(r) = rng.next_normal();
        return scale == 0.0 ? Vec::Zero(v_half.rows()) : Vec(scale * (v_half * g));
    }
    Vec next_w() {
        Vec g(w_half.rows());
        for (Eigen::Index r = 0; r < g.size(); ++r) g(r) = rng.next_normal();
        return scale == 0.0 ? Vec::Zero(w_half.rows()) : Vec(scale * (w_half * g));
    }
};

}  // namespace

std::vector<NodeController> init_nodes(const StructuredSolution& sf,
                                       const StructuredSolution& kf,
                                       const NetworkSystem& sys,
                                       const InterconnectionGraph& graph, int d) {
    if (static_cast<int>(sf.columns.size()) != sys.n() ||
        static_cast<int>(kf.columns.size()) != sys.n())
        throw InvalidConfigError("init_nodes: factor/plant dimension mismatch");

    auto states_of = coords_by_node(sys.node_of_state, sys.n_nodes);
    auto inputs_of = coords_by_node(sys.node_of_input, sys.n_nodes);
    auto outputs_of = coords_by_node(sys.node_of_output, sys.n_nodes);

    std::vector<NodeController> nodes(static_cast<std::size_t>(sys.n_nodes));
    for (int i = 0; i < sys.n_nodes; ++i) {
        NodeController& node = nodes[static_cast<std::size_t>(i)];
        node.node = i;
        node.states = states_of[static_cast<std::size_t>(i)];
        node.inputs = inputs_of[static_cast<std::size_t>(i)];
        node.outputs = outputs_of[static_cast<std::size_t>(i)];
        node.n_in_1 = graph.in_neighborhood(i, 1);
        node.n_in_d = graph.in_neighborhood(i, d);
        node.n_out_1 = node.n_in_1;  // hop metric is symmetric
        node.n_out_d = node.n_in_d;
        for (int c : node.states) {
            // row systems of z Phi_ew(c,:) and z Phi_ev(c,:): transposes of the
            // dual column realization; step() emits the one-step-ahead value
            const ColumnRealization& dual = kf.columns[static_cast<std::size_t>(c)];
            node.row_A.push_back(dual.A_blk.transpose());
            node.row_Bw.push_back(dual.C_blk.transpose());
            node.row_Bv.push_back(dual.K_blk.transpose());
            node.row_out.push_back(dual.B_blk);
            node.eta_w.push_back(Vec::Zero(dual.A_blk.rows()));
            node.eta_v.push_back(Vec::Zero(dual.A_blk.rows()));
            // two instantiations of the column system, one per driving signal
            const ColumnRealization& col = sf.columns[static_cast<std::size_t>(c)];
            node.sf_cols.push_back(&col);
            node.lambda.push_back(Vec::Zero(col.A_blk.rows()));
            node.xi.push_back(Vec::Zero(col.A_blk.rows()));
        }
    }
    return nodes;
}

TrajectoryRecord run_closed_loop(const NetworkSystem& sys, const InterconnectionGraph& graph,
                                 std::vector<NodeController>& nodes, int d,
                                 const SimOptions& opt) {
    const int n = sys.n(), m = sys.m(), p = sys.p();
    TrajectoryRecord rec;
    NoiseStream noise(sys, opt);

    Vec x = Vec::Zero(n);
    Vec beta = Vec::Zero(n);
    Vec w_hat_prev = Vec::Zero(n);  // \hat w(t) from the previous stage 1
    Vec v_hat_prev = Vec::Zero(n);
    double cost_acc = 0.0;

    auto log_msg = [&](int t, int stage, int sender, int receiver, std::string payload,
                       double value) {
        if (opt.record_messages)
            rec.messages.push_back({t, stage, sender, receiver, std::move(payload), value});
    };

    for (int t = 0; t < opt.t_sim; ++t) {
        Vec v = noise.next_v();
        if (opt.impulse_at == SimOptions::ImpulseAt::y && t == opt.impulse_t)
            v(opt.impulse_coord) += 1.0;
        Vec y = sys.C * x + v;

        // ---- stage 1: receive beta_j, y_j from N_in^d; advance the shifted
        // estimation row systems and emit \hat w(t+1), \hat v(t+1)
        Vec w_hat = Vec::Zero(n), v_hat = Vec::Zero(n);
        for (NodeController& node : nodes) {
            Vec beta_in = Vec::Zero(n), y_in = Vec::Zero(p);
            for (int j : node.n_in_d) {
                for (int c : nodes[static_cast<std::size_t>(j)].states) {
                    beta_in(c) = beta(c);
                    log_msg(t, 1, j, node.node, "beta[" + std::to_string(c) + "]", beta(c));
                }
                for (int o : nodes[static_cast<std::size_t>(j)].outputs) {
                    y_in(o) = y(o);
                    log_msg(t, 1, j, node.node, "y[" + std::to_string(o) + "]", y(o));
                }
            }
            for (std::size_t s = 0; s < node.states.size(); ++s) {
                node.eta_w[s] = node.row_A[s] * node.eta_w[s] + node.row_Bw[s] * beta_in;
                node.eta_v[s] = node.row_A[s] * node.eta_v[s] + node.row_Bv[s] * y_in;
                w_hat(node.states[s]) = node.row_out[s].dot(node.eta_w[s]);
                v_hat(node.states[s]) = node.row_out[s].dot(node.eta_v[s]);
            }
        }

        // ---- stage 2: receive \hat w_j(t), \hat v_j(t) from one hop; form the
        // innovation-like signals and advance the two column instantiations
        Vec w_tilde = Vec::Zero(n), v_tilde = Vec::Zero(n);
        std::vector<Vec> alpha_hat(static_cast<std::size_t>(n)), zeta_hat(static_cast<std::size_t>(n));
        std::vector<Vec> gamma_hat(static_cast<std::size_t>(n)), theta_hat(static_cast<std::size_t>(n));
        for (NodeController& node : nodes) {
            Vec wp = Vec::Zero(n), vp = Vec::Zero(n);
            for (int j : node.n_in_1) {
                for (int c : nodes[static_cast<std::size_t>(j)].states) {
                    wp(c) = w_hat_prev(c);
                    vp(c) = v_hat_prev(c);
                    log_msg(t, 2, j, node.node, "w_hat[" + std::to_string(c) + "]", wp(c));
                    log_msg(t, 2, j, node.node, "v_hat[" + std::to_string(c) + "]", vp(c));
                }
            }
            for (std::size_t s = 0; s < node.states.size(); ++s) {
                const int c = node.states[s];
                w_tilde(c) = beta(c) + sys.A.row(c).dot(wp) - w_hat(c);
                v_tilde(c) = sys.A.row(c).dot(vp) - v_hat(c);
                // theta is one lag behind zeta: emit it from the pre-update state
                theta_hat[static_cast<std::size_t>(c)] = node.sf_cols[s]->K_blk * node.xi[s];
                node.lambda[s] = node.sf_cols[s]->A_blk * node.lambda[s] +
                                 node.sf_cols[s]->B_blk * w_tilde(c);
                node.xi[s] = node.sf_cols[s]->A_blk * node.xi[s] +
                             node.sf_cols[s]->B_blk * v_tilde(c);
                alpha_hat[static_cast<std::size_t>(c)] = node.sf_cols[s]->C_blk * node.lambda[s];
                zeta_hat[static_cast<std::size_t>(c)] = node.sf_cols[s]->C_blk * node.xi[s];
                gamma_hat[static_cast<std::size_t>(c)] = node.sf_cols[s]->K_blk * node.lambda[s];
            }
        }

        // ---- stage 3: scatter the per-column contributions at most d hops and
        // sum the local elements
        Vec alpha = w_hat, zeta = v_hat;
        Vec gamma = Vec::Zero(m), theta = Vec::Zero(m);
        for (NodeController& node : nodes) {
            for (std::size_t s = 0; s < node.states.size(); ++s) {
                const int src = node.states[s];
                const auto si = static_cast<std::size_t>(src);
                for (int c = 0; c < n; ++c) {
                    double av = alpha_hat[si](c), zv = zeta_hat[si](c);
                    if (av != 0.0 || zv != 0.0) {
                        int dst = sys.node_of_state[static_cast<std::size_t>(c)];
                        if (!graph.within(dst, node.node, d)) {
                            ++rec.locality_violations;
                            throw ProtocolError("stage 3 hop bound violated: sender " +
                                                std::to_string(node.node) + " -> receiver " +
                                                std::to_string(dst) + " (hop > " +
                                                std::to_string(d) + ")");
                        }
                        alpha(c) += av;
                        zeta(c) += zv;
                        log_msg(t, 3, node.node, dst,
                                "alpha_hat[" + std::to_string(src) + "->" + std::to_string(c) + "]", av);
                        log_msg(t, 3, node.node, dst,
                                "zeta_hat[" + std::to_string(src) + "->" + std::to_string(c) + "]", zv);
                    }
                }
                for (int u = 0; u < m; ++u) {
                    double gv = gamma_hat[si](u), tv = theta_hat[si](u);
                    if (gv != 0.0 || tv != 0.0) {
                        int dst = sys.node_of_input[static_cast<std::size_t>(u)];
                        if (!graph.within(dst, node.node, d)) {
                            ++rec.locality_violations;
                            throw ProtocolError("stage 3 hop bound violated: sender " +
                                                std::to_string(node.node) + " -> receiver " +
                                                std::to_string(dst) + " (hop > " +
                                                std::to_string(d) + ")");
                        }
                        gamma(u) += gv;
                        theta(u) += tv;
                        log_msg(t, 3, node.node, dst,
                                "gamma_hat[" + std::to_string(src) + "->" + std::to_string(u) + "]", gv);
                        log_msg(t, 3, node.node, dst,
                                "theta_hat[" + std::to_string(src) + "->" + std::to_string(u) + "]", tv);
                    }
                }
            }
        }

        // ---- stage 4: receive alpha_j, gamma_j from one hop; update the
        // controller state and release the input
        Vec u_out = Vec::Zero(m);
        Vec beta_next = Vec::Zero(n);
        for (NodeController& node : nodes) {
            Vec alpha_in = Vec::Zero(n);
            Vec gamma_in = Vec::Zero(m);
            for (int j : node.n_in_1) {
                for (int c : nodes[static_cast<std::size_t>(j)].states) {
                    alpha_in(c) = alpha(c);
                    log_msg(t, 4, j, node.node, "alpha[" + std::to_string(c) + "]", alpha(c));
                }
                for (int u : nodes[static_cast<std::size_t>(j)].inputs) {
                    gamma_in(u) = gamma(u);
                    log_msg(t, 4, j, node.node, "gamma[" + std::to_string(u) + "]", gamma(u));
                }
            }
            for (int c : node.states)
                beta_next(c) = -sys.A.row(c).dot(alpha_in) - sys.B.row(c).dot(gamma_in) - zeta(c);
            for (int u : node.inputs) u_out(u) = gamma(u) + theta(u);
        }

        cost_acc += x.dot(sys.Q * x) + u_out.dot(sys.R * u_out);
        rec.x.push_back(x);
        rec.y.push_back(y);
        rec.u.push_back(u_out);
        rec.beta.push_back(beta);
        rec.w_hat.push_back(w_hat);
        rec.v_hat.push_back(v_hat);
        rec.w_tilde.push_back(w_tilde);
        rec.v_tilde.push_back(v_tilde);
        rec.alpha.push_back(alpha);
        rec.gamma.push_back(gamma);
        rec.zeta.push_back(zeta);
        rec.theta.push_back(theta);

        beta = beta_next;
        if (opt.impulse_at == SimOptions::ImpulseAt::beta && t == opt.impulse_t)
            beta(opt.impulse_coord) += 1.0;
        Vec w = noise.next_w();
        if (opt.impulse_at == SimOptions::ImpulseAt::x && t == opt.impulse_t)
            w(opt.impulse_coord) += 1.0;
        x = sys.A * x + sys.B * u_out + w;
        if (x.norm() > opt.divergence_guard)
            throw InstabilityError("distributed run diverged at t = " + std::to_string(t));
        w_hat_prev = w_hat;
        v_hat_prev = v_hat;
    }
    rec.running_cost = cost_acc / opt.t_sim;
    return rec;
}

TrajectoryRecord run_centralized_reference(const ClosedLoopMaps& clm, const NetworkSystem& sys,
                                           const SimOptions& opt) {
    const int n = sys.n();
    const int T = clm.T;
    TrajectoryRecord rec;
    NoiseStream noise(sys, opt);

    Vec x = Vec::Zero(n);
    std::vector<Vec> beta_hist{Vec::Zero(n)};  // beta(0) = 0
    std::vector<Vec> y_hist;
    double cost_acc = 0.0;

    auto conv = [T](const KernelSequence& g, const std::vector<Vec>& hist, int upto) {
        // sum_{k>=1} G[k] hist[upto - k]
        Vec acc = Vec::Zero(g.rows());
        int kmax = std::min(upto, T);
        for (int k = 1; k <= kmax; ++k)
            acc.noalias() += g.kernels[static_cast<std::size_t>(k)] *
                             hist[static_cast<std::size_t>(upto - k)];
        return acc;
    };

    for (int t = 0; t < opt.t_sim; ++t) {
        Vec v = noise.next_v();
        if (opt.impulse_at == SimOptions::ImpulseAt::y && t == opt.impulse_t)
            v(opt.impulse_coord) += 1.0;
        Vec y = sys.C * x + v;
        y_hist.push_back(y);

        Vec alpha = conv(clm.Phi_xx, beta_hist, t + 1);
        Vec gamma = conv(clm.Phi_ux, beta_hist, t + 1);
        Vec zeta = conv(clm.Phi_xy, y_hist, t + 1);
        Vec theta = conv(clm.Phi_uy, y_hist, t);
        Vec u = gamma + theta;
        Vec beta_next = -sys.A * alpha - sys.B * gamma - zeta;
        if (opt.impulse_at == SimOptions::ImpulseAt::beta && t == opt.impulse_t)
            beta_next(opt.impulse_coord) += 1.0;

        cost_acc += x.dot(sys.Q * x) + u.dot(sys.R * u);
        rec.x.push_back(x);
        rec.y.push_back(y);
        rec.u.push_back(u);
        rec.beta.push_back(beta_hist.back());
        rec.alpha.push_back(alpha);
        rec.gamma.push_back(gamma);
        rec.zeta.push_back(zeta);
        rec.theta.push_back(theta);

        beta_hist.push_back(beta_next);

        Vec w = noise.next_w();
        if (opt.impulse_at == SimOptions::ImpulseAt::x && t == opt.impulse_t)
            w(opt.impulse_coord) += 1.0;
        x = sys.A * x + sys.B * u + w;
        if (x.norm() > opt.divergence_guard)
            throw InstabilityError("centralized run diverged at t = " + std::to_string(t));
    }
    rec.running_cost = cost_acc / opt.t_sim;
    return rec;
}

namespace {

void dump_signal(std::FILE* f, const char* name, const std::vector<Vec>& rows,
                 const std::vector<int>& node_of) {
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (Eigen::Index c = 0; c < rows[t].size(); ++c)
            std::fprintf(f, "%zu,%s,%d,%.17g\n", t, name,
                         node_of[static_cast<std::size_t>(c)], rows[t](c));
}

}  // namespace

void dump_trajectory_csv(const TrajectoryRecord& rec, const NetworkSystem& sys,
                         const std::string& path, const std::string& comment) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot write trajectory csv: " + path);
    std::fprintf(f, "# %s\n", comment.c_str());
    std::fprintf(f, "t,signal_name,node,value\n");
    dump_signal(f, "x", rec.x, sys.node_of_state);
    dump_signal(f, "y", rec.y, sys.node_of_output);
    dump_signal(f, "u", rec.u, sys.node_of_input);
    dump_signal(f, "beta", rec.beta, sys.node_of_state);
    dump_signal(f, "w_hat", rec.w_hat, sys.node_of_state);
    dump_signal(f, "v_hat", rec.v_hat, sys.node_of_state);
    dump_signal(f, "w_tilde", rec.w_tilde, sys.node_of_state);
    dump_signal(f, "v_tilde", rec.v_tilde, sys.node_of_state);
    dump_signal(f, "alpha", rec.alpha, sys.node_of_state);
    dump_signal(f, "gamma", rec.gamma, sys.node_of_input);
    dump_signal(f, "zeta", rec.zeta, sys.node_of_state);
    dump_signal(f, "theta", rec.theta, sys.node_of_input);
    std::fclose(f);
}

void dump_messages_csv(const TrajectoryRecord& rec, const std::string& path,
                       const std::string& comment) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot write message csv: " + path);
    std::fprintf(f, "# %s\n", comment.c_str());
    std::fprintf(f, "t,stage,sender,receiver,payload_name,value\n");
    for (const StageMessage& msg : rec.messages)
        std::fprintf(f, "%d,%d,%d,%d,%s,%.17g\n", msg.t, msg.stage, msg.sender, msg.receiver,
                     msg.payload.c_str(), msg.value);
    std::fclose(f);
}

}  // namespace sls
