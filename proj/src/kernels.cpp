#include "sls/kernels.hpp"

#include <cinttypes>
#include <cstdio>

namespace sls {

KernelSequence KernelSequence::zero(int rows, int cols, int T, bool strictly_proper) {
    KernelSequence seq;
    seq.strictly_proper = strictly_proper;
    seq.kernels.assign(static_cast<std::size_t>(T) + 1, Mat::Zero(rows, cols));
    return seq;
}

KernelSequence shift(const KernelSequence& g) {
    if (!g.strictly_proper)
        throw InvalidConfigError("shift: input must be strictly proper");
    if (g.kernels.empty() || max_abs(g.kernels[0]) != 0.0)
        throw InvalidConfigError("shift: lag-0 kernel must be zero");
    KernelSequence out;
    out.strictly_proper = false;
    out.kernels.assign(g.kernels.begin() + 1, g.kernels.end());
    return out;
}

KernelSequence convolve(const KernelSequence& g, const KernelSequence& h, int T) {
    if (g.cols() != h.rows())
        throw InvalidConfigError("convolve: inner dimensions mismatch");
    KernelSequence out = KernelSequence::zero(g.rows(), h.cols(), T, false);
    const int gt = g.horizon(), ht = h.horizon();
    for (int k = 0; k <= T; ++k) {
        Mat acc = Mat::Zero(g.rows(), h.cols());
        for (int j = std::max(0, k - ht); j <= std::min(k, gt); ++j)
            acc.noalias() += g.kernels[static_cast<std::size_t>(j)] *
                             h.kernels[static_cast<std::size_t>(k - j)];
        out.kernels[static_cast<std::size_t>(k)] = std::move(acc);
    }
    out.strictly_proper = max_abs(out.kernels[0]) == 0.0;
    return out;
}

namespace {

KernelSequence from_kernels(const std::vector<Mat>& ks, int T) {
    KernelSequence seq;
    seq.strictly_proper = true;
    seq.kernels.reserve(static_cast<std::size_t>(T) + 1);
    for (int k = 0; k <= T; ++k)
        seq.kernels.push_back(k < static_cast<int>(ks.size()) ? ks[static_cast<std::size_t>(k)]
                                                              : Mat::Zero(ks[0].rows(), ks[0].cols()));
    return seq;
}

// (zI - A) G at kernel level: D[k] = G[k+1] - A G[k]. Proper (lag-0 = G[1]).
KernelSequence z_minus_a_times(const Mat& a, const KernelSequence& g, int T) {
    KernelSequence out = KernelSequence::zero(g.rows(), g.cols(), T, false);
    for (int k = 0; k <= T; ++k) {
        Mat nxt = (k + 1 <= g.horizon()) ? g.kernels[static_cast<std::size_t>(k + 1)]
                                         : Mat::Zero(g.rows(), g.cols());
        out.kernels[static_cast<std::size_t>(k)] = nxt - a * g.kernels[static_cast<std::size_t>(k)];
    }
    out.strictly_proper = false;
    return out;
}

KernelSequence subtract(const KernelSequence& a, const KernelSequence& b) {
    KernelSequence out = a;
    for (std::size_t k = 0; k < out.kernels.size(); ++k) out.kernels[k] -= b.kernels[k];
    return out;
}

KernelSequence add(const KernelSequence& a, const KernelSequence& b) {
    KernelSequence out = a;
    for (std::size_t k = 0; k < out.kernels.size(); ++k) out.kernels[k] += b.kernels[k];
    return out;
}

}  // namespace

ClosedLoopMaps compose_output_feedback(const StructuredSolution& sf,
                                       const StructuredSolution& kf,
                                       const NetworkSystem& sys, int T) {
    if (sf.Phi_x.empty() || kf.Phi_x.empty())
        throw InvalidConfigError("compose: empty factor solutions");
    if (sf.Phi_x[0].rows() != sys.n() || kf.Phi_x[0].rows() != sys.n())
        throw InvalidConfigError("compose: factor/plant dimension mismatch");

    // factors need kernels to T+1 for the shift inside (zI - A)
    const int ft = std::min(sf.t_eval, kf.t_eval);
    if (ft < T + 1)
        throw InvalidConfigError("compose: factors too short for requested horizon");

    ClosedLoopMaps clm;
    clm.T = T;
    clm.sf_xw = from_kernels(sf.Phi_x, T + 1);
    clm.sf_uw = from_kernels(sf.Phi_u, T + 1);
    clm.kf_ew = from_kernels(kf.Phi_x, T + 1);
    clm.kf_ev = from_kernels(kf.Phi_u, T + 1);

    KernelSequence zw = z_minus_a_times(sys.A, clm.kf_ew, T);
    KernelSequence zv = z_minus_a_times(sys.A, clm.kf_ev, T);

    KernelSequence sfx = from_kernels(sf.Phi_x, T);
    KernelSequence sfu = from_kernels(sf.Phi_u, T);
    KernelSequence kfw = from_kernels(kf.Phi_x, T);
    KernelSequence kfv = from_kernels(kf.Phi_u, T);

    clm.Phi_xx = subtract(add(sfx, kfw), convolve(sfx, zw, T));
    clm.Phi_ux = subtract(sfu, convolve(sfu, zw, T));
    clm.Phi_xy = subtract(kfv, convolve(sfx, zv, T));
    KernelSequence uy = convolve(sfu, zv, T);
    for (auto& kmat : uy.kernels) kmat = -kmat;
    clm.Phi_uy = std::move(uy);

    for (KernelSequence* seq : {&clm.Phi_xx, &clm.Phi_ux, &clm.Phi_xy, &clm.Phi_uy}) {
        seq->strictly_proper = true;
        seq->kernels[0].setZero();  // exact zero by construction; enforce bit-exactly
    }
    return clm;
}

double verify_sf_feasibility(const std::vector<Mat>& phi_x, const std::vector<Mat>& phi_u,
                             const NetworkSystem& sys, int T) {
    const int n = sys.n();
    const int last = std::min<int>(T, static_cast<int>(phi_x.size()) - 2);
    double resid = 0.0;
    for (int k = 0; k <= last; ++k) {
        Mat x_k = (k == 0) ? Mat::Zero(n, n) : phi_x[static_cast<std::size_t>(k)];
        Mat u_k = (k == 0) ? Mat::Zero(sys.m(), n) : phi_u[static_cast<std::size_t>(k)];
        Mat lhs = phi_x[static_cast<std::size_t>(k + 1)] - sys.A * x_k - sys.B * u_k;
        if (k == 0) lhs -= Mat::Identity(n, n);
        resid = std::max(resid, max_abs(lhs));
    }
    return resid;
}

double verify_of_feasibility(const ClosedLoopMaps& clm, const NetworkSystem& sys, int T) {
    const int n = sys.n();
    const Mat eye = Mat::Identity(n, n);
    const int last = std::min(T, clm.T - 1);
    double resid = 0.0;
    auto at = [](const KernelSequence& s, int k) -> const Mat& {
        return s.kernels[static_cast<std::size_t>(k)];
    };
    for (int k = 0; k <= last; ++k) {
        // left identity rows: (zI - A) [Phi_xx Phi_xy] - B [Phi_ux Phi_uy] = [I 0]
        Mat l1 = at(clm.Phi_xx, k + 1) - sys.A * at(clm.Phi_xx, k) - sys.B * at(clm.Phi_ux, k);
        if (k == 0) l1 -= eye;
        Mat l2 = at(clm.Phi_xy, k + 1) - sys.A * at(clm.Phi_xy, k) - sys.B * at(clm.Phi_uy, k);
        // right identity columns: [Phi_xx Phi_xy; Phi_ux Phi_uy] [zI - A; -C] = [I; 0]
        Mat r1 = at(clm.Phi_xx, k + 1) - at(clm.Phi_xx, k) * sys.A - at(clm.Phi_xy, k) * sys.C;
        if (k == 0) r1 -= eye;
        Mat r2 = at(clm.Phi_ux, k + 1) - at(clm.Phi_ux, k) * sys.A - at(clm.Phi_uy, k) * sys.C;
        resid = std::max({resid, max_abs(l1), max_abs(l2), max_abs(r1), max_abs(r2)});
    }
    return resid;
}

H2Result h2_cost(const ClosedLoopMaps& clm, const NetworkSystem& sys, int T) {
    const Mat qh = symmetric_sqrt(sys.Q);
    const Mat rh = symmetric_sqrt(sys.R);
    const Mat wh = symmetric_sqrt(sys.W);
    const Mat vh = symmetric_sqrt(sys.V);
    const int last = std::min(T, clm.T);
    H2Result res;
    for (int k = 1; k <= last; ++k) {
        const auto ki = static_cast<std::size_t>(k);
        res.cost += (qh * clm.Phi_xx.kernels[ki] * wh).squaredNorm();
        res.cost += (qh * clm.Phi_xy.kernels[ki] * vh).squaredNorm();
        res.cost += (rh * clm.Phi_ux.kernels[ki] * wh).squaredNorm();
        res.cost += (rh * clm.Phi_uy.kernels[ki] * vh).squaredNorm();
    }
    // geometric remainder estimate from the composed kernels' decay rate
    double tail_norm = 0.0, prev_norm = 0.0;
    for (const KernelSequence* seq : {&clm.Phi_xx, &clm.Phi_ux, &clm.Phi_xy, &clm.Phi_uy}) {
        tail_norm += seq->kernels[static_cast<std::size_t>(last)].norm();
        if (last > 1) prev_norm += seq->kernels[static_cast<std::size_t>(last - 1)].norm();
    }
    double ratio = (prev_norm > 0.0) ? std::min(tail_norm / prev_norm, 0.999) : 0.0;
    res.tail_bound = (tail_norm > 0.0) ? tail_norm * tail_norm / (1.0 - ratio * ratio) : 0.0;
    return res;
}

namespace {

int width_of(const std::vector<Mat>& kernels, const std::vector<int>& row_nodes,
             const std::vector<int>& col_nodes, const InterconnectionGraph& graph, int T,
             double zero_tol) {
    int w = 0;
    const int last = std::min<int>(T, static_cast<int>(kernels.size()) - 1);
    for (int k = 1; k <= last; ++k) {
        const Mat& mk = kernels[static_cast<std::size_t>(k)];
        for (Eigen::Index r = 0; r < mk.rows(); ++r)
            for (Eigen::Index c = 0; c < mk.cols(); ++c)
                if (std::abs(mk(r, c)) > zero_tol) {
                    int h = graph.hop_distance(row_nodes[static_cast<std::size_t>(r)],
                                               col_nodes[static_cast<std::size_t>(c)]);
                    if (h != kUnreachable) w = std::max(w, h);
                }
    }
    return w;
}

std::vector<Mat> seq_kernels(const KernelSequence& s) { return s.kernels; }

}  // namespace

int localization_width(const ClosedLoopMaps& clm, const InterconnectionGraph& graph,
                       const NetworkSystem& sys, int T, double zero_tol) {
    int w = 0;
    w = std::max(w, width_of(seq_kernels(clm.Phi_xx), sys.node_of_state, sys.node_of_state, graph, T, zero_tol));
    w = std::max(w, width_of(seq_kernels(clm.Phi_ux), sys.node_of_input, sys.node_of_state, graph, T, zero_tol));
    w = std::max(w, width_of(seq_kernels(clm.Phi_xy), sys.node_of_state, sys.node_of_output, graph, T, zero_tol));
    w = std::max(w, width_of(seq_kernels(clm.Phi_uy), sys.node_of_input, sys.node_of_output, graph, T, zero_tol));
    return w;
}

int localization_width(const std::vector<Mat>& phi_x, const std::vector<Mat>& phi_u,
                       const InterconnectionGraph& graph, const NetworkSystem& sys, int T,
                       double zero_tol) {
    int w = width_of(phi_x, sys.node_of_state, sys.node_of_state, graph, T, zero_tol);
    return std::max(w, width_of(phi_u, sys.node_of_input, sys.node_of_state, graph, T, zero_tol));
}

void dump_kernels_csv(const ClosedLoopMaps& clm, const std::string& path,
                      const std::string& comment, double zero_tol) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot write kernel csv: " + path);
    std::fprintf(f, "# %s\n", comment.c_str());
    std::fprintf(f, "map,lag,i,j,value\n");
    auto dump = [&](const char* name, const KernelSequence& seq) {
        for (int k = 0; k <= seq.horizon(); ++k) {
            const Mat& mk = seq.kernels[static_cast<std::size_t>(k)];
            for (Eigen::Index r = 0; r < mk.rows(); ++r)
                for (Eigen::Index c = 0; c < mk.cols(); ++c)
                    if (std::abs(mk(r, c)) > zero_tol)
                        std::fprintf(f, "%s,%d,%td,%td,%.17g\n", name, k, r, c, mk(r, c));
        }
    };
    dump("phi_xx", clm.Phi_xx);
    dump("phi_ux", clm.Phi_ux);
    dump("phi_xy", clm.Phi_xy);
    dump("phi_uy", clm.Phi_uy);
    std::fclose(f);
}

}  // namespace sls
