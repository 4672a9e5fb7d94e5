#include "sls/slc.hpp"

#include <Eigen/SVD>

#include <algorithm>

namespace sls {

SparsitySchedule build_delayed_localization(const InterconnectionGraph& graph,
                                            const NetworkSystem& sys, int d) {
    if (d < 1) throw InvalidConfigError("d must be >= 1");
    SparsitySchedule sched;
    sched.d = d;
    const int n = sys.n(), m = sys.m();
    sched.S_x.reserve(static_cast<std::size_t>(d));
    sched.S_u.reserve(static_cast<std::size_t>(d));
    for (int k = 1; k <= d; ++k) {
        IntMat sx = IntMat::Zero(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                if (graph.within(sys.node_of_state[r], sys.node_of_state[c], k)) sx(r, c) = 1;
        IntMat su = IntMat::Zero(m, n);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < n; ++c)
                if (graph.within(sys.node_of_input[r], sys.node_of_state[c], k)) su(r, c) = 1;
        sched.S_x.push_back(std::move(sx));
        sched.S_u.push_back(std::move(su));
    }
    return sched;
}

SparsitySchedule all_ones_schedule(const NetworkSystem& sys) {
    SparsitySchedule sched;
    sched.d = 1;
    sched.S_x.push_back(IntMat::Ones(sys.n(), sys.n()));
    sched.S_u.push_back(IntMat::Ones(sys.m(), sys.n()));
    return sched;
}

ColumnSparsity column_sparsity(const SparsitySchedule& schedule, int i) {
    ColumnSparsity col;
    col.i = i;
    const int d = schedule.d;
    col.s_x.resize(static_cast<std::size_t>(d) + 2);
    col.s_u.resize(static_cast<std::size_t>(d) + 2);
    for (int k = 1; k <= d + 1; ++k) {
        col.s_x[static_cast<std::size_t>(k)] = schedule.sx(k).col(i);
        col.s_u[static_cast<std::size_t>(k)] = schedule.su(k).col(i);
    }
    return col;
}

namespace {

// Can mass at coordinate c be continued: the part of A(:,c) that lands outside
// s_next must be cancellable by inputs free in s_u.
bool leak_cancellable(const NetworkSystem& sys, int c, const IntVec& s_next, const IntVec& s_u) {
    const int n = sys.n();
    std::vector<int> out_rows;
    for (int r = 0; r < n; ++r)
        if (!s_next(r) && sys.A(r, c) != 0.0) out_rows.push_back(r);
    if (out_rows.empty()) return true;
    std::vector<int> in_cols;
    for (int u = 0; u < sys.m(); ++u)
        if (s_u(u)) in_cols.push_back(u);
    if (in_cols.empty()) return false;
    Mat bsub(static_cast<Eigen::Index>(out_rows.size()), static_cast<Eigen::Index>(in_cols.size()));
    Vec lead(static_cast<Eigen::Index>(out_rows.size()));
    for (std::size_t r = 0; r < out_rows.size(); ++r) {
        lead(static_cast<Eigen::Index>(r)) = sys.A(out_rows[r], c);
        for (std::size_t u = 0; u < in_cols.size(); ++u)
            bsub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(u)) =
                sys.B(out_rows[r], in_cols[u]);
    }
    Vec sol = bsub.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-lead);
    return (bsub * sol + lead).cwiseAbs().maxCoeff() < 1e-9;
}

}  // namespace

void tighten_column_sparsity(const NetworkSystem& sys, ColumnSparsity& col) {
    const int n = sys.n();
    const int tail = static_cast<int>(col.s_x.size()) - 1;  // == d + 1

    // tail must be able to continue into itself
    bool changed = true;
    while (changed) {
        changed = false;
        IntVec& st = col.s_x[static_cast<std::size_t>(tail)];
        for (int c = 0; c < n; ++c) {
            if (!st(c)) continue;
            if (!leak_cancellable(sys, c, st, col.s_u[static_cast<std::size_t>(tail)])) {
                st(c) = 0;
                changed = true;
            }
        }
    }
    // transient stages, latest first
    for (int k = tail - 1; k >= 1; --k) {
        changed = true;
        while (changed) {
            changed = false;
            IntVec& sk = col.s_x[static_cast<std::size_t>(k)];
            for (int c = 0; c < n; ++c) {
                if (!sk(c)) continue;
                if (!leak_cancellable(sys, c, col.s_x[static_cast<std::size_t>(k) + 1],
                                      col.s_u[static_cast<std::size_t>(k)])) {
                    sk(c) = 0;
                    changed = true;
                }
            }
        }
    }
    // forward reachability: the seed, then one-hop dynamics spread plus
    // whatever the admissible inputs can write
    if (!col.s_x[1](col.i))
        throw SynthesisError("column " + std::to_string(col.i) +
                             ": seed is not continuation-feasible under the schedule");
    IntVec reach = IntVec::Zero(n);
    reach(col.i) = 1;
    col.s_x[1] = col.s_x[1].cwiseProduct(reach);
    for (int k = 1; k < tail; ++k) {
        IntVec nxt = IntVec::Zero(n);
        for (int r = 0; r < n; ++r) {
            bool hit = false;
            for (int c = 0; c < n && !hit; ++c)
                if (col.s_x[static_cast<std::size_t>(k)](c) && sys.A(r, c) != 0.0) hit = true;
            for (int u = 0; u < sys.m() && !hit; ++u)
                if (col.s_u[static_cast<std::size_t>(k)](u) && sys.B(r, u) != 0.0) hit = true;
            nxt(r) = hit ? 1 : 0;
        }
        col.s_x[static_cast<std::size_t>(k) + 1] =
            col.s_x[static_cast<std::size_t>(k) + 1].cwiseProduct(nxt);
    }
}

ColumnEncoding encode_column(const ColumnSparsity& col, const NetworkSystem& sys, int k) {
    const int n = sys.n(), m = sys.m();
    const int tail = static_cast<int>(col.s_x.size()) - 1;
    if (k < 1 || k > tail) throw InvalidConfigError("encode_column: k out of range");
    const IntVec& sx_cur = col.s_x[static_cast<std::size_t>(k)];
    const IntVec& sx_next = col.s_x[static_cast<std::size_t>(std::min(k + 1, tail))];
    const IntVec& su = col.s_u[static_cast<std::size_t>(k)];

    ColumnEncoding enc;
    enc.s_x_cur = sx_cur;
    enc.s_x_next = sx_next;

    std::vector<int> zero_rows;
    for (int r = 0; r < n; ++r)
        if (!sx_next(r)) zero_rows.push_back(r);
    enc.M_x_next = Mat::Zero(static_cast<Eigen::Index>(zero_rows.size()), n);
    for (std::size_t r = 0; r < zero_rows.size(); ++r)
        enc.M_x_next(static_cast<Eigen::Index>(r), zero_rows[r]) = 1.0;

    std::vector<int> free_cols;
    for (int u = 0; u < m; ++u)
        if (su(u)) free_cols.push_back(u);
    enc.M_u = Mat::Zero(m, static_cast<Eigen::Index>(free_cols.size()));
    for (std::size_t c = 0; c < free_cols.size(); ++c)
        enc.M_u(free_cols[c], static_cast<Eigen::Index>(c)) = 1.0;

    enc.F = enc.M_x_next * sys.B * enc.M_u;
    const Eigen::Index nu = enc.F.cols();
    if (enc.F.rows() == 0 || nu == 0) {
        enc.N_F = Mat::Identity(nu, nu);
        enc.F_pinv = Mat::Zero(nu, enc.F.rows());
    } else {
        Eigen::BDCSVD<Mat> svd(enc.F, Eigen::ComputeFullV | Eigen::ComputeFullU);
        double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        double tol = 1e-10 * std::max(smax, 1.0e-300);
        Eigen::Index rank = 0;
        for (Eigen::Index s = 0; s < svd.singularValues().size(); ++s)
            if (svd.singularValues()(s) > tol) ++rank;
        enc.N_F = svd.matrixV().rightCols(nu - rank);
        // pseudo-inverse from the same factorization
        Mat sig_inv = Mat::Zero(nu, enc.F.rows());
        for (Eigen::Index s = 0; s < rank; ++s)
            sig_inv(s, s) = 1.0 / svd.singularValues()(s);
        enc.F_pinv = svd.matrixV() * sig_inv * svd.matrixU().transpose();
    }
    // orientation: first nonzero entry of each nullspace column positive
    for (Eigen::Index c = 0; c < enc.N_F.cols(); ++c) {
        for (Eigen::Index r = 0; r < enc.N_F.rows(); ++r) {
            if (std::abs(enc.N_F(r, c)) > 1e-12) {
                if (enc.N_F(r, c) < 0) enc.N_F.col(c) = -enc.N_F.col(c);
                break;
            }
        }
    }
    enc.n_r = static_cast<int>(enc.N_F.cols());
    return enc;
}

std::vector<ColumnEncoding> encode_all_stages(const ColumnSparsity& col,
                                              const NetworkSystem& sys) {
    const int tail = static_cast<int>(col.s_x.size()) - 1;
    std::vector<ColumnEncoding> encs;
    encs.reserve(static_cast<std::size_t>(tail));
    for (int k = 1; k <= tail; ++k) encs.push_back(encode_column(col, sys, k));
    return encs;
}

FeasibilityReport check_column_feasibility(const std::vector<ColumnEncoding>& encodings,
                                           const NetworkSystem& sys, int /*i*/, double tol) {
    FeasibilityReport report;
    for (std::size_t k = 0; k < encodings.size(); ++k) {
        const ColumnEncoding& enc = encodings[k];
        if (enc.M_x_next.rows() == 0) continue;
        for (int c = 0; c < sys.n(); ++c) {
            if (!enc.s_x_cur(c)) continue;
            Vec lead = enc.M_x_next * sys.A.col(c);
            double resid;
            if (enc.F.cols() == 0) {
                resid = lead.cwiseAbs().maxCoeff();
            } else {
                Vec q = enc.F_pinv * (-lead);
                resid = (enc.F * q + lead).cwiseAbs().maxCoeff();
            }
            report.worst_residual = std::max(report.worst_residual, resid);
            if (resid > tol && report.feasible) {
                report.feasible = false;
                report.first_infeasible_k = static_cast<int>(k) + 1;
            }
        }
    }
    return report;
}

}  // namespace sls
