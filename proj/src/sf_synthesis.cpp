#include "sls/sf_synthesis.hpp"

#include <future>
#include <string>

namespace sls {

namespace {

Mat support_projector(const IntVec& s) {
    Vec diag = s.cast<double>();
    return diag.asDiagonal();
}

TransformedColumnData::Stage make_stage(const NetworkSystem& sys, const ColumnEncoding& enc) {
    TransformedColumnData::Stage st;
    const Mat P_cur = support_projector(enc.s_x_cur);
    const Mat P_next = support_projector(enc.s_x_next);
    // particular solution q = -F^+ M_x A phi; kappa reconstructs the forced input
    st.kappa = (enc.M_u * enc.F_pinv * enc.M_x_next * sys.A) * P_cur;
    st.Q_t = P_cur * (sys.Q + st.kappa.transpose() * sys.R * st.kappa) * P_cur;
    st.Z_t = (-enc.N_F.transpose() * enc.M_u.transpose() * sys.R * st.kappa) * P_cur;
    st.M_u_N = enc.M_u * enc.N_F;
    st.R_t = st.M_u_N.transpose() * sys.R * st.M_u_N;
    st.A_t = P_next * (sys.A - sys.B * st.kappa) * P_cur;
    st.B_t = P_next * sys.B * st.M_u_N;
    st.n_r = enc.n_r;
    return st;
}

// One backward step of the cross-weighted Riccati map; returns (X_prev, gain).
std::pair<Mat, Mat> riccati_step(const Mat& x_next, const TransformedColumnData::Stage& st) {
    if (st.n_r == 0) {
        Mat x = symmetrize(st.Q_t + st.A_t.transpose() * x_next * st.A_t);
        return {x, Mat::Zero(0, st.A_t.rows())};
    }
    Mat h = st.R_t + st.B_t.transpose() * x_next * st.B_t;
    Mat g = st.B_t.transpose() * x_next * st.A_t + st.Z_t;
    Eigen::LDLT<Mat> ldlt(symmetrize(h));
    if (ldlt.info() != Eigen::Success)
        throw NumericError("riccati step: R~ + B~'XB~ is not positive definite");
    Mat gain = ldlt.solve(g);
    Mat x = symmetrize(st.Q_t + st.A_t.transpose() * x_next * st.A_t - g.transpose() * gain);
    return {x, gain};
}

}  // namespace

TransformedColumnData transform_column(const NetworkSystem& sys,
                                       const std::vector<ColumnEncoding>& encodings, int i) {
    FeasibilityReport rep = check_column_feasibility(encodings, sys, i);
    if (!rep.feasible)
        throw SynthesisError("column " + std::to_string(i) + " infeasible at k = " +
                             std::to_string(rep.first_infeasible_k) + " (residual " +
                             std::to_string(rep.worst_residual) + ")");
    TransformedColumnData data;
    data.i = i;
    const int d = static_cast<int>(encodings.size()) - 1;
    data.stage.reserve(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) data.stage.push_back(make_stage(sys, encodings[static_cast<std::size_t>(k)]));
    data.tail = make_stage(sys, encodings.back());
    return data;
}

std::pair<Mat, Mat> solve_tail_dare(const TransformedColumnData::Stage& tail, double tol,
                                    int max_iter) {
    Mat x = tail.Q_t;
    for (int it = 0; it < max_iter; ++it) {
        auto [x_next, gain] = riccati_step(x, tail);
        if (max_abs(x_next - x) < tol) return {x_next, gain};
        x = std::move(x_next);
    }
    throw NumericError("tail Riccati fixed point did not converge");
}

RiccatiSolution riccati_backward(const TransformedColumnData& data, const Mat& x_tail,
                                 const Mat& k_tail) {
    RiccatiSolution sol;
    sol.X_tail = x_tail;
    sol.K_tilde_tail = k_tail;
    sol.K_full_tail = -data.tail.kappa - data.tail.M_u_N * k_tail;
    const int d = static_cast<int>(data.stage.size());
    sol.X.resize(static_cast<std::size_t>(d));
    sol.K_tilde.resize(static_cast<std::size_t>(d));
    sol.K_full.resize(static_cast<std::size_t>(d));
    Mat x_next = x_tail;
    for (int k = d; k >= 1; --k) {
        const auto& st = data.stage[static_cast<std::size_t>(k - 1)];
        auto [x, gain] = riccati_step(x_next, st);
        sol.X[static_cast<std::size_t>(k - 1)] = x;
        sol.K_tilde[static_cast<std::size_t>(k - 1)] = gain;
        sol.K_full[static_cast<std::size_t>(k - 1)] = -st.kappa - st.M_u_N * gain;
        x_next = std::move(x);
    }
    return sol;
}

ColumnRealization assemble_realization(const RiccatiSolution& sol,
                                       const TransformedColumnData& data, int i, int d) {
    const int n = static_cast<int>(data.tail.A_t.rows());
    const int m = static_cast<int>(sol.K_full_tail.rows());
    const int nb = d + 1;
    ColumnRealization real;
    real.i = i;
    real.d = d;
    real.A_blk = Mat::Zero(nb * n, nb * n);
    for (int k = 1; k <= d; ++k) {
        const auto& st = data.stage[static_cast<std::size_t>(k - 1)];
        Mat acl = st.A_t - st.B_t * sol.K_tilde[static_cast<std::size_t>(k - 1)];
        real.A_blk.block(k * n, (k - 1) * n, n, n) = acl;
    }
    real.A_blk.block(d * n, d * n, n, n) = data.tail.A_t - data.tail.B_t * sol.K_tilde_tail;
    real.B_blk = Vec::Zero(nb * n);
    real.B_blk(i) = 1.0;
    real.C_blk = Mat::Zero(n, nb * n);
    real.K_blk = Mat::Zero(m, nb * n);
    for (int k = 0; k < nb; ++k) {
        real.C_blk.block(0, k * n, n, n) = Mat::Identity(n, n);
        real.K_blk.block(0, k * n, m, n) =
            (k < d) ? sol.K_full[static_cast<std::size_t>(k)] : sol.K_full_tail;
    }
    real.spectral_radius = spectral_radius(real.A_blk);
    if (real.spectral_radius >= 1.0)
        throw InstabilityError("column " + std::to_string(i) + " realization has spectral radius " +
                               std::to_string(real.spectral_radius));
    return real;
}

namespace {

ColumnRealization synthesize_one_column(const NetworkSystem& sys,
                                        const SparsitySchedule& schedule, int i) {
    ColumnSparsity col = column_sparsity(schedule, i);
    tighten_column_sparsity(sys, col);
    std::vector<ColumnEncoding> encs = encode_all_stages(col, sys);
    TransformedColumnData data = transform_column(sys, encs, i);
    auto [x_tail, k_tail] = solve_tail_dare(data.tail);
    RiccatiSolution sol = riccati_backward(data, x_tail, k_tail);
    return assemble_realization(sol, data, i, schedule.d);
}

void accumulate_kernels(const std::vector<ColumnRealization>& cols, int t_eval, int n, int m,
                        std::vector<Mat>& phi_x, std::vector<Mat>& phi_u) {
    phi_x.assign(static_cast<std::size_t>(t_eval) + 1, Mat::Zero(n, n));
    phi_u.assign(static_cast<std::size_t>(t_eval) + 1, Mat::Zero(m, n));
    for (const auto& col : cols) {
        Vec state = col.B_blk;
        for (int k = 1; k <= t_eval; ++k) {
            phi_x[static_cast<std::size_t>(k)].col(col.i) = col.C_blk * state;
            phi_u[static_cast<std::size_t>(k)].col(col.i) = col.K_blk * state;
            state = col.A_blk * state;
        }
    }
}

}  // namespace

StructuredSolution synthesize_state_feedback(const NetworkSystem& sys,
                                             const SparsitySchedule& schedule, int t_eval) {
    sys.validate();
    if (t_eval < 1) throw InvalidConfigError("t_eval must be >= 1");
    const int n = sys.n(), m = sys.m();

    StructuredSolution out;
    out.t_eval = t_eval;
    out.columns.resize(static_cast<std::size_t>(n));
    std::vector<std::future<ColumnRealization>> jobs;
    jobs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        jobs.push_back(std::async(std::launch::async,
                                  [&sys, &schedule, i] { return synthesize_one_column(sys, schedule, i); }));
    for (int i = 0; i < n; ++i) out.columns[static_cast<std::size_t>(i)] = jobs[static_cast<std::size_t>(i)].get();

    accumulate_kernels(out.columns, t_eval, n, m, out.Phi_x, out.Phi_u);

    const Mat qh = symmetric_sqrt(sys.Q);
    const Mat rh = symmetric_sqrt(sys.R);
    const Mat wh = symmetric_sqrt(sys.W);
    double cost = 0.0;
    for (int k = 1; k <= t_eval; ++k) {
        cost += (qh * out.Phi_x[static_cast<std::size_t>(k)] * wh).squaredNorm();
        cost += (rh * out.Phi_u[static_cast<std::size_t>(k)] * wh).squaredNorm();
    }
    out.cost = cost;

    double rho_max = 0.0, c_norm = 0.0;
    for (const auto& col : out.columns) {
        rho_max = std::max(rho_max, col.spectral_radius);
        c_norm = std::max(c_norm, col.C_blk.norm());
    }
    out.tail_bound = rho_max < 1.0
                         ? c_norm * std::pow(rho_max, t_eval) / (1.0 - rho_max)
                         : std::numeric_limits<double>::infinity();
    return out;
}

NetworkSystem dual_system(const NetworkSystem& sys) {
    NetworkSystem dual;
    dual.n_nodes = sys.n_nodes;
    dual.A = sys.A.transpose();
    dual.B = sys.C.transpose();
    dual.C = sys.B.transpose();
    dual.Q = sys.W;
    dual.R = sys.V;
    dual.W = Mat::Identity(sys.n(), sys.n());
    dual.V = Mat::Identity(sys.m(), sys.m());
    dual.node_of_state = sys.node_of_state;
    dual.node_of_input = sys.node_of_output;
    dual.node_of_output = sys.node_of_input;
    return dual;
}

SparsitySchedule transpose_schedule(const SparsitySchedule& schedule) {
    SparsitySchedule t;
    t.d = schedule.d;
    t.S_x.reserve(schedule.S_x.size());
    t.S_u.reserve(schedule.S_u.size());
    for (const auto& sx : schedule.S_x) t.S_x.push_back(sx.transpose());
    for (const auto& su : schedule.S_u) t.S_u.push_back(su.transpose());
    return t;
}

StructuredSolution synthesize_kalman_filter(const NetworkSystem& sys,
                                            const SparsitySchedule& schedule, int t_eval) {
    // Kernel-wise transposition of the schedule only lines up dimensionally
    // for square patterns (the measured-everything case).
    if (sys.p() != sys.n() || sys.m() != sys.n())
        throw InvalidConfigError(
            "estimation synthesis expects square sparsity patterns (p = m = n)");
    NetworkSystem dual = dual_system(sys);
    StructuredSolution sol = synthesize_state_feedback(dual, transpose_schedule(schedule), t_eval);
    // transpose kernels back: Phi_ew[k] = (dual Phi_xw[k])^T, Phi_ev[k] = (dual Phi_uw[k])^T
    for (auto& mk : sol.Phi_x) mk = mk.transpose().eval();
    for (auto& mk : sol.Phi_u) mk = mk.transpose().eval();
    return sol;
}

}  // namespace sls
