#include "sls/oracles.hpp"

#include <Eigen/LU>

#include <map>
#include <tuple>

#include "sls/rng.hpp"
#include "sls/slc.hpp"

namespace sls {

std::pair<Mat, Mat> dare_fixed_point(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                                     double tol, int max_iter) {
    Mat x = Q;
    for (int it = 0; it < max_iter; ++it) {
        Mat h = R + B.transpose() * x * B;
        Eigen::LDLT<Mat> ldlt(symmetrize(h));
        if (ldlt.info() != Eigen::Success)
            throw NumericError("dare: R + B'XB not positive definite");
        Mat gain = ldlt.solve(B.transpose() * x * A);
        Mat x_next = symmetrize(Q + A.transpose() * x * (A - B * gain));
        if (max_abs(x_next - x) < tol) return {x_next, gain};
        x = std::move(x_next);
    }
    throw NumericError("dare fixed point did not converge (not stabilizable/detectable?)");
}

CentralizedLqgSolution solve_centralized_lqg(const NetworkSystem& sys, double tol, int max_iter) {
    CentralizedLqgSolution sol;
    std::tie(sol.P_lqr, sol.K_lqr) = dare_fixed_point(sys.A, sys.B, sys.Q, sys.R, tol, max_iter);
    auto [p_kf, l_t] = dare_fixed_point(sys.A.transpose(), sys.C.transpose(), sys.W, sys.V, tol, max_iter);
    sol.P_kf = p_kf;
    sol.L_kf = l_t.transpose();  // A P C' (C P C' + V)^-1
    // Steady-state cost of the strictly proper (one-step-delayed) optimal
    // controller u(t) = -K xhat(t | t-1):
    //   J = tr(Q P_kf) + tr(P_lqr L S L') with S the innovation covariance.
    // (Validated against Monte Carlo; see tests.)
    Mat s = sys.C * sol.P_kf * sys.C.transpose() + sys.V;
    sol.lqg_cost = (sys.Q * sol.P_kf).trace() +
                   (sol.P_lqr * sol.L_kf * s * sol.L_kf.transpose()).trace();
    return sol;
}

std::optional<FirQpSolution> solve_fir_column_qp(const NetworkSystem& sys,
                                                 const std::vector<IntVec>& s_x,
                                                 const std::vector<IntVec>& s_u, int i, int H) {
    const int n = sys.n(), m = sys.m();
    if (H < 1 || static_cast<int>(s_x.size()) < H + 1 || static_cast<int>(s_u.size()) < H + 1)
        throw InvalidConfigError("fir qp: supports must cover 1..H");
    if (!s_x[1](i)) return std::nullopt;  // seed inadmissible

    // variable layout: free entries of phi_x[2..H] then phi_u[1..H]
    std::map<std::pair<int, int>, int> x_index, u_index;
    int nv = 0;
    for (int k = 2; k <= H; ++k)
        for (int c = 0; c < n; ++c)
            if (s_x[static_cast<std::size_t>(k)](c)) x_index[{k, c}] = nv++;
    for (int k = 1; k <= H; ++k)
        for (int c = 0; c < m; ++c)
            if (s_u[static_cast<std::size_t>(k)](c)) u_index[{k, c}] = nv++;

    Mat hess = Mat::Zero(nv, nv);
    for (int k = 2; k <= H; ++k)
        for (int a = 0; a < n; ++a) {
            auto ia = x_index.find({k, a});
            if (ia == x_index.end()) continue;
            for (int b = 0; b < n; ++b) {
                auto ib = x_index.find({k, b});
                if (ib != x_index.end()) hess(ia->second, ib->second) += sys.Q(a, b);
            }
        }
    for (int k = 1; k <= H; ++k)
        for (int a = 0; a < m; ++a) {
            auto ia = u_index.find({k, a});
            if (ia == u_index.end()) continue;
            for (int b = 0; b < m; ++b) {
                auto ib = u_index.find({k, b});
                if (ib != u_index.end()) hess(ia->second, ib->second) += sys.R(a, b);
            }
        }

    // dynamics rows: phi_x[k+1] - A phi_x[k] - B phi_u[k] = 0 for k = 1..H,
    // with phi_x[1] = e_i fixed and phi_x[H+1] = 0 (terminal condition)
    struct Entry {
        int row, col;
        double value;
    };
    std::vector<Entry> trip;
    std::vector<double> rhs_rows;
    int nr = 0;
    auto add_entry = [&](int row, int var, double v) { trip.push_back({row, var, v}); };
    for (int k = 1; k <= H; ++k) {
        for (int c = 0; c < n; ++c) {
            double rhs = 0.0;
            bool any = false;
            if (k + 1 <= H) {
                auto it = x_index.find({k + 1, c});
                if (it != x_index.end()) {
                    add_entry(nr, it->second, 1.0);
                    any = true;
                }
            }
            if (k == 1) {
                rhs += sys.A(c, i);  // A phi_x[1] with phi_x[1] = e_i
            } else {
                for (int cc = 0; cc < n; ++cc) {
                    auto it = x_index.find({k, cc});
                    if (it != x_index.end() && sys.A(c, cc) != 0.0) {
                        add_entry(nr, it->second, -sys.A(c, cc));
                        any = true;
                    }
                }
            }
            for (int cc = 0; cc < m; ++cc) {
                auto it = u_index.find({k, cc});
                if (it != u_index.end() && sys.B(c, cc) != 0.0) {
                    add_entry(nr, it->second, -sys.B(c, cc));
                    any = true;
                }
            }
            if (!any) {
                if (std::abs(rhs) > 1e-12) return std::nullopt;  // 0 = nonzero: infeasible
                continue;
            }
            rhs_rows.push_back(rhs);  // row . z = A(c, i) from the fixed seed
            ++nr;
        }
    }

    Mat aeq = Mat::Zero(nr, nv);
    for (const auto& t : trip) aeq(t.row, t.col) = t.value;
    Vec beq = Eigen::Map<Vec>(rhs_rows.data(), nr);

    // KKT system; rank-deficient rows are possible, so solve in least squares
    // and reject if the equalities are not met.
    Mat kkt = Mat::Zero(nv + nr, nv + nr);
    kkt.topLeftCorner(nv, nv) = 2.0 * hess;
    kkt.topRightCorner(nv, nr) = aeq.transpose();
    kkt.bottomLeftCorner(nr, nv) = aeq;
    Vec rhs = Vec::Zero(nv + nr);
    rhs.tail(nr) = beq;
    Vec sol_full = kkt.completeOrthogonalDecomposition().solve(rhs);
    Vec z = sol_full.head(nv);

    double kkt_resid = nr ? (aeq * z - beq).cwiseAbs().maxCoeff() : 0.0;
    if (kkt_resid > 1e-7) return std::nullopt;

    FirQpSolution out;
    out.horizon = H;
    out.kkt_residual = kkt_resid;
    out.phi_x.assign(static_cast<std::size_t>(H) + 1, Vec::Zero(n));
    out.phi_u.assign(static_cast<std::size_t>(H) + 1, Vec::Zero(m));
    out.phi_x[1] = Vec::Zero(n);
    out.phi_x[1](i) = 1.0;
    for (const auto& [key, var] : x_index) out.phi_x[static_cast<std::size_t>(key.first)](key.second) = z(var);
    for (const auto& [key, var] : u_index) out.phi_u[static_cast<std::size_t>(key.first)](key.second) = z(var);
    out.cost = z.dot(hess * z) + sys.Q(i, i);
    return out;
}

std::optional<double> fir_sf_cost(const NetworkSystem& sys, int d, int H) {
    InterconnectionGraph graph = build_graph(sys);
    SparsitySchedule sched = build_delayed_localization(graph, sys, d);
    double total = 0.0;
    for (int i = 0; i < sys.n(); ++i) {
        std::vector<IntVec> s_x(static_cast<std::size_t>(H) + 2);
        std::vector<IntVec> s_u(static_cast<std::size_t>(H) + 2);
        for (int k = 1; k <= H + 1; ++k) {
            s_x[static_cast<std::size_t>(k)] = sched.sx(k).col(i);
            s_u[static_cast<std::size_t>(k)] = sched.su(k).col(i);
        }
        auto sol = solve_fir_column_qp(sys, s_x, s_u, i, H);
        if (!sol) return std::nullopt;
        total += sol->cost;
    }
    return total;
}

MonteCarloResult simulate_lqg_cost(const ControllerFactory& make_controller,
                                   const NetworkSystem& sys, int t_sim, std::uint64_t seed,
                                   int n_trials, double divergence_guard, double noise_scale) {
    const Mat wh = noise_scale * symmetric_sqrt(sys.W);
    const Mat vh = noise_scale * symmetric_sqrt(sys.V);
    std::vector<double> costs;
    costs.reserve(static_cast<std::size_t>(n_trials));
    for (int trial = 0; trial < n_trials; ++trial) {
        SplitMix64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1));
        ControllerStep step = make_controller();
        Vec x = Vec::Zero(sys.n());
        double acc = 0.0;
        for (int t = 0; t < t_sim; ++t) {
            Vec gv(sys.p());
            for (Eigen::Index r = 0; r < gv.size(); ++r) gv(r) = rng.next_normal();
            Vec y = sys.C * x + vh * gv;
            Vec u = step(t, y);
            acc += x.dot(sys.Q * x) + u.dot(sys.R * u);
            Vec gw(sys.n());
            for (Eigen::Index r = 0; r < gw.size(); ++r) gw(r) = rng.next_normal();
            x = sys.A * x + sys.B * u + wh * gw;
            if (x.norm() > divergence_guard)
                throw InstabilityError("monte carlo trial diverged at t = " + std::to_string(t));
        }
        costs.push_back(acc / t_sim);
    }
    MonteCarloResult res;
    res.trials = n_trials;
    double mean = 0.0;
    for (double c : costs) mean += c;
    mean /= n_trials;
    double var = 0.0;
    for (double c : costs) var += (c - mean) * (c - mean);
    var = n_trials > 1 ? var / (n_trials - 1) : 0.0;
    res.mean = mean;
    res.std_error = n_trials > 1 ? std::sqrt(var / n_trials) : 0.0;
    return res;
}

}  // namespace sls
