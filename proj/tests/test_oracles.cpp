#include <memory>

#include "doctest.h"
#include "sls/kernels.hpp"
#include "sls/oracles.hpp"
#include "sls/slc.hpp"

using namespace sls;

namespace {

NetworkSystem scalar_system(double a, double b, double q, double r) {
    NetworkSystem sys;
    sys.n_nodes = 1;
    sys.A = Mat::Constant(1, 1, a);
    sys.B = Mat::Constant(1, 1, b);
    sys.C = Mat::Identity(1, 1);
    sys.W = sys.V = Mat::Identity(1, 1);
    sys.Q = Mat::Constant(1, 1, q);
    sys.R = Mat::Constant(1, 1, r);
    sys.node_of_state = sys.node_of_input = sys.node_of_output = {0};
    return sys;
}

std::vector<IntVec> ones_supports(int dim, int H) {
    return std::vector<IntVec>(static_cast<std::size_t>(H) + 2, IntVec::Ones(dim));
}

}  // namespace

TEST_CASE("scalar regulator Riccati value") {
    NetworkSystem sys = scalar_system(0.5, 1.0, 1.0, 1.0);
    CentralizedLqgSolution sol = solve_centralized_lqg(sys);
    CHECK(sol.P_lqr(0, 0) == doctest::Approx(1.1327822185).epsilon(1e-8));
}

TEST_CASE("zero dynamics regulator") {
    NetworkSystem sys = scalar_system(0.0, 1.0, 2.5, 1.0);
    CentralizedLqgSolution sol = solve_centralized_lqg(sys);
    CHECK(sol.P_lqr(0, 0) == doctest::Approx(2.5));
    CHECK(max_abs(sol.K_lqr) < 1e-12);
}

TEST_CASE("closed-loop spectral radii are stable") {
    NetworkSystem sys = build_chain_network(5, 0.6, 1.0, 1.0, 300.0);
    CentralizedLqgSolution sol = solve_centralized_lqg(sys);
    CHECK(spectral_radius(sys.A - sys.B * sol.K_lqr) < 1.0);
    CHECK(spectral_radius(sys.A - sol.L_kf * sys.C) < 1.0);
    CHECK(min_symmetric_eigenvalue(sol.P_lqr) > 0.0);
    CHECK(min_symmetric_eigenvalue(sol.P_kf) > 0.0);
}

TEST_CASE("Riccati iterates grow monotonically from Q") {
    NetworkSystem sys = build_chain_network(3, 0.6, 1.0, 1.0, 300.0);
    Mat x = sys.Q;
    for (int it = 0; it < 50; ++it) {
        Mat h = sys.R + sys.B.transpose() * x * sys.B;
        Mat gain = h.ldlt().solve(sys.B.transpose() * x * sys.A);
        Mat x_next = symmetrize(sys.Q + sys.A.transpose() * x * (sys.A - sys.B * gain));
        CHECK(min_symmetric_eigenvalue(x_next - x) > -1e-10);
        x = x_next;
    }
}

TEST_CASE("steady-state cost formula agrees with a long simulation") {
    NetworkSystem sys = build_chain_network(3, 0.6, 1.0, 1.0, 300.0);
    CentralizedLqgSolution sol = solve_centralized_lqg(sys);
    // classical observer-based controller with the predicted estimate
    auto factory = [&]() -> ControllerStep {
        auto xhat = std::make_shared<Vec>(Vec::Zero(3));
        return [&sys, &sol, xhat](int, const Vec& y) {
            Vec u = -sol.K_lqr * (*xhat);
            *xhat = sys.A * (*xhat) + sys.B * u + sol.L_kf * (y - sys.C * (*xhat));
            return u;
        };
    };
    MonteCarloResult mc = simulate_lqg_cost(factory, sys, 4000, 42, 16);
    CHECK(std::abs(mc.mean - sol.lqg_cost) < 3.0 * mc.std_error);
}

TEST_CASE("monte carlo runs are quiet without noise") {
    NetworkSystem sys = build_chain_network(3, 0.6, 1.0, 1.0, 300.0);
    auto zero_controller = []() -> ControllerStep {
        return [](int, const Vec& y) { return Vec::Zero(y.size()); };
    };
    MonteCarloResult mc = simulate_lqg_cost(zero_controller, sys, 100, 1, 2, 1e9, 0.0);
    CHECK(mc.mean == 0.0);
}

TEST_CASE("divergence is detected") {
    NetworkSystem sys = build_chain_network(3, 0.6, 1.3, 1.0, 300.0);  // unstable, rho = 1.3
    auto zero_controller = []() -> ControllerStep {
        return [](int, const Vec& y) { return Vec::Zero(y.size()); };
    };
    CHECK_THROWS_AS(simulate_lqg_cost(zero_controller, sys, 5000, 1, 1, 1e6),
                    InstabilityError);
}

TEST_CASE("single-step FIR restriction is the deadbeat solution") {
    NetworkSystem sys = scalar_system(0.5, 2.0, 1.0, 3.0);
    auto sol = solve_fir_column_qp(sys, ones_supports(1, 1), ones_supports(1, 1), 0, 1);
    REQUIRE(sol.has_value());
    CHECK(sol->phi_u[1](0) == doctest::Approx(-0.25));  // -a/b
    CHECK(sol->cost == doctest::Approx(1.0 + 3.0 * 0.0625));  // q + r a^2/b^2
    CHECK(sol->kkt_residual < 1e-9);
}

TEST_CASE("FIR cost approaches the infinite-horizon optimum from above") {
    NetworkSystem sys = build_chain_network(3, 0.6, 1.0, 1.0, 300.0);
    SparsitySchedule sched = build_delayed_localization(build_graph(sys), sys, 1);
    StructuredSolution inf = synthesize_state_feedback(sys, sched, 300);
    double prev = std::numeric_limits<double>::infinity();
    for (int h : {5, 10, 20, 40}) {
        auto c = fir_sf_cost(sys, 1, h);
        REQUIRE(c.has_value());
        CHECK(*c >= inf.cost - 1e-9);
        CHECK(*c <= prev + 1e-9);
        prev = *c;
    }
    CHECK(prev <= 1.01 * inf.cost);
}

TEST_CASE("FIR solutions satisfy all the equality constraints") {
    NetworkSystem sys = build_chain_network(4, 0.6, 1.0, 1.0, 300.0);
    InterconnectionGraph g = build_graph(sys);
    SparsitySchedule sched = build_delayed_localization(g, sys, 2);
    for (int i = 0; i < 4; ++i) {
        std::vector<IntVec> sx(22), su(22);
        for (int k = 1; k <= 21; ++k) {
            sx[static_cast<std::size_t>(k)] = sched.sx(k).col(i);
            su[static_cast<std::size_t>(k)] = sched.su(k).col(i);
        }
        auto sol = solve_fir_column_qp(sys, sx, su, i, 20);
        REQUIRE(sol.has_value());
        CHECK(sol->kkt_residual < 1e-9);
        // dynamics replay, including the terminal condition
        Vec prev = sol->phi_x[1];
        for (int k = 1; k <= 20; ++k) {
            Vec next = sys.A * sol->phi_x[static_cast<std::size_t>(k)] +
                       sys.B * sol->phi_u[static_cast<std::size_t>(k)];
            if (k < 20)
                CHECK(max_abs(next - sol->phi_x[static_cast<std::size_t>(k + 1)]) < 1e-9);
            else
                CHECK(max_abs(next) < 1e-9);
        }
    }
}

TEST_CASE("infeasible terminal condition is reported, not thrown") {
    // single integrator with no actuation cannot reach zero
    NetworkSystem sys = scalar_system(1.0, 1.0, 1.0, 1.0);
    auto su = ones_supports(1, 3);
    for (auto& s : su) s.setZero();  // no admissible inputs at all
    auto sol = solve_fir_column_qp(sys, ones_supports(1, 3), su, 0, 3);
    CHECK(!sol.has_value());
}
