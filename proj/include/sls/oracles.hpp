#pragma once

#include <functional>
#include <optional>

#include "sls/system_model.hpp"

namespace sls {

// Classical unstructured LQG reference, solved by two Riccati fixed points.
struct CentralizedLqgSolution {
    Mat P_lqr;   // regulator cost-to-go
    Mat K_lqr;   // u = -K x
    Mat P_kf;    // one-step-ahead prediction error covariance
    Mat L_kf;    // predictor gain A P C^T S^-1
    double lqg_cost = 0.0;  // steady-state cost of the strictly proper controller
};

CentralizedLqgSolution solve_centralized_lqg(const NetworkSystem& sys, double tol = 1e-11,
                                             int max_iter = 200000);

// Standard (no cross term) DARE fixed point: X = Q + A^T X A - A^T X B (R + B^T X B)^-1 B^T X A.
std::pair<Mat, Mat> dare_fixed_point(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                                     double tol = 1e-11, int max_iter = 200000);

struct FirQpSolution {
    int horizon = 0;
    std::vector<Vec> phi_x;  // phi_x[1..H] (index 0 unused)
    std::vector<Vec> phi_u;
    double cost = 0.0;
    double kkt_residual = 0.0;
};

// Finite-impulse-response restriction of one column problem, solved exactly as
// an equality-constrained QP via a KKT solve over the unmasked entries.
// Supports are the raw schedule columns (no tightening): feasibility is
// enforced by the dynamics rows, so this is an independent route to the same
// constraint set. Returns nullopt when the terminal condition is infeasible.
std::optional<FirQpSolution> solve_fir_column_qp(const NetworkSystem& sys,
                                                 const std::vector<IntVec>& s_x,
                                                 const std::vector<IntVec>& s_u, int i, int H);

// Sum of column QP costs for the d-delayed schedule at horizon H.
std::optional<double> fir_sf_cost(const NetworkSystem& sys, int d, int H);

struct MonteCarloResult {
    double mean = 0.0;
    double std_error = 0.0;
    int trials = 0;
};

// Average running cost (1/T) sum x'Qx + u'Ru of a closed loop driven by seeded
// Gaussian noise. The controller is an arbitrary step function y -> u invoked
// once per timestep; it must keep internal state itself. Aborts with
// InstabilityError if the state norm exceeds the divergence guard.
using ControllerStep = std::function<Vec(int t, const Vec& y)>;
using ControllerFactory = std::function<ControllerStep()>;

MonteCarloResult simulate_lqg_cost(const ControllerFactory& make_controller,
                                   const NetworkSystem& sys, int t_sim, std::uint64_t seed,
                                   int n_trials, double divergence_guard = 1e9,
                                   double noise_scale = 1.0);

}  // namespace sls
