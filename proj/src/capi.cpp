#include "sls_capi.h"

#include <cstdio>
#include <cstring>
#include <string>

#include "sls/kernels.hpp"
#include "sls/oracles.hpp"
#include "sls/simulator.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
sls_status guarded(Fn&& fn) {
    try {
        fn();
        return SLS_OK;
    } catch (const sls::InvalidConfigError& e) {
        set_error(e.what());
        return SLS_ERR_INVALID_ARG;
    } catch (const sls::ParseError& e) {
        set_error(e.what());
        return SLS_ERR_PARSE;
    } catch (const sls::IoError& e) {
        set_error(e.what());
        return SLS_ERR_IO;
    } catch (const sls::SynthesisError& e) {
        set_error(e.what());
        return SLS_ERR_INFEASIBLE;
    } catch (const sls::NumericError& e) {
        set_error(e.what());
        return SLS_ERR_NUMERIC;
    } catch (const sls::ProtocolError& e) {
        set_error(e.what());
        return SLS_ERR_PROTOCOL;
    } catch (const sls::InstabilityError& e) {
        set_error(e.what());
        return SLS_ERR_INSTABILITY;
    } catch (const std::exception& e) {
        set_error(e.what());
        return SLS_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return SLS_ERR_INTERNAL;
    }
}

sls_status bad_arg(const char* msg) {
    set_error(msg);
    return SLS_ERR_INVALID_ARG;
}

}  // namespace

struct sls_config {
    sls::ExperimentConfig cfg;
};

struct sls_system {
    sls::NetworkSystem sys;
    sls::InterconnectionGraph graph;
};

struct sls_solution {
    sls::StructuredSolution sol;
    int d = 0;
    bool is_estimator = false;
};

struct sls_clm {
    sls::ClosedLoopMaps clm;
};

struct sls_trajectory {
    sls::TrajectoryRecord rec;
};

extern "C" {

const char* sls_version(void) { return "0.1.0"; }

const char* sls_last_error(void) { return g_last_error.c_str(); }

/* ---- configuration ------------------------------------------------- */

sls_status sls_config_default(sls_config** out) {
    if (!out) return bad_arg("null out");
    return guarded([&] { *out = new sls_config{sls::ExperimentConfig{}}; });
}

sls_status sls_config_load(const char* path, sls_config** out) {
    if (!path || !out) return bad_arg("null argument");
    return guarded([&] { *out = new sls_config{sls::load_config(path)}; });
}

namespace {

sls_status config_access(sls_config* cfg, const char* key, long long* iget, double* rget,
                         const long long* iset, const double* rset) {
    auto& c = cfg->cfg;
    auto handle_int = [&](int& field) -> sls_status {
        if (iget) *iget = field;
        else if (iset) field = static_cast<int>(*iset);
        else return bad_arg("type mismatch for key");
        return SLS_OK;
    };
    std::string k = key;
    if (k == "n_nodes") return handle_int(c.n_nodes);
    if (k == "d") return handle_int(c.d);
    if (k == "t_sim") return handle_int(c.t_sim);
    if (k == "t_eval") return handle_int(c.t_eval);
    if (k == "fir_horizon") return handle_int(c.fir_horizon);
    if (k == "seed") {
        if (iget) *iget = static_cast<long long>(c.seed);
        else if (iset) c.seed = static_cast<std::uint64_t>(*iset);
        else return bad_arg("type mismatch for key");
        return SLS_OK;
    }
    auto handle_real = [&](double& field) -> sls_status {
        if (rget) *rget = field;
        else if (rset) field = *rset;
        else return bad_arg("type mismatch for key");
        return SLS_OK;
    };
    if (k == "alpha") return handle_real(c.alpha);
    if (k == "rho") return handle_real(c.rho);
    if (k == "q_scale") return handle_real(c.q_scale);
    if (k == "r_scale") return handle_real(c.r_scale);
    return bad_arg("unknown config key");
}

}  // namespace

sls_status sls_config_get_int(const sls_config* cfg, const char* key, long long* out) {
    if (!cfg || !key || !out) return bad_arg("null argument");
    return config_access(const_cast<sls_config*>(cfg), key, out, nullptr, nullptr, nullptr);
}

sls_status sls_config_get_real(const sls_config* cfg, const char* key, double* out) {
    if (!cfg || !key || !out) return bad_arg("null argument");
    return config_access(const_cast<sls_config*>(cfg), key, nullptr, out, nullptr, nullptr);
}

sls_status sls_config_set_int(sls_config* cfg, const char* key, long long value) {
    if (!cfg || !key) return bad_arg("null argument");
    return config_access(cfg, key, nullptr, nullptr, &value, nullptr);
}

sls_status sls_config_set_real(sls_config* cfg, const char* key, double value) {
    if (!cfg || !key) return bad_arg("null argument");
    return config_access(cfg, key, nullptr, nullptr, nullptr, &value);
}

sls_status sls_config_hash(const sls_config* cfg, uint64_t* out) {
    if (!cfg || !out) return bad_arg("null argument");
    return guarded([&] { *out = sls::config_hash(cfg->cfg); });
}

void sls_config_free(sls_config* cfg) { delete cfg; }

/* ---- plant ---------------------------------------------------------- */

sls_status sls_system_chain(int n_nodes, double alpha, double rho, double q_scale,
                            double r_scale, sls_system** out) {
    if (!out) return bad_arg("null out");
    return guarded([&] {
        auto sys = sls::build_chain_network(n_nodes, alpha, rho, q_scale, r_scale);
        auto graph = sls::build_graph(sys);
        *out = new sls_system{std::move(sys), std::move(graph)};
    });
}

sls_status sls_system_from_config(const sls_config* cfg, sls_system** out) {
    if (!cfg || !out) return bad_arg("null argument");
    return guarded([&] {
        auto sys = sls::build_system(cfg->cfg);
        auto graph = sls::build_graph(sys);
        *out = new sls_system{std::move(sys), std::move(graph)};
    });
}

sls_status sls_system_save(const sls_system* sys, const char* path) {
    if (!sys || !path) return bad_arg("null argument");
    return guarded([&] { sls::save_system(sys->sys, path); });
}

sls_status sls_system_load(const char* path, sls_system** out) {
    if (!path || !out) return bad_arg("null argument");
    return guarded([&] {
        auto sys = sls::load_system(path);
        auto graph = sls::build_graph(sys);
        *out = new sls_system{std::move(sys), std::move(graph)};
    });
}

sls_status sls_system_dims(const sls_system* sys, int* n, int* m, int* p, int* n_nodes) {
    if (!sys) return bad_arg("null system");
    if (n) *n = sys->sys.n();
    if (m) *m = sys->sys.m();
    if (p) *p = sys->sys.p();
    if (n_nodes) *n_nodes = sys->sys.n_nodes;
    return SLS_OK;
}

void sls_system_free(sls_system* sys) { delete sys; }

/* ---- synthesis -------------------------------------------------------- */

sls_status sls_synthesize_sf(const sls_system* sys, int d, int t_eval, sls_solution** out) {
    if (!sys || !out) return bad_arg("null argument");
    return guarded([&] {
        auto sched = sls::build_delayed_localization(sys->graph, sys->sys, d);
        auto sol = sls::synthesize_state_feedback(sys->sys, sched, t_eval);
        *out = new sls_solution{std::move(sol), d, false};
    });
}

sls_status sls_synthesize_kf(const sls_system* sys, int d, int t_eval, sls_solution** out) {
    if (!sys || !out) return bad_arg("null argument");
    return guarded([&] {
        auto sched = sls::build_delayed_localization(sys->graph, sys->sys, d);
        auto sol = sls::synthesize_kalman_filter(sys->sys, sched, t_eval);
        *out = new sls_solution{std::move(sol), d, true};
    });
}

sls_status sls_solution_cost(const sls_solution* sol, double* cost, double* tail_bound) {
    if (!sol) return bad_arg("null solution");
    if (cost) *cost = sol->sol.cost;
    if (tail_bound) *tail_bound = sol->sol.tail_bound;
    return SLS_OK;
}

sls_status sls_solution_sf_residual(const sls_solution* sol, const sls_system* sys,
                                    int horizon, double* out) {
    if (!sol || !sys || !out) return bad_arg("null argument");
    if (sol->is_estimator) return bad_arg("residual check expects a state-feedback factor");
    return guarded([&] {
        *out = sls::verify_sf_feasibility(sol->sol.Phi_x, sol->sol.Phi_u, sys->sys, horizon);
    });
}

sls_status sls_solution_dump_csv(const sls_solution* sol, const char* path,
                                 const char* comment) {
    if (!sol || !path) return bad_arg("null argument");
    return guarded([&] {
        std::FILE* f = std::fopen(path, "w");
        if (!f) throw sls::IoError(std::string("cannot write realization csv: ") + path);
        std::fprintf(f, "# %s\n", comment ? comment : "");
        std::fprintf(f, "column,matrix,row,col,value\n");
        auto dump = [&](int i, const char* name, const sls::Mat& m) {
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                    if (m(r, c) != 0.0)
                        std::fprintf(f, "%d,%s,%td,%td,%.17g\n", i, name, r, c, m(r, c));
        };
        for (const auto& col : sol->sol.columns) {
            dump(col.i, "A", col.A_blk);
            dump(col.i, "B", col.B_blk);
            dump(col.i, "C", col.C_blk);
            dump(col.i, "K", col.K_blk);
        }
        std::fclose(f);
    });
}

void sls_solution_free(sls_solution* sol) { delete sol; }

/* ---- composition and analysis ------------------------------------------ */

sls_status sls_compose(const sls_system* sys, const sls_solution* sf, const sls_solution* kf,
                       int horizon, sls_clm** out) {
    if (!sys || !sf || !kf || !out) return bad_arg("null argument");
    if (sf->is_estimator || !kf->is_estimator)
        return bad_arg("compose expects (state-feedback, estimator) in that order");
    return guarded([&] {
        auto clm = sls::compose_output_feedback(sf->sol, kf->sol, sys->sys, horizon);
        clm.d = sf->d;
        *out = new sls_clm{std::move(clm)};
    });
}

sls_status sls_clm_h2_cost(const sls_clm* clm, const sls_system* sys, int horizon,
                           double* cost, double* tail_bound) {
    if (!clm || !sys || !cost) return bad_arg("null argument");
    return guarded([&] {
        auto res = sls::h2_cost(clm->clm, sys->sys, horizon);
        *cost = res.cost;
        if (tail_bound) *tail_bound = res.tail_bound;
    });
}

sls_status sls_clm_feasibility_residual(const sls_clm* clm, const sls_system* sys, int horizon,
                                        double* out) {
    if (!clm || !sys || !out) return bad_arg("null argument");
    return guarded([&] { *out = sls::verify_of_feasibility(clm->clm, sys->sys, horizon); });
}

sls_status sls_clm_localization_width(const sls_clm* clm, const sls_system* sys, int horizon,
                                      int* out) {
    if (!clm || !sys || !out) return bad_arg("null argument");
    return guarded([&] {
        *out = sls::localization_width(clm->clm, sys->graph, sys->sys, horizon);
    });
}

sls_status sls_clm_dump_csv(const sls_clm* clm, const char* path, const char* comment) {
    if (!clm || !path) return bad_arg("null argument");
    return guarded([&] { sls::dump_kernels_csv(clm->clm, path, comment ? comment : ""); });
}

void sls_clm_free(sls_clm* clm) { delete clm; }

/* ---- oracles ------------------------------------------------------------ */

sls_status sls_centralized_lqg_cost(const sls_system* sys, double* out) {
    if (!sys || !out) return bad_arg("null argument");
    return guarded([&] { *out = sls::solve_centralized_lqg(sys->sys).lqg_cost; });
}

sls_status sls_centralized_lqr_cost(const sls_system* sys, double* out) {
    if (!sys || !out) return bad_arg("null argument");
    return guarded([&] {
        auto [p, k] = sls::dare_fixed_point(sys->sys.A, sys->sys.B, sys->sys.Q, sys->sys.R);
        *out = (p * sys->sys.W).trace();
    });
}

sls_status sls_fir_sf_cost(const sls_system* sys, int d, int horizon, double* out) {
    if (!sys || !out) return bad_arg("null argument");
    return guarded([&] {
        auto cost = sls::fir_sf_cost(sys->sys, d, horizon);
        if (!cost)
            throw sls::SynthesisError("FIR restriction infeasible at horizon " +
                                      std::to_string(horizon));
        *out = *cost;
    });
}

/* ---- simulation ----------------------------------------------------------- */

void sls_sim_options_init(sls_sim_options* opt) {
    if (!opt) return;
    opt->t_sim = 100;
    opt->seed = 0;
    opt->record_messages = 0;
    opt->noise_scale = 1.0;
    opt->impulse_t = -1;
    opt->impulse_signal = 0;
    opt->impulse_coord = 0;
}

namespace {

sls::SimOptions to_sim_options(const sls_sim_options* opt) {
    sls::SimOptions o;
    if (!opt) return o;
    o.t_sim = opt->t_sim;
    o.seed = opt->seed;
    o.record_messages = opt->record_messages != 0;
    o.noise_scale = opt->noise_scale;
    o.impulse_t = opt->impulse_t;
    switch (opt->impulse_signal) {
        case 1: o.impulse_at = sls::SimOptions::ImpulseAt::x; break;
        case 2: o.impulse_at = sls::SimOptions::ImpulseAt::y; break;
        case 3: o.impulse_at = sls::SimOptions::ImpulseAt::beta; break;
        default: o.impulse_at = sls::SimOptions::ImpulseAt::none; break;
    }
    o.impulse_coord = opt->impulse_coord;
    return o;
}

}  // namespace

sls_status sls_simulate_distributed(const sls_system* sys, const sls_solution* sf,
                                    const sls_solution* kf, int d,
                                    const sls_sim_options* opt, sls_trajectory** out) {
    if (!sys || !sf || !kf || !out) return bad_arg("null argument");
    if (sf->is_estimator || !kf->is_estimator)
        return bad_arg("simulate expects (state-feedback, estimator) in that order");
    return guarded([&] {
        auto nodes = sls::init_nodes(sf->sol, kf->sol, sys->sys, sys->graph, d);
        auto rec = sls::run_closed_loop(sys->sys, sys->graph, nodes, d, to_sim_options(opt));
        *out = new sls_trajectory{std::move(rec)};
    });
}

sls_status sls_simulate_centralized(const sls_system* sys, const sls_clm* clm,
                                    const sls_sim_options* opt, sls_trajectory** out) {
    if (!sys || !clm || !out) return bad_arg("null argument");
    return guarded([&] {
        auto rec = sls::run_centralized_reference(clm->clm, sys->sys, to_sim_options(opt));
        *out = new sls_trajectory{std::move(rec)};
    });
}

sls_status sls_trajectory_running_cost(const sls_trajectory* traj, double* out) {
    if (!traj || !out) return bad_arg("null argument");
    *out = traj->rec.running_cost;
    return SLS_OK;
}

sls_status sls_trajectory_length(const sls_trajectory* traj, int* out) {
    if (!traj || !out) return bad_arg("null argument");
    *out = static_cast<int>(traj->rec.x.size());
    return SLS_OK;
}

sls_status sls_trajectory_max_deviation(const sls_trajectory* a, const sls_trajectory* b,
                                        double* u_dev, double* beta_dev) {
    if (!a || !b) return bad_arg("null argument");
    if (a->rec.u.size() != b->rec.u.size()) return bad_arg("trajectory lengths differ");
    double ud = 0.0, bd = 0.0;
    for (std::size_t t = 0; t < a->rec.u.size(); ++t) {
        ud = std::max(ud, (a->rec.u[t] - b->rec.u[t]).cwiseAbs().maxCoeff());
        bd = std::max(bd, (a->rec.beta[t] - b->rec.beta[t]).cwiseAbs().maxCoeff());
    }
    if (u_dev) *u_dev = ud;
    if (beta_dev) *beta_dev = bd;
    return SLS_OK;
}

sls_status sls_trajectory_signal_norm(const sls_trajectory* traj, int t, double* out) {
    if (!traj || !out) return bad_arg("null argument");
    if (t < 0 || t >= static_cast<int>(traj->rec.x.size())) return bad_arg("t out of range");
    const auto ti = static_cast<std::size_t>(t);
    double norm = traj->rec.x[ti].cwiseAbs().maxCoeff() +
                  traj->rec.u[ti].cwiseAbs().maxCoeff() +
                  traj->rec.beta[ti].cwiseAbs().maxCoeff();
    *out = norm;
    return SLS_OK;
}

sls_status sls_trajectory_locality_violations(const sls_trajectory* traj, int* out) {
    if (!traj || !out) return bad_arg("null argument");
    *out = traj->rec.locality_violations;
    return SLS_OK;
}

sls_status sls_trajectory_count_hop_violations(const sls_trajectory* traj,
                                               const sls_system* sys, int d, int* out) {
    if (!traj || !sys || !out) return bad_arg("null argument");
    int count = 0;
    for (const auto& msg : traj->rec.messages) {
        int bound = (msg.stage == 1 || msg.stage == 3) ? d : 1;
        if (!sys->graph.within(msg.receiver, msg.sender, bound)) ++count;
    }
    *out = count;
    return SLS_OK;
}

sls_status sls_trajectory_dump_csv(const sls_trajectory* traj, const sls_system* sys,
                                   const char* path, const char* comment) {
    if (!traj || !sys || !path) return bad_arg("null argument");
    return guarded([&] {
        sls::dump_trajectory_csv(traj->rec, sys->sys, path, comment ? comment : "");
    });
}

sls_status sls_trajectory_dump_messages_csv(const sls_trajectory* traj, const char* path,
                                            const char* comment) {
    if (!traj || !path) return bad_arg("null argument");
    return guarded([&] { sls::dump_messages_csv(traj->rec, path, comment ? comment : ""); });
}

void sls_trajectory_free(sls_trajectory* traj) { delete traj; }

}  // extern "C"
