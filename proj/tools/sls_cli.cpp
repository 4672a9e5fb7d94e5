// Command-line front end. Talks to the library exclusively through the C API.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sls_capi.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    int d_override = -1;
    int n_override = -1;
    long long seed_override = -1;
    std::vector<int> fir_horizons = {5, 10, 15, 20, 30, 40};
};

[[noreturn]] void die(int code, const std::string& msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    std::exit(code);
}

void check(sls_status st, int exit_code = kExitRuntime) {
    if (st != SLS_OK) {
        int code = (st == SLS_ERR_INVALID_ARG || st == SLS_ERR_PARSE) ? kExitInvalid : exit_code;
        die(code, sls_last_error());
    }
}

struct Context {
    std::unique_ptr<sls_config, decltype(&sls_config_free)> cfg{nullptr, sls_config_free};
    std::unique_ptr<sls_system, decltype(&sls_system_free)> sys{nullptr, sls_system_free};
    int d = 3;
    int t_eval = 200;
    int t_sim = 500;
    int fir_horizon = 20;
    long long seed = 0;
    uint64_t hash = 0;

    std::string comment() const {
        char buf[128];
        std::snprintf(buf, sizeof buf, "config_hash=%016" PRIx64 " version=%s", hash,
                      sls_version());
        return buf;
    }
};

Context make_context(const Options& opt) {
    Context ctx;
    sls_config* cfg = nullptr;
    if (opt.config_path.empty())
        check(sls_config_default(&cfg), kExitInvalid);
    else
        check(sls_config_load(opt.config_path.c_str(), &cfg), kExitInvalid);
    ctx.cfg.reset(cfg);
    if (opt.d_override > -1) check(sls_config_set_int(cfg, "d", opt.d_override), kExitInvalid);
    if (opt.n_override > -1)
        check(sls_config_set_int(cfg, "n_nodes", opt.n_override), kExitInvalid);
    if (opt.seed_override > -1)
        check(sls_config_set_int(cfg, "seed", opt.seed_override), kExitInvalid);

    long long v = 0;
    check(sls_config_get_int(cfg, "d", &v));
    ctx.d = static_cast<int>(v);
    check(sls_config_get_int(cfg, "t_eval", &v));
    ctx.t_eval = static_cast<int>(v);
    check(sls_config_get_int(cfg, "t_sim", &v));
    ctx.t_sim = static_cast<int>(v);
    check(sls_config_get_int(cfg, "fir_horizon", &v));
    ctx.fir_horizon = static_cast<int>(v);
    check(sls_config_get_int(cfg, "seed", &ctx.seed));
    check(sls_config_hash(cfg, &ctx.hash));

    sls_system* sys = nullptr;
    check(sls_system_from_config(cfg, &sys), kExitInvalid);
    ctx.sys.reset(sys);

    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    if (ec) die(kExitInvalid, "cannot create output directory " + opt.out_dir);
    return ctx;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

// synthesize both factors and compose; returns handles the caller owns
struct Composed {
    std::unique_ptr<sls_solution, decltype(&sls_solution_free)> sf{nullptr, sls_solution_free};
    std::unique_ptr<sls_solution, decltype(&sls_solution_free)> kf{nullptr, sls_solution_free};
    std::unique_ptr<sls_clm, decltype(&sls_clm_free)> clm{nullptr, sls_clm_free};
};

Composed synthesize_and_compose(const Context& ctx, int d) {
    Composed out;
    sls_solution* sf = nullptr;
    sls_solution* kf = nullptr;
    sls_clm* clm = nullptr;
    check(sls_synthesize_sf(ctx.sys.get(), d, ctx.t_eval + 1, &sf));
    out.sf.reset(sf);
    check(sls_synthesize_kf(ctx.sys.get(), d, ctx.t_eval + 1, &kf));
    out.kf.reset(kf);
    check(sls_compose(ctx.sys.get(), sf, kf, ctx.t_eval, &clm));
    out.clm.reset(clm);
    return out;
}

int cmd_synth(const Options& opt) {
    Context ctx = make_context(opt);
    Composed c = synthesize_and_compose(ctx, ctx.d);

    double sf_cost = 0, sf_tail = 0, kf_cost = 0, kf_tail = 0, of_cost = 0, of_tail = 0;
    check(sls_solution_cost(c.sf.get(), &sf_cost, &sf_tail));
    check(sls_solution_cost(c.kf.get(), &kf_cost, &kf_tail));
    check(sls_clm_h2_cost(c.clm.get(), ctx.sys.get(), ctx.t_eval, &of_cost, &of_tail));

    check(sls_clm_dump_csv(c.clm.get(), join_path(opt.out_dir, "kernels.csv").c_str(),
                           ctx.comment().c_str()));
    check(sls_solution_dump_csv(c.sf.get(),
                                join_path(opt.out_dir, "realizations_sf.csv").c_str(),
                                ctx.comment().c_str()));
    check(sls_solution_dump_csv(c.kf.get(),
                                join_path(opt.out_dir, "realizations_kf.csv").c_str(),
                                ctx.comment().c_str()));

    std::string report_path = join_path(opt.out_dir, "cost_report.txt");
    std::FILE* f = std::fopen(report_path.c_str(), "w");
    if (!f) die(kExitRuntime, "cannot write " + report_path);
    std::fprintf(f, "# %s\n", ctx.comment().c_str());
    std::fprintf(f, "d %d\n", ctx.d);
    std::fprintf(f, "sf_cost %.12f\nsf_tail_bound %.3e\n", sf_cost, sf_tail);
    std::fprintf(f, "kf_cost %.12f\nkf_tail_bound %.3e\n", kf_cost, kf_tail);
    std::fprintf(f, "of_cost %.12f\nof_tail_bound %.3e\n", of_cost, of_tail);
    std::fclose(f);

    std::printf("d=%d sf_cost=%.6f kf_cost=%.6f of_cost=%.6f (tail bound %.3e)\n", ctx.d,
                sf_cost, kf_cost, of_cost, of_tail);
    std::printf("artifacts written to %s\n", opt.out_dir.c_str());
    return kExitOk;
}

int cmd_verify(const Options& opt) {
    Context ctx = make_context(opt);
    Composed c = synthesize_and_compose(ctx, ctx.d);

    double sf_resid = 0, of_resid = 0;
    int width = 0;
    check(sls_solution_sf_residual(c.sf.get(), ctx.sys.get(), 50, &sf_resid));
    check(sls_clm_feasibility_residual(c.clm.get(), ctx.sys.get(), 50, &of_resid));
    check(sls_clm_localization_width(c.clm.get(), ctx.sys.get(), 50, &width));

    int bound = 2 * ctx.d + 2;
    bool ok = sf_resid < 1e-8 && of_resid < 1e-8 && width <= bound;
    std::printf("sf_residual=%.3e of_residual=%.3e localization_width=%d (bound %d) -> %s\n",
                sf_resid, of_resid, width, bound, ok ? "OK" : "FAIL");
    return ok ? kExitOk : kExitRuntime;
}

int cmd_simulate(const Options& opt) {
    Context ctx = make_context(opt);
    Composed c = synthesize_and_compose(ctx, ctx.d);

    sls_sim_options so;
    sls_sim_options_init(&so);
    so.t_sim = ctx.t_sim;
    so.seed = static_cast<uint64_t>(ctx.seed);
    so.record_messages = 1;

    sls_trajectory* dist = nullptr;
    sls_trajectory* central = nullptr;
    check(sls_simulate_distributed(ctx.sys.get(), c.sf.get(), c.kf.get(), ctx.d, &so, &dist));
    std::unique_ptr<sls_trajectory, decltype(&sls_trajectory_free)> dist_guard(
        dist, sls_trajectory_free);
    check(sls_simulate_centralized(ctx.sys.get(), c.clm.get(), &so, &central));
    std::unique_ptr<sls_trajectory, decltype(&sls_trajectory_free)> central_guard(
        central, sls_trajectory_free);

    double cost = 0, u_dev = 0, beta_dev = 0;
    int violations = 0, hop_violations = 0;
    check(sls_trajectory_running_cost(dist, &cost));
    check(sls_trajectory_max_deviation(dist, central, &u_dev, &beta_dev));
    check(sls_trajectory_locality_violations(dist, &violations));
    check(sls_trajectory_count_hop_violations(dist, ctx.sys.get(), ctx.d, &hop_violations));

    check(sls_trajectory_dump_csv(dist, ctx.sys.get(),
                                  join_path(opt.out_dir, "trajectory.csv").c_str(),
                                  ctx.comment().c_str()));
    check(sls_trajectory_dump_messages_csv(
        dist, join_path(opt.out_dir, "messages.csv").c_str(), ctx.comment().c_str()));

    std::printf("t_sim=%d running_cost=%.6f max|u_dist-u_central|=%.3e "
                "max|beta_dist-beta_central|=%.3e locality_violations=%d hop_violations=%d\n",
                ctx.t_sim, cost, u_dev, beta_dev, violations, hop_violations);
    std::printf("trajectory and message log written to %s\n", opt.out_dir.c_str());
    return kExitOk;
}

int cmd_sweep_fir(const Options& opt) {
    Context ctx = make_context(opt);
    Composed c = synthesize_and_compose(ctx, ctx.d);
    double inf_cost = 0, tail = 0;
    check(sls_solution_cost(c.sf.get(), &inf_cost, &tail));

    std::string path = join_path(opt.out_dir, "sweep_fir.csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) die(kExitRuntime, "cannot write " + path);
    std::fprintf(f, "# %s\n", ctx.comment().c_str());
    std::fprintf(f, "H,fir_cost,inf_cost\n");
    for (int h : opt.fir_horizons) {
        double fir = 0;
        check(sls_fir_sf_cost(ctx.sys.get(), ctx.d, h, &fir));
        std::fprintf(f, "%d,%.12f,%.12f\n", h, fir, inf_cost);
        std::printf("H=%d fir_cost=%.6f inf_cost=%.6f\n", h, fir, inf_cost);
    }
    std::fclose(f);
    std::printf("wrote %s\n", path.c_str());
    return kExitOk;
}

int cmd_sweep_d(const Options& opt) {
    Context ctx = make_context(opt);
    double lqg = 0;
    check(sls_centralized_lqg_cost(ctx.sys.get(), &lqg));

    int d_max = opt.d_override > 0 ? opt.d_override : 8;
    std::string path = join_path(opt.out_dir, "sweep_d.csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) die(kExitRuntime, "cannot write " + path);
    std::fprintf(f, "# %s\n", ctx.comment().c_str());
    std::fprintf(f, "d,of_cost,centralized_lqg_cost\n");
    for (int d = 1; d <= d_max; ++d) {
        Composed c = synthesize_and_compose(ctx, d);
        double of_cost = 0, of_tail = 0;
        check(sls_clm_h2_cost(c.clm.get(), ctx.sys.get(), ctx.t_eval, &of_cost, &of_tail));
        std::fprintf(f, "%d,%.12f,%.12f\n", d, of_cost, lqg);
        std::printf("d=%d of_cost=%.6f lqg=%.6f\n", d, of_cost, lqg);
    }
    std::fclose(f);
    std::printf("wrote %s\n", path.c_str());
    return kExitOk;
}

int cmd_sweep_n(const Options& opt) {
    Context base = make_context(opt);
    int n_max = opt.n_override > 0 ? opt.n_override : 14;
    std::string path = join_path(opt.out_dir, "sweep_n.csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) die(kExitRuntime, "cannot write " + path);
    std::fprintf(f, "# %s\n", base.comment().c_str());
    std::fprintf(f, "N,of_cost,centralized_lqg_cost,gap\n");
    for (int n = 6; n <= n_max; n += 2) {
        Options o = opt;
        o.n_override = n;
        Context ctx = make_context(o);
        Composed c = synthesize_and_compose(ctx, ctx.d);
        double of_cost = 0, of_tail = 0, lqg = 0;
        check(sls_clm_h2_cost(c.clm.get(), ctx.sys.get(), ctx.t_eval, &of_cost, &of_tail));
        check(sls_centralized_lqg_cost(ctx.sys.get(), &lqg));
        std::fprintf(f, "%d,%.12f,%.12f,%.12f\n", n, of_cost, lqg, of_cost - lqg);
        std::printf("N=%d of_cost=%.6f lqg=%.6f gap=%.6f\n", n, of_cost, lqg, of_cost - lqg);
    }
    std::fclose(f);
    std::printf("wrote %s\n", path.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured LQG synthesis, verification, and simulation"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--config", opt.config_path, "configuration file (key = value lines)");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--d", opt.d_override, "override the delay/localization parameter");
    app.add_option("--n", opt.n_override, "override the node count");
    app.add_option("--seed", opt.seed_override, "override the noise seed");
    app.add_option("--fir-horizons", opt.fir_horizons, "horizons for sweep-fir");

    auto* synth = app.add_subcommand("synth", "synthesize factors, compose, dump artifacts");
    auto* verify = app.add_subcommand("verify", "check feasibility residuals and localization");
    auto* simulate = app.add_subcommand("simulate", "run the distributed controller");
    auto* sweep_fir = app.add_subcommand("sweep-fir", "FIR restriction cost vs horizon");
    auto* sweep_d = app.add_subcommand("sweep-d", "composed cost vs delay parameter");
    auto* sweep_n = app.add_subcommand("sweep-n", "composed cost vs network size");
    for (auto* sub : {synth, verify, simulate, sweep_fir, sweep_d, sweep_n})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (synth->parsed()) return cmd_synth(opt);
        if (verify->parsed()) return cmd_verify(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (sweep_fir->parsed()) return cmd_sweep_fir(opt);
        if (sweep_d->parsed()) return cmd_sweep_d(opt);
        if (sweep_n->parsed()) return cmd_sweep_n(opt);
    } catch (const std::exception& e) {
        die(kExitRuntime, e.what());
    }
    return kExitInvalid;
}
