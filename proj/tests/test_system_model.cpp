#include <cstdio>
#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "sls/system_model.hpp"

using namespace sls;

TEST_CASE("chain network matches the closed-form pattern") {
    NetworkSystem sys = build_chain_network(3, 0.6, 1.0, 1.0, 300.0);
    Mat expected(3, 3);
    expected << -0.2, 0.6, 0.0,
                 0.6, -0.2, 0.6,
                 0.0, 0.6, -0.2;
    CHECK(max_abs(sys.A - expected) < 1e-15);
    CHECK(max_abs(sys.R - 300.0 * Mat::Identity(3, 3)) == 0.0);
    CHECK(max_abs(sys.B - Mat::Identity(3, 3)) == 0.0);
    CHECK(max_abs(sys.C - Mat::Identity(3, 3)) == 0.0);
}

TEST_CASE("alpha = 0 decouples the chain") {
    NetworkSystem sys = build_chain_network(2, 0.0, 0.5, 1.0, 1.0);
    CHECK(max_abs(sys.A - 0.5 * Mat::Identity(2, 2)) == 0.0);
}

TEST_CASE("chain tridiagonal structure for all sizes") {
    for (int n : {2, 5, 15}) {
        NetworkSystem sys = build_chain_network(n, 0.6, 1.0, 1.0, 300.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK((sys.A(i, j) != 0.0) == (std::abs(i - j) <= 1));
    }
}

TEST_CASE("invalid scales are rejected") {
    CHECK_THROWS_AS(build_chain_network(3, 0.6, 1.0, 0.0, 300.0), InvalidConfigError);
    CHECK_THROWS_AS(build_chain_network(3, 0.6, 1.0, 1.0, -1.0), InvalidConfigError);
    CHECK_THROWS_AS(build_chain_network(0, 0.6, 1.0, 1.0, 1.0), InvalidConfigError);
}

TEST_CASE("hop distances on the chain") {
    NetworkSystem sys = build_chain_network(15, 0.6, 1.0, 1.0, 300.0);
    InterconnectionGraph g = build_graph(sys);
    CHECK(g.hop_distance(0, 14) == 14);
    CHECK(g.hop_distance(0, 2) == 2);

    NetworkSystem small = build_chain_network(5, 0.6, 1.0, 1.0, 300.0);
    InterconnectionGraph gs = build_graph(small);
    auto ball = gs.in_neighborhood(2, 2);
    CHECK(ball == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("diagonal plant has no cross-node hops") {
    NetworkSystem sys = build_chain_network(4, 0.0, 0.5, 1.0, 1.0);
    InterconnectionGraph g = build_graph(sys);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j)
                CHECK(g.hop_distance(i, j) == 0);
            else
                CHECK(g.hop_distance(i, j) == kUnreachable);
        }
}

TEST_CASE("hop metric: triangle inequality and zero diagonal") {
    NetworkSystem sys = build_chain_network(9, 0.6, 1.0, 1.0, 300.0);
    InterconnectionGraph g = build_graph(sys);
    for (int i = 0; i < 9; ++i) {
        CHECK(g.hop_distance(i, i) == 0);
        for (int j = 0; j < 9; ++j)
            for (int k = 0; k < 9; ++k)
                CHECK(g.hop_distance(i, j) <= g.hop_distance(i, k) + g.hop_distance(k, j));
    }
}

TEST_CASE("config parsing") {
    ExperimentConfig cfg = parse_config_text("n_nodes = 10\nd = 3\n");
    CHECK(cfg.n_nodes == 10);
    CHECK(cfg.d == 3);
    CHECK(cfg.r_scale == 300.0);  // default preserved

    ExperimentConfig defaults = parse_config_text("");
    CHECK(defaults.n_nodes == 15);
    CHECK(defaults.alpha == 0.6);
    CHECK(defaults.rho == 1.0);
    CHECK(defaults.q_scale == 1.0);
    CHECK(defaults.r_scale == 300.0);
    CHECK(defaults.d == 3);
    CHECK(defaults.seed == 0);
    CHECK(defaults.t_sim == 500);
    CHECK(defaults.t_eval == 200);
    CHECK(defaults.fir_horizon == 20);

    CHECK_THROWS_AS(parse_config_text("d = 0\n"), InvalidConfigError);
    CHECK_THROWS_AS(parse_config_text("unknown_key = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("d = banana\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("no equals sign here\n"), ParseError);
}

TEST_CASE("config text round trip and hash stability") {
    ExperimentConfig cfg;
    cfg.n_nodes = 7;
    cfg.alpha = 0.55;
    ExperimentConfig again = parse_config_text(config_to_text(cfg));
    CHECK(again.n_nodes == 7);
    CHECK(again.alpha == 0.55);
    CHECK(config_hash(cfg) == config_hash(again));
    CHECK(config_hash(cfg) != config_hash(ExperimentConfig{}));
}

TEST_CASE("system file round trip is bit exact") {
    NetworkSystem sys = build_chain_network(6, 0.6123456789012345, 0.987654321, 1.25, 313.7);
    std::string path = (std::filesystem::temp_directory_path() / "sls_test_system.txt").string();
    save_system(sys, path);
    NetworkSystem back = load_system(path);
    auto exact = [](const Mat& a, const Mat& b) {
        if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
        return std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
    };
    CHECK(exact(sys.A, back.A));
    CHECK(exact(sys.B, back.B));
    CHECK(exact(sys.C, back.C));
    CHECK(exact(sys.W, back.W));
    CHECK(exact(sys.V, back.V));
    CHECK(exact(sys.Q, back.Q));
    CHECK(exact(sys.R, back.R));
    CHECK(sys.node_of_state == back.node_of_state);
    std::filesystem::remove(path);
}

TEST_CASE("weight validation catches indefinite matrices") {
    NetworkSystem sys = build_chain_network(3, 0.6, 1.0, 1.0, 300.0);
    sys.Q(0, 0) = -1.0;
    CHECK_THROWS_AS(sys.validate(), NumericError);
    sys = build_chain_network(3, 0.6, 1.0, 1.0, 300.0);
    sys.W(0, 1) = 0.5;  // asymmetric
    CHECK_THROWS_AS(sys.validate(), NumericError);
}
