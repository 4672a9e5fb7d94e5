#include "sls/system_model.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <sstream>

namespace sls {

void NetworkSystem::validate() const {
    const int n_ = n(), m_ = m(), p_ = p();
    if (n_ == 0) throw InvalidConfigError("empty system");
    if (A.cols() != n_) throw InvalidConfigError("A must be square");
    if (B.rows() != n_) throw InvalidConfigError("B row count mismatch");
    if (C.cols() != n_) throw InvalidConfigError("C column count mismatch");
    require_spd(W, "W");
    require_spd(V, "V");
    require_spd(Q, "Q");
    require_spd(R, "R");
    if (W.rows() != n_ || Q.rows() != n_ || R.rows() != m_ || V.rows() != p_)
        throw InvalidConfigError("weight dimension mismatch");
    auto check_partition = [&](const std::vector<int>& part, int count, const char* what) {
        if (static_cast<int>(part.size()) != count)
            throw InvalidConfigError(std::string(what) + " partition size mismatch");
        for (int node : part)
            if (node < 0 || node >= n_nodes)
                throw InvalidConfigError(std::string(what) + " partition out of range");
    };
    check_partition(node_of_state, n_, "state");
    check_partition(node_of_input, m_, "input");
    check_partition(node_of_output, p_, "output");
}

std::vector<int> InterconnectionGraph::in_neighborhood(int i, int k) const {
    std::vector<int> out;
    for (int j = 0; j < n_nodes; ++j)
        if (within(i, j, k)) out.push_back(j);
    return out;
}

void ExperimentConfig::validate() const {
    if (n_nodes < 1) throw InvalidConfigError("n_nodes must be >= 1");
    if (d < 1) throw InvalidConfigError("d must be >= 1");
    if (q_scale <= 0 || r_scale <= 0) throw InvalidConfigError("cost scales must be positive");
    if (t_sim < 1 || t_eval < 1 || fir_horizon < 1)
        throw InvalidConfigError("horizons must be >= 1");
}

NetworkSystem build_chain_network(int n_nodes, double alpha, double rho, double q_scale,
                                  double r_scale) {
    if (n_nodes < 1) throw InvalidConfigError("n_nodes must be >= 1");
    if (q_scale <= 0 || r_scale <= 0) throw InvalidConfigError("cost scales must be positive");
    NetworkSystem sys;
    const int n = n_nodes;
    sys.n_nodes = n;
    sys.A = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        sys.A(i, i) = rho * (1.0 - 2.0 * alpha);
        if (i > 0) sys.A(i, i - 1) = rho * alpha;
        if (i + 1 < n) sys.A(i, i + 1) = rho * alpha;
    }
    sys.B = Mat::Identity(n, n);
    sys.C = Mat::Identity(n, n);
    sys.W = Mat::Identity(n, n);
    sys.V = Mat::Identity(n, n);
    sys.Q = q_scale * Mat::Identity(n, n);
    sys.R = r_scale * Mat::Identity(n, n);
    sys.node_of_state.resize(n);
    sys.node_of_input.resize(n);
    sys.node_of_output.resize(n);
    for (int i = 0; i < n; ++i)
        sys.node_of_state[i] = sys.node_of_input[i] = sys.node_of_output[i] = i;
    sys.validate();
    return sys;
}

NetworkSystem build_system(const ExperimentConfig& cfg) {
    cfg.validate();
    return build_chain_network(cfg.n_nodes, cfg.alpha, cfg.rho, cfg.q_scale, cfg.r_scale);
}

InterconnectionGraph build_graph(const NetworkSystem& sys) {
    sys.validate();
    InterconnectionGraph g;
    const int N = sys.n_nodes;
    g.n_nodes = N;
    g.support = IntMat::Zero(N, N);
    for (int r = 0; r < sys.n(); ++r)
        for (int c = 0; c < sys.n(); ++c)
            if (sys.A(r, c) != 0.0)
                g.support(sys.node_of_state[r], sys.node_of_state[c]) = 1;
    for (int i = 0; i < N; ++i) g.support(i, i) = 1;

    g.hop_distance = IntMat::Constant(N, N, kUnreachable);
    for (int s = 0; s < N; ++s) {
        g.hop_distance(s, s) = 0;
        std::deque<int> queue{s};
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int v = 0; v < N; ++v) {
                if (!g.support(u, v) && !g.support(v, u)) continue;
                if (g.hop_distance(s, v) == kUnreachable) {
                    g.hop_distance(s, v) = g.hop_distance(s, u) + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return g;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        std::string val = trim(stripped.substr(eq + 1));
        try {
            if (key == "n_nodes") cfg.n_nodes = std::stoi(val);
            else if (key == "alpha") cfg.alpha = std::stod(val);
            else if (key == "rho") cfg.rho = std::stod(val);
            else if (key == "q_scale") cfg.q_scale = std::stod(val);
            else if (key == "r_scale") cfg.r_scale = std::stod(val);
            else if (key == "d") cfg.d = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "t_sim") cfg.t_sim = std::stoi(val);
            else if (key == "t_eval") cfg.t_eval = std::stoi(val);
            else if (key == "fir_horizon") cfg.fir_horizon = std::stoi(val);
            else throw ParseError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ParseError("config line " + std::to_string(lineno) + ": bad value '" + val + "'");
        } catch (const std::out_of_range&) {
            throw ParseError("config line " + std::to_string(lineno) + ": value out of range");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "n_nodes = %d\nalpha = %.17g\nrho = %.17g\nq_scale = %.17g\n"
                  "r_scale = %.17g\nd = %d\nseed = %" PRIu64 "\nt_sim = %d\nt_eval = %d\n"
                  "fir_horizon = %d\n",
                  cfg.n_nodes, cfg.alpha, cfg.rho, cfg.q_scale, cfg.r_scale, cfg.d,
                  static_cast<std::uint64_t>(cfg.seed), cfg.t_sim, cfg.t_eval, cfg.fir_horizon);
    return buf;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::string text = config_to_text(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

void write_matrix(std::FILE* f, const char* name, const Mat& m) {
    std::fprintf(f, "%s %td %td\n", name, m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            std::fprintf(f, "%s%a", c ? " " : "", m(r, c));
        std::fprintf(f, "\n");
    }
}

Mat read_matrix(std::FILE* f, const char* name) {
    char tag[64];
    long rows = 0, cols = 0;
    if (std::fscanf(f, "%63s %ld %ld", tag, &rows, &cols) != 3 || std::strcmp(tag, name) != 0)
        throw ParseError(std::string("system file: expected matrix ") + name);
    Mat m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) {
            double v;
            if (std::fscanf(f, "%la", &v) != 1)
                throw ParseError(std::string("system file: bad entry in ") + name);
            m(r, c) = v;
        }
    return m;
}

void write_partition(std::FILE* f, const char* name, const std::vector<int>& p) {
    std::fprintf(f, "%s %zu\n", name, p.size());
    for (std::size_t k = 0; k < p.size(); ++k)
        std::fprintf(f, "%s%d", k ? " " : "", p[k]);
    std::fprintf(f, "\n");
}

std::vector<int> read_partition(std::FILE* f, const char* name) {
    char tag[64];
    long count = 0;
    if (std::fscanf(f, "%63s %ld", tag, &count) != 2 || std::strcmp(tag, name) != 0)
        throw ParseError(std::string("system file: expected partition ") + name);
    std::vector<int> out(static_cast<std::size_t>(count));
    for (long k = 0; k < count; ++k)
        if (std::fscanf(f, "%d", &out[static_cast<std::size_t>(k)]) != 1)
            throw ParseError(std::string("system file: bad entry in ") + name);
    return out;
}

}  // namespace

void save_system(const NetworkSystem& sys, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot write system file: " + path);
    std::fprintf(f, "network_system 1\nn_nodes %d\n", sys.n_nodes);
    write_matrix(f, "A", sys.A);
    write_matrix(f, "B", sys.B);
    write_matrix(f, "C", sys.C);
    write_matrix(f, "W", sys.W);
    write_matrix(f, "V", sys.V);
    write_matrix(f, "Q", sys.Q);
    write_matrix(f, "R", sys.R);
    write_partition(f, "node_of_state", sys.node_of_state);
    write_partition(f, "node_of_input", sys.node_of_input);
    write_partition(f, "node_of_output", sys.node_of_output);
    std::fclose(f);
}

NetworkSystem load_system(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "r");
    if (!f) throw IoError("cannot open system file: " + path);
    struct Closer {
        std::FILE* f;
        ~Closer() { std::fclose(f); }
    } closer{f};
    char tag[64];
    int version = 0;
    if (std::fscanf(f, "%63s %d", tag, &version) != 2 || std::strcmp(tag, "network_system") != 0)
        throw ParseError("not a system file: " + path);
    NetworkSystem sys;
    if (std::fscanf(f, "%63s %d", tag, &sys.n_nodes) != 2 || std::strcmp(tag, "n_nodes") != 0)
        throw ParseError("system file: missing n_nodes");
    sys.A = read_matrix(f, "A");
    sys.B = read_matrix(f, "B");
    sys.C = read_matrix(f, "C");
    sys.W = read_matrix(f, "W");
    sys.V = read_matrix(f, "V");
    sys.Q = read_matrix(f, "Q");
    sys.R = read_matrix(f, "R");
    sys.node_of_state = read_partition(f, "node_of_state");
    sys.node_of_input = read_partition(f, "node_of_input");
    sys.node_of_output = read_partition(f, "node_of_output");
    sys.validate();
    return sys;
}

}  // namespace sls
