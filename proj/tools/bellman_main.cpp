// Command-line front end: point evaluation, CSV batch evaluation, system
// solving, verification suites, chain statistics, dyadic-tree maximization
// and grid emission for external plotting.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bellman/dyadic_oracle.hpp"
#include "bellman/evaluator.hpp"
#include "bellman/martingale.hpp"
#include "bellman/system_solver.hpp"
#include "bellman/verify.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDomain = 2;
constexpr int kExitVerifyFailed = 3;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

Eigen::VectorXd parse_vector(const std::string& text, char sep) {
    std::vector<double> vals;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, sep)) {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument("bad vector component '" + token + "'");
        vals.push_back(v);
    }
    if (vals.empty()) throw std::invalid_argument("empty vector '" + text + "'");
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

json result_to_json(const bellman::BellmanResult& res) {
    json j;
    j["value"] = res.value;
    j["branch"] = bellman::branch_name(res.branch);
    j["gamma"] = res.gamma ? json(*res.gamma) : json(nullptr);
    j["Y"] = res.Y ? json(*res.Y) : json(nullptr);
    json residuals;
    residuals["eq1"] = res.residual_eq1 ? json(*res.residual_eq1) : json(nullptr);
    residuals["eq2"] = res.residual_eq2 ? json(*res.residual_eq2) : json(nullptr);
    j["residuals"] = residuals;
    return j;
}

int run_eval(double p, const std::string& zeta_s, const std::string& eta_s, double Z, double H) {
    const auto e = bellman::ExponentPair::from_p(p);
    const bellman::BellmanPoint pt(parse_vector(zeta_s, ','), parse_vector(eta_s, ','), Z, H);
    const auto res = bellman::eval_bellman(pt, e);
    std::cout << result_to_json(res).dump(2) << "\n";
    return kExitOk;
}

int run_solve(double p, double zeta_norm, double eta_norm, double Z, double H) {
    const auto e = bellman::ExponentPair::from_p(p);
    const auto sol = bellman::solve_system({zeta_norm, eta_norm, Z, H}, e);
    json j;
    j["gamma"] = sol.gamma;
    j["Y"] = sol.Y;
    j["residual_eq1"] = sol.residual_eq1;
    j["residual_eq2"] = sol.residual_eq2;
    j["iterations"] = sol.iterations;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int run_batch(const std::string& input_path, const std::string& output_path) {
    std::ifstream in(input_path);
    if (!in) throw std::invalid_argument("cannot open input '" + input_path + "'");
    std::ofstream out(output_path);
    if (!out) throw std::invalid_argument("cannot open output '" + output_path + "'");

    std::string line;
    long long row = 0;
    if (!std::getline(in, line)) throw std::invalid_argument("empty input file");
    ++row;
    if (line != "p,zeta,eta,Z,H") {
        throw std::invalid_argument("row 1: expected header 'p,zeta,eta,Z,H'");
    }
    out << "p,zeta,eta,Z,H,value,branch,gamma,Y,residual,error\n";

    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) {
            throw std::invalid_argument("row " + std::to_string(row) + ": expected 5 cells, got " +
                                        std::to_string(cells.size()));
        }
        double p = 0, Z = 0, H = 0;
        Eigen::VectorXd zeta, eta;
        try {
            p = std::stod(cells[0]);
            zeta = parse_vector(cells[1], ';');
            eta = parse_vector(cells[2], ';');
            Z = std::stod(cells[3]);
            H = std::stod(cells[4]);
        } catch (const std::exception& ex) {
            throw std::invalid_argument("row " + std::to_string(row) + ": " + ex.what());
        }

        out << cells[0] << ',' << cells[1] << ',' << cells[2] << ',' << cells[3] << ','
            << cells[4] << ',';
        try {
            const auto e = bellman::ExponentPair::from_p(p);
            const bellman::BellmanPoint pt(zeta, eta, Z, H);
            const auto res = bellman::eval_bellman(pt, e);
            const double resid =
                std::max(res.residual_eq1.value_or(0.0), res.residual_eq2.value_or(0.0));
            out << fmt17(res.value) << ',' << bellman::branch_name(res.branch) << ','
                << (res.gamma ? fmt17(*res.gamma) : "") << ',' << (res.Y ? fmt17(*res.Y) : "")
                << ',' << fmt17(resid) << ",\n";
        } catch (const std::exception& ex) {
            std::string msg = ex.what();
            for (char& c : msg) {
                if (c == ',' || c == '\n') c = ';';
            }
            out << "NaN,,,,," << msg << "\n";
        }
    }
    return kExitOk;
}

int run_verify(const std::string& suite, long long samples, std::uint64_t seed,
               const std::string& out_path) {
    std::vector<bellman::VerificationReport> reports;
    if (suite == "all") {
        for (const auto& name : bellman::suite_names()) {
            reports.push_back(bellman::run_suite(name, samples, seed));
        }
    } else {
        reports.push_back(bellman::run_suite(suite, samples, seed));
    }

    json arr = json::array();
    long long failures = 0;
    for (const auto& rep : reports) {
        json j;
        j["suite"] = rep.suite;
        j["samples"] = rep.samples;
        j["failures"] = rep.failures;
        j["worst_slack"] = rep.worst_slack;
        j["worst_case_input"] = rep.worst_case_input;
        j["elapsed_seconds"] = rep.elapsed_seconds;
        arr.push_back(j);
        failures += rep.failures;
        std::cerr << "suite " << rep.suite << ": " << rep.samples << " samples, " << rep.failures
                  << " failures, worst slack " << rep.worst_slack << " (" << rep.elapsed_seconds
                  << " s)\n";
    }
    if (out_path.empty()) {
        std::cout << arr.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");
        out << arr.dump(2) << "\n";
    }
    return failures == 0 ? kExitOk : kExitVerifyFailed;
}

int run_simulate(double p, double gamma, double Y, double delta, double eps, long long paths,
                 std::uint64_t seed, int max_atoms, const std::string& out_path) {
    bellman::ChainParams cp{p, gamma, Y, delta, eps};
    const bellman::ChainStats st =
        eps > 0.0 ? bellman::extremal_chain_case1(cp) : bellman::extremal_chain_case2(cp);
    json j;
    j["p"] = p;
    j["gamma"] = gamma;
    j["Y"] = Y;
    j["delta"] = delta;
    j["eps"] = eps;
    j["tail_ratio"] = st.tail_ratio;
    j["ef_mean"] = st.ef_mean;
    j["ef_p"] = st.ef_p;
    j["eg_p"] = st.eg_p;
    j["eg_signed_power"] = st.eg_signed_power;
    j["atom_count"] = st.atoms.size();
    json atoms = json::array();
    for (std::size_t i = 0; i < st.atoms.size() && i < static_cast<std::size_t>(max_atoms); ++i) {
        atoms.push_back({st.atoms[i].f_value, st.atoms[i].mass});
    }
    j["atoms"] = atoms;
    j["atoms_truncated"] = st.atoms.size() > static_cast<std::size_t>(max_atoms);

    if (paths > 0) {
        const auto mc = bellman::simulate_chain_mc(cp, paths, seed);
        json m;
        m["n_paths"] = mc.n_paths;
        m["capped_paths"] = mc.capped_paths;
        m["ef_p"] = {{"mean", mc.ef_p}, {"se", mc.ef_p_se}};
        m["eg_p"] = {{"mean", mc.eg_p}, {"se", mc.eg_p_se}};
        m["eg_signed_power"] = {{"mean", mc.eg_signed_power}, {"se", mc.eg_signed_power_se}};
        m["ef_mean"] = {{"mean", mc.ef_mean}, {"se", mc.ef_mean_se}};
        m["eg_mean"] = {{"mean", mc.eg_mean}, {"se", mc.eg_mean_se}};
        j["mc"] = m;
    }
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");
        out << j.dump(2) << "\n";
    }
    return kExitOk;
}

int run_oracle(double p, const std::string& zeta_s, const std::string& eta_s, double Z, double H,
               int depth, int restarts, std::uint64_t seed, int max_iters,
               const std::string& out_path) {
    const auto e = bellman::ExponentPair::from_p(p);
    const bellman::BellmanPoint pt(parse_vector(zeta_s, ','), parse_vector(eta_s, ','), Z, H);
    const auto res = bellman::maximize(pt, e, depth, restarts, seed, max_iters);
    const double ev = bellman::eval_bellman(pt, e).value;
    json j;
    j["value"] = res.value;
    j["eval"] = ev;
    j["gap"] = ev - res.value;
    j["depth"] = depth;
    j["restarts"] = restarts;
    std::cout << j.dump(2) << "\n";

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");
        out << "index,phi,psi\n";
        for (int i = 0; i < res.pair.leaves(); ++i) {
            out << i << ',';
            for (int c = 0; c < res.pair.dim(); ++c) {
                out << (c ? ";" : "") << fmt17(res.pair.phi_leaves(c, i));
            }
            out << ',';
            for (int c = 0; c < res.pair.dim(); ++c) {
                out << (c ? ";" : "") << fmt17(res.pair.psi_leaves(c, i));
            }
            out << "\n";
        }
    }
    return kExitOk;
}

struct GridAxis {
    std::string coord;
    double lo = 0.0;
    double hi = 1.0;
    int steps = 20;
};

int run_grid(double p, const std::string& zeta_s, const std::string& eta_s, double Z, double H,
             const GridAxis& xa, const GridAxis& ya, const std::string& out_path) {
    const auto e = bellman::ExponentPair::from_p(p);
    Eigen::VectorXd zeta = parse_vector(zeta_s, ',');
    Eigen::VectorXd eta = parse_vector(eta_s, ',');

    const auto unit_dir = [](const Eigen::VectorXd& v) {
        if (v.norm() > 0.0) return Eigen::VectorXd(v / v.norm());
        return Eigen::VectorXd(Eigen::VectorXd::Unit(v.size(), 0));
    };
    const Eigen::VectorXd zdir = unit_dir(zeta);
    const Eigen::VectorXd hdir = unit_dir(eta);

    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot open output '" + out_path + "'");
    out << xa.coord << ',' << ya.coord << ",value,branch\n";

    for (int i = 0; i < xa.steps; ++i) {
        const double x = xa.lo + (xa.hi - xa.lo) * (xa.steps == 1 ? 0 : i) /
                                     std::max(1, xa.steps - 1);
        for (int jdx = 0; jdx < ya.steps; ++jdx) {
            const double y = ya.lo + (ya.hi - ya.lo) * (ya.steps == 1 ? 0 : jdx) /
                                         std::max(1, ya.steps - 1);
            bellman::BellmanPoint pt(zeta, eta, Z, H);
            const auto apply = [&](const std::string& coord, double value) {
                if (coord == "zeta") {
                    pt.zeta = value * zdir;
                } else if (coord == "eta") {
                    pt.eta = value * hdir;
                } else if (coord == "Z") {
                    pt.Z = value;
                } else if (coord == "H") {
                    pt.H = value;
                } else {
                    throw std::invalid_argument("grid: unknown coordinate '" + coord + "'");
                }
            };
            apply(xa.coord, x);
            apply(ya.coord, y);
            out << fmt17(x) << ',' << fmt17(y) << ',';
            try {
                const auto res = bellman::eval_bellman(pt, e);
                out << fmt17(res.value) << ',' << bellman::branch_name(res.branch) << "\n";
            } catch (const std::exception&) {
                out << "NaN,OutOfDomain\n";
            }
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explicit Bellman-function evaluator for the sharp (p*-1) "
                 "inequalities of differentially subordinate dyadic martingales"};
    app.require_subcommand(1);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate the function at one point");
    double p = 2.0, Z = 1.0, H = 1.0;
    std::string zeta_s = "0", eta_s = "0";
    eval_cmd->add_option("--p", p, "exponent p")->required();
    eval_cmd->add_option("--zeta", zeta_s, "zeta components, comma separated")->required();
    eval_cmd->add_option("--eta", eta_s, "eta components, comma separated")->required();
    eval_cmd->add_option("--Z", Z, "p-th moment budget")->required();
    eval_cmd->add_option("--H", H, "q-th moment budget")->required();

    // batch
    auto* batch_cmd = app.add_subcommand("batch", "evaluate a CSV of points");
    std::string input_path, output_path;
    batch_cmd->add_option("--input", input_path, "input CSV (p,zeta,eta,Z,H)")->required();
    batch_cmd->add_option("--output", output_path, "output CSV")->required();

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "solve the (gamma, Y) system");
    double zeta_norm = 1.0, eta_norm = 0.0;
    solve_cmd->add_option("--p", p, "exponent p, 1 < p <= 2")->required();
    solve_cmd->add_option("--zeta-norm", zeta_norm, "|zeta|")->required();
    solve_cmd->add_option("--eta-norm", eta_norm, "|eta|")->required();
    solve_cmd->add_option("--Z", Z, "p-th moment budget")->required();
    solve_cmd->add_option("--H", H, "q-th moment budget")->required();

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "run property suites");
    std::string suite = "all";
    long long samples = 2000;
    std::uint64_t seed = 1;
    std::string report_path;
    verify_cmd->add_option("--suite", suite, "all|I|II|duality|consistency|subordination|haar");
    verify_cmd->add_option("--samples", samples, "samples per suite (per combo for I)");
    verify_cmd->add_option("--seed", seed, "seed");
    verify_cmd->add_option("--out", report_path, "write the JSON report array here");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "exact chain statistics and optional MC");
    double gamma = 0.5, Yv = 0.2, delta = 1e-3, eps = 0.0;
    long long paths = 0;
    int max_atoms = 1000;
    std::string sim_out;
    sim_cmd->add_option("--p", p, "exponent p, 1 < p <= 2")->required();
    sim_cmd->add_option("--gamma", gamma, "absorption slope")->required();
    sim_cmd->add_option("--Y", Yv, "start ordinate")->required();
    sim_cmd->add_option("--delta", delta, "step parameter")->required();
    sim_cmd->add_option("--eps", eps, "first-step offset (0: in-cone chain)");
    sim_cmd->add_option("--paths", paths, "Monte-Carlo paths (0: exact only)");
    sim_cmd->add_option("--seed", seed, "seed");
    sim_cmd->add_option("--max-atoms", max_atoms, "atoms to include in the JSON");
    sim_cmd->add_option("--out", sim_out, "write the JSON here");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "maximize the dyadic-tree functional");
    int depth = 6, restarts = 4, max_iters = 500;
    std::string leaves_path;
    oracle_cmd->add_option("--p", p, "exponent p")->required();
    oracle_cmd->add_option("--zeta", zeta_s, "zeta components")->required();
    oracle_cmd->add_option("--eta", eta_s, "eta components")->required();
    oracle_cmd->add_option("--Z", Z, "p-th moment budget")->required();
    oracle_cmd->add_option("--H", H, "q-th moment budget")->required();
    oracle_cmd->add_option("--depth", depth, "tree depth (<= 12)");
    oracle_cmd->add_option("--restarts", restarts, "random restarts");
    oracle_cmd->add_option("--seed", seed, "seed");
    oracle_cmd->add_option("--max-iters", max_iters, "ascent iterations");
    oracle_cmd->add_option("--out", leaves_path, "write the leaf vectors CSV here");

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "emit values over a 2-coordinate grid");
    GridAxis xa, ya;
    std::string grid_out;
    grid_cmd->add_option("--p", p, "exponent p")->required();
    grid_cmd->add_option("--zeta", zeta_s, "zeta components (direction for the zeta axis)")
        ->required();
    grid_cmd->add_option("--eta", eta_s, "eta components")->required();
    grid_cmd->add_option("--Z", Z, "fixed Z")->required();
    grid_cmd->add_option("--H", H, "fixed H")->required();
    grid_cmd->add_option("--x", xa.coord, "first coordinate: zeta|eta|Z|H")->required();
    grid_cmd->add_option("--x-min", xa.lo)->required();
    grid_cmd->add_option("--x-max", xa.hi)->required();
    grid_cmd->add_option("--x-steps", xa.steps);
    grid_cmd->add_option("--y", ya.coord, "second coordinate: zeta|eta|Z|H")->required();
    grid_cmd->add_option("--y-min", ya.lo)->required();
    grid_cmd->add_option("--y-max", ya.hi)->required();
    grid_cmd->add_option("--y-steps", ya.steps);
    grid_cmd->add_option("--output", grid_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        return app.exit(ex) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (eval_cmd->parsed()) return run_eval(p, zeta_s, eta_s, Z, H);
        if (batch_cmd->parsed()) return run_batch(input_path, output_path);
        if (solve_cmd->parsed()) return run_solve(p, zeta_norm, eta_norm, Z, H);
        if (verify_cmd->parsed()) return run_verify(suite, samples, seed, report_path);
        if (sim_cmd->parsed()) {
            return run_simulate(p, gamma, Yv, delta, eps, paths, seed, max_atoms, sim_out);
        }
        if (oracle_cmd->parsed()) {
            return run_oracle(p, zeta_s, eta_s, Z, H, depth, restarts, seed, max_iters,
                              leaves_path);
        }
        if (grid_cmd->parsed()) return run_grid(p, zeta_s, eta_s, Z, H, xa, ya, grid_out);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitDomain;
    } catch (const std::domain_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitDomain;
    }
    return kExitUsage;
}
