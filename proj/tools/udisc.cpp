// udisc: optimum unambiguous discrimination from the command line.
//
//   udisc solve    problem.json [--out r.json] [--verify N] [--phases] [--povm]
//   udisc gepm     problem.json
//   udisc simulate problem.json --trials N [--seed S] [--shards K]
//   udisc region   problem.json --samples N [--seed S] --out cloud.csv
//
// Exit status: 0 success, 1 input error, 2 numerical or certificate failure.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "udisc/closedform.hpp"
#include "udisc/io.hpp"
#include "udisc/oracle.hpp"
#include "udisc/povm.hpp"
#include "udisc/solver.hpp"

namespace {

using namespace udisc;
using io::json;

constexpr int kRefineIters = 2000;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("UDISC_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument(env);
            return v;
        } catch (const std::exception&) {
            throw InputError(std::string("UDISC_SEED: not an unsigned integer: '") + env + "'");
        }
    }
    return 0;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw InputError("cannot write '" + out + "'");
    f << text;
    if (!f) throw InputError("write failed for '" + out + "'");
}

struct SolveArgs {
    std::string file, out;
    std::optional<std::size_t> verify;
    bool phases = false, povm = false;
    std::optional<double> tol;
    std::optional<int> max_iter, multistarts;
    std::optional<std::uint64_t> seed;
};

SolverConfig solver_config(const SolveArgs& a) {
    SolverConfig cfg;
    if (a.tol) cfg.tol_cert = *a.tol;
    if (a.max_iter) cfg.max_iter = *a.max_iter;
    if (a.multistarts) cfg.multistarts = *a.multistarts;
    cfg.rng_seed = resolve_seed(a.seed);
    cfg.validate();
    return cfg;
}

int cmd_solve(const SolveArgs& a) {
    const io::ProblemFile pf = io::load_problem(a.file);
    const StateEnsemble ens = pf.ensemble();
    const SolverConfig cfg = solver_config(a);
    const GramMatrix X = gram(ens);
    const OptimumSolution sol = optimize(X, ens.priors(), cfg);

    io::SolutionReport rep = io::make_report(sol);
    if (a.phases && sol.classification == Classification::InteriorNonSingular) {
        const PhaseVector ph = extract_phases(X, ens.priors(), sol.p_opt);
        rep.phases = std::vector<double>(ph.thetas.data(), ph.thetas.data() + ph.thetas.size());
        rep.xi = ph.xi;
    }
    if (a.povm) {
        const PovmSet ps = build_povm(ens, sol.p_opt);
        rep.povm = io::PovmMatrices{ps.elements, ps.inconclusive};
        rep.residuals["povm_completeness"] = ps.completeness_residual();
        rep.residuals["povm_min_eigenvalue"] = ps.min_eigenvalue();
    }
    if (a.verify) {
        const OracleResult o = oracle_maximize(X, ens.priors(), *a.verify, kRefineIters, cfg.rng_seed);
        rep.oracle_gap = sol.p_bar - o.best_value;
    }
    io::validate_report(rep);
    emit(io::to_json(rep).dump(2) + "\n", a.out);
    return 0;
}

int cmd_gepm(const std::string& file, const std::string& out, std::optional<double> tol) {
    const io::ProblemFile pf = io::load_problem(file);
    if (!pf.weights) throw WeightsInvalid("weights: field is required for gepm");
    const StateEnsemble ens = pf.ensemble(true);
    const GepmResult g = gepm(ens, *pf.weights, tol.value_or(SolverConfig{}.tol_cert));
    emit(io::to_json(g).dump(2) + "\n", out);
    return 0;
}

int cmd_simulate(const std::string& file, const std::string& out, std::uint64_t trials,
                 std::optional<std::uint64_t> seed_flag, int shards) {
    const io::ProblemFile pf = io::load_problem(file);
    const StateEnsemble ens = pf.ensemble();
    SolverConfig cfg;
    cfg.rng_seed = resolve_seed(seed_flag);
    const OptimumSolution sol = optimize(ens, cfg);
    const PovmSet ps = build_povm(ens, sol.p_opt);
    const SimulationReport sim = simulate(ps, ens, trials, cfg.rng_seed, shards);
    json j = io::to_json(sim);
    j["p_bar"] = sol.p_bar;
    j["classification"] = to_string(sol.classification);
    emit(j.dump(2) + "\n", out);
    return 0;
}

int cmd_region(const std::string& file, const std::string& out, std::size_t samples,
               std::optional<std::uint64_t> seed_flag) {
    const io::ProblemFile pf = io::load_problem(file);
    const StateEnsemble ens = pf.ensemble(true);
    if (ens.size() != 3) {
        throw UnsupportedDimension("region export needs exactly 3 states, got " + std::to_string(ens.size()));
    }
    const SurfaceSample s = sample_surface(gram(ens), ens.priors(), samples, resolve_seed(seed_flag));
    emit(io::region_csv(s.points), out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimum unambiguous discrimination of linearly independent pure states"};
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Solve for the optimum success probabilities");
    solve->add_option("file", sa.file, "Problem file (JSON)")->required();
    solve->add_option("--out", sa.out, "Write the report here instead of stdout");
    solve->add_option("--verify", sa.verify, "Cross-check with the sampling oracle using N samples");
    solve->add_flag("--phases", sa.phases, "Report null-vector phases for interior optima");
    solve->add_flag("--povm", sa.povm, "Embed the optimal POVM matrices");
    solve->add_option("--tol", sa.tol, "Certificate tolerance");
    solve->add_option("--max-iter", sa.max_iter, "Newton iteration limit");
    solve->add_option("--multistarts", sa.multistarts, "Random Newton starts per face");
    solve->add_option("--seed", sa.seed, "Seed (defaults to $UDISC_SEED, then 0)");

    std::string g_file, g_out;
    std::optional<double> g_tol;
    auto* gep = app.add_subcommand("gepm", "Generalized equal-probability measurement");
    gep->add_option("file", g_file, "Problem file with weights")->required();
    gep->add_option("--out", g_out, "Output path");
    gep->add_option("--tol", g_tol, "Singularity tolerance");

    std::string s_file, s_out;
    std::uint64_t s_trials = 0;
    std::optional<std::uint64_t> s_seed;
    int s_shards = 1;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo run of the optimal measurement");
    sim->add_option("file", s_file, "Problem file")->required();
    sim->add_option("--trials", s_trials, "Number of trials")->required();
    sim->add_option("--seed", s_seed, "Seed (defaults to $UDISC_SEED, then 0)");
    sim->add_option("--shards", s_shards, "Independent RNG streams");
    sim->add_option("--out", s_out, "Output path");

    std::string r_file, r_out;
    std::size_t r_samples = 0;
    std::optional<std::uint64_t> r_seed;
    auto* reg = app.add_subcommand("region", "Export critical-surface samples as CSV (3 states)");
    reg->add_option("file", r_file, "Problem file")->required();
    reg->add_option("--samples", r_samples, "Number of surface points")->required();
    reg->add_option("--seed", r_seed, "Seed (defaults to $UDISC_SEED, then 0)");
    reg->add_option("--out", r_out, "CSV output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*solve) return cmd_solve(sa);
        if (*gep) return cmd_gepm(g_file, g_out, g_tol);
        if (*sim) return cmd_simulate(s_file, s_out, s_trials, s_seed, s_shards);
        if (*reg) return cmd_region(r_file, r_out, r_samples, r_seed);
    } catch (const InputError& e) {
        std::cerr << "udisc: input error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "udisc: numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "udisc: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
