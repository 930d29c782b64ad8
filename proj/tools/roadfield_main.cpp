// roadfield: command-line driver for the road-field dispersion, stationary,
// simulation and convergence tools. Outputs are deterministic: identical
// configs produce byte-identical CSVs, and every run writes a manifest that
// can be fed back through --config to reproduce it.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "roadfield/analysis.hpp"
#include "roadfield/config.hpp"
#include "roadfield/dispersion.hpp"
#include "roadfield/simulate.hpp"
#include "roadfield/stationary.hpp"

namespace rf = roadfield;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitUsage = 64;

void print_usage(std::ostream& os) {
    os << "usage: roadfield <speed|stationary|simulate|converge> [--key value ...]\n"
          "global flags: --config FILE   flat key=value file or an emitted manifest\n"
          "              --out-dir DIR   output directory (default .)\n"
          "              --threads N     accepted for compatibility; runs are serial\n"
          "run `roadfield <subcommand> --help` for the subcommand keys.\n";
}

void print_subcommand_help(const std::string& cmd) {
    std::cout << "roadfield " << cmd << " keys (as --flag value, or key=value in --config):\n";
    if (cmd == "speed") {
        std::cout << "  D d mu_bar nu_bar f_prime0 kernel mu_kernel  physics (defaults 1, cos2, proportional)\n"
                     "  mode {local|nonlocal|truncated}  eps  L  delta  nodes  dump_curves\n";
    } else if (cmd == "stationary") {
        std::cout << "  d mu_bar nu_bar f_prime0 kernel mu_kernel\n"
                     "  eps | eps_list  Y  N  newton_tol  max_iters  dump_profile\n";
    } else if (cmd == "simulate") {
        std::cout << "  D d mu_bar nu_bar f_prime0 kernel mu_kernel reaction {logistic|zero}\n"
                     "  model {nonlocal|local}  eps  T  dt  Lx Ly dx dy\n"
                     "  datum_amplitude datum_amplitude_u datum_radius  snapshot_every  wall_guard\n";
    } else if (cmd == "converge") {
        std::cout << "  experiment {speed|stationary|solution|spreading}  plus the keys of the\n"
                     "  underlying subcommands; eps_list, t_sample, c_probes, eta, T, grid keys\n";
    }
}

struct Cli {
    std::string subcommand;
    std::string config_file;
    std::string out_dir = ".";
    std::vector<std::pair<std::string, std::string>> overrides;
    bool help = false;
};

bool flag_is_boolean(const std::string& key) {
    return key == "dump_curves" || key == "dump_profile" || key == "wall_guard" || key == "help";
}

Cli parse_cli(int argc, char** argv) {
    Cli cli;
    if (argc < 2) throw rf::UsageError("missing subcommand");
    cli.subcommand = argv[1];
    if (cli.subcommand == "--help" || cli.subcommand == "-h") {
        cli.help = true;
        return cli;
    }
    if (cli.subcommand != "speed" && cli.subcommand != "stationary" &&
        cli.subcommand != "simulate" && cli.subcommand != "converge")
        throw rf::UsageError("unknown subcommand '" + cli.subcommand + "'");
    for (int i = 2; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.rfind("--", 0) != 0) throw rf::UsageError("expected --flag, got '" + arg + "'");
        arg = arg.substr(2);
        std::string value;
        bool has_value = false;
        const auto eq = arg.find('=');
        if (eq != std::string::npos) {
            value = arg.substr(eq + 1);
            arg = arg.substr(0, eq);
            has_value = true;
        }
        for (char& c : arg)
            if (c == '-') c = '_';
        if (arg == "help") {
            cli.help = true;
            continue;
        }
        if (!has_value && !flag_is_boolean(arg)) {
            if (i + 1 >= argc) throw rf::UsageError("flag --" + arg + " needs a value");
            value = argv[++i];
            has_value = true;
        }
        if (!has_value) value = "true";
        if (arg == "config")
            cli.config_file = value;
        else
            cli.overrides.emplace_back(arg, value);
    }
    return cli;
}

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const std::string& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
        out_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

std::string g17(double v) { return rf::format_g17(v); }

int cmd_speed(const rf::RunConfig& cfg, const std::filesystem::path& out) {
    const rf::ModelParams params = cfg.make_params();
    const rf::KernelPair kernels = cfg.make_kernels();
    const std::string mode_name = cfg.get_string("mode", "local");
    rf::SpeedMode mode;
    if (mode_name == "local" || mode_name == "local-limit") {
        mode = rf::SpeedMode::local_limit();
    } else if (mode_name == "nonlocal") {
        mode = rf::SpeedMode::nonlocal(cfg.get_double("eps", 0.2));
    } else if (mode_name == "truncated") {
        mode = rf::SpeedMode::truncated(cfg.get_double("eps", 0.2), cfg.get_double("L", 10.0),
                                        cfg.get_double("delta", 0.01));
    } else {
        throw rf::UsageError("mode must be local|nonlocal|truncated");
    }
    rf::FindSpeedOptions opt;
    opt.n_nodes = cfg.get_int("nodes", opt.n_nodes);

    const rf::DispersionResult res = rf::find_speed(params, kernels, mode, opt);

    CsvFile csv(out / "speed.csv", "mode,eps,L,delta,c_star,lambda_star,phi0,iterations,residual");
    csv.row({res.mode.name(), g17(res.mode.eps), g17(res.mode.trunc.L), g17(res.mode.trunc.delta),
             g17(res.c_star), g17(res.lambda_star), g17(res.phi_star.center()),
             std::to_string(res.iterations), g17(res.residual)});
    if (cfg.get_bool("dump_curves", false)) {
        CsvFile curves(out / "curves.csv", "lambda,psi1,psi2");
        for (const auto& s : res.diagnostics) curves.row({g17(s.lambda), g17(s.psi1), g17(s.psi2)});
    }
    std::cout << "c_star=" << g17(res.c_star) << " lambda_star=" << g17(res.lambda_star)
              << " mode=" << res.mode.name() << "\n";
    return kExitOk;
}

int cmd_stationary(const rf::RunConfig& cfg, const std::filesystem::path& out) {
    const rf::Problem problem = cfg.make_problem();
    rf::StationaryNumerics num;
    num.Y = cfg.get_double("Y", num.Y);
    num.N = cfg.get_int("N", num.N);
    num.newton_tol = cfg.get_double("newton_tol", num.newton_tol);
    num.max_iters = cfg.get_int("max_iters", num.max_iters);

    std::vector<double> eps_list;
    if (cfg.has("eps"))
        eps_list = {cfg.get_double("eps", 0.1)};
    else
        eps_list = cfg.get_list("eps_list", {0.4, 0.2, 0.1, 0.05});

    const auto rows = rf::stationary_convergence_sweep(problem.params, problem.kernels,
                                                       problem.reaction, eps_list, num);
    CsvFile csv(out / "stationary.csv", "eps,U,sup_dev,residual,iters,ok");
    bool all_ok = true;
    for (const auto& r : rows) {
        csv.row({g17(r.eps), g17(r.U), g17(r.sup_dev), g17(r.residual), std::to_string(r.iters),
                 r.ok ? "1" : "0"});
        all_ok = all_ok && r.ok;
        std::cout << "eps=" << g17(r.eps) << " U=" << g17(r.U) << " sup_dev=" << g17(r.sup_dev)
                  << (r.ok ? "" : (" FAILED: " + r.error)) << "\n";
    }
    if (cfg.get_bool("dump_profile", false) && eps_list.size() == 1 && all_ok) {
        const rf::StationaryState st = rf::solve_stationary(problem.params, problem.kernels,
                                                            problem.reaction, eps_list[0], num);
        CsvFile prof(out / "profile.csv", "y,V");
        for (std::size_t i = 0; i < st.grid.size(); ++i) prof.row({g17(st.grid[i]), g17(st.V[i])});
    }
    if (!all_ok) throw rf::NumericalFailure("stationary sweep had failed rows");
    return kExitOk;
}

void write_state_csv(const rf::FieldState& s, const std::filesystem::path& out,
                     const std::string& suffix) {
    CsvFile ucsv(out / ("u" + suffix + ".csv"), "x,u");
    for (int i = 0; i < s.grid.Nx; ++i) ucsv.row({g17(s.grid.x(i)), g17(s.u[i])});
    CsvFile vcsv(out / ("v" + suffix + ".csv"), "x,y,v");
    for (int i = 0; i < s.grid.Nx; ++i)
        for (int j = 0; j < s.grid.Ny; ++j)
            vcsv.row({g17(s.grid.x(i)), g17(s.grid.y(j)), g17(s.at(i, j))});
}

int cmd_simulate(const rf::RunConfig& cfg, const std::filesystem::path& out,
                 std::map<std::string, std::string>& runtime) {
    const rf::Problem problem = cfg.make_problem();
    const rf::SimModel model =
        cfg.get_string("model", "local") == "nonlocal" ? rf::SimModel::Nonlocal : rf::SimModel::LocalLimit;
    const double eps = cfg.get_double("eps", 0.2);
    const rf::SimGrid grid = rf::SimGrid::make(cfg.get_double("Lx", 150.0), cfg.get_double("Ly", 30.0),
                                               cfg.get_double("dx", 0.25), cfg.get_double("dy", 0.25));
    rf::InitialDatum datum;
    datum.amplitude = cfg.get_double("datum_amplitude", 0.5);
    datum.amplitude_u = cfg.get_double("datum_amplitude_u", -1.0);
    datum.radius = cfg.get_double("datum_radius", 5.0);

    rf::RunOptions opts;
    opts.T = cfg.get_double("T", 10.0);
    opts.dt = cfg.get_double("dt", 0.0);
    opts.wall_guard = cfg.get_bool("wall_guard", true);
    const double snap = cfg.get_double("snapshot_every", 0.0);
    opts.observe_every = snap;
    if (snap > 0.0)
        opts.observer = [&](const rf::FieldState& s) {
            std::ostringstream tag;
            tag << "_t" << rf::format_g17(s.t);
            write_state_csv(s, out, tag.str());
        };

    const rf::RunResult res = rf::run(problem, model, eps, datum, grid, opts);
    write_state_csv(res.state, out, "");
    runtime["steps"] = std::to_string(res.steps);
    runtime["final_t"] = g17(res.state.t);
    runtime["wall_stopped"] = res.wall_stopped ? "true" : "false";
    runtime["min_guard_margin"] = g17(res.min_guard_margin);
    std::cout << "simulated to t=" << g17(res.state.t) << " in " << res.steps << " steps"
              << (res.wall_stopped ? " (stopped by the wall guard)" : "") << "\n";
    return kExitOk;
}

int cmd_converge(const rf::RunConfig& cfg, const std::filesystem::path& out) {
    const std::string exp = cfg.get_string("experiment", "speed");
    const rf::Problem problem = cfg.make_problem();
    std::ofstream md(out / ("converge_" + exp + ".md"));
    md << "# Convergence experiment: " << exp << "\n\n";
    bool verdict = true;

    if (exp == "speed") {
        const auto eps_list = cfg.get_list("eps_list", {0.4, 0.2, 0.1, 0.05});
        const auto table = rf::speed_convergence_experiment(problem.params, problem.kernels, eps_list);
        CsvFile csv(out / "converge_speed.csv", "eps,c_eps,gap");
        for (const auto& r : table.rows) csv.row({g17(r.eps), g17(r.c_eps), g17(r.gap)});
        verdict = table.monotone &&
                  (table.rows.empty() || table.rows.back().gap < 0.02 * table.c0);
        md << "c0 = " << g17(table.c0) << "\n\n| eps | c_eps | gap |\n|---|---|---|\n";
        for (const auto& r : table.rows)
            md << "| " << g17(r.eps) << " | " << g17(r.c_eps) << " | " << g17(r.gap) << " |\n";
        md << "\nMonotone gap decrease: " << (table.monotone ? "pass" : "FAIL") << "\n";
    } else if (exp == "stationary") {
        const auto eps_list = cfg.get_list("eps_list", {0.4, 0.2, 0.1, 0.05});
        const auto rows = rf::stationary_convergence_sweep(problem.params, problem.kernels,
                                                           problem.reaction, eps_list);
        CsvFile csv(out / "converge_stationary.csv", "eps,U,sup_dev,residual,iters,ok");
        double prev = std::numeric_limits<double>::infinity();
        md << "| eps | U | sup_dev |\n|---|---|---|\n";
        for (const auto& r : rows) {
            csv.row({g17(r.eps), g17(r.U), g17(r.sup_dev), g17(r.residual), std::to_string(r.iters),
                     r.ok ? "1" : "0"});
            md << "| " << g17(r.eps) << " | " << g17(r.U) << " | " << g17(r.sup_dev) << " |\n";
            if (!r.ok) verdict = false;
            if (rows.size() > 1 && problem.kernels.is_proportional()) continue; // exact case: all ~0
            if (prev != std::numeric_limits<double>::infinity() && !(r.sup_dev < prev)) verdict = false;
            prev = r.sup_dev;
        }
    } else if (exp == "solution") {
        const auto eps_list = cfg.get_list("eps_list", {0.2, 0.1, 0.05});
        const rf::SimGrid grid =
            rf::SimGrid::make(cfg.get_double("Lx", 20.0), cfg.get_double("Ly", 5.0),
                              cfg.get_double("dx", 0.05), cfg.get_double("dy", 0.00625));
        rf::InitialDatum datum;
        datum.amplitude = cfg.get_double("datum_amplitude", 0.5);
        datum.radius = cfg.get_double("datum_radius", 2.0);
        const auto table = rf::solution_convergence_experiment(
            problem, eps_list, cfg.get_double("t_sample", 1.0), grid, datum,
            cfg.get_double("dt", 0.0));
        CsvFile csv(out / "converge_solution.csv", "eps,du,dv");
        md << "| eps | du | dv |\n|---|---|---|\n";
        for (const auto& r : table.rows) {
            const std::string tag = r.eps ? g17(*r.eps) : "control";
            csv.row({tag, g17(r.du), g17(r.dv)});
            md << "| " << tag << " | " << g17(r.du) << " | " << g17(r.dv) << " |\n";
        }
        verdict = table.monotone;
        md << "\nMonotone decrease of du+dv: " << (verdict ? "pass" : "FAIL") << "\n";
    } else if (exp == "spreading") {
        const auto eps_list = cfg.get_list("eps_list", {0.2, 0.1});
        const rf::SimGrid grid =
            rf::SimGrid::make(cfg.get_double("Lx", 150.0), cfg.get_double("Ly", 6.0),
                              cfg.get_double("dx", 0.25), cfg.get_double("dy", 0.0125));
        const auto [c_bar, lambda_bar] = rf::envelope_speed(problem.params);
        (void)lambda_bar;
        const std::vector<double> probes = cfg.get_list(
            "c_probes", {0.5 * problem.params.c_kpp(), 1.5 * c_bar});
        rf::InitialDatum datum;
        datum.amplitude = cfg.get_double("datum_amplitude", 0.5);
        datum.radius = cfg.get_double("datum_radius", 5.0);
        const auto table = rf::uniform_spreading_experiment(
            problem, eps_list, probes, datum, cfg.get_double("T", 120.0), grid,
            cfg.get_double("dt", 0.0125), cfg.get_double("eta", 0.05));
        CsvFile csv(out / "converge_spreading.csv", "eps,c,supercritical,value,vacuous");
        md << "c0 = " << g17(table.c0) << ", m = " << g17(table.m) << ", eta = " << g17(table.eta)
           << "\n\n| eps | c | kind | value |\n|---|---|---|---|\n";
        for (const auto& p : table.probes) {
            csv.row({g17(p.eps), g17(p.c), p.supercritical ? "1" : "0", g17(p.value),
                     p.vacuous ? "1" : "0"});
            md << "| " << g17(p.eps) << " | " << g17(p.c) << " | "
               << (p.supercritical ? "outer sup" : "inner deviation") << " | " << g17(p.value)
               << " |\n";
        }
        verdict = table.verdict;
    } else {
        throw rf::UsageError("experiment must be speed|stationary|solution|spreading");
    }

    md << "\nVerdict: " << (verdict ? "PASS" : "FAIL") << "\n";
    std::cout << "experiment " << exp << ": " << (verdict ? "PASS" : "FAIL") << "\n";
    return verdict ? kExitOk : kExitVerdict;
}

} // namespace

int main(int argc, char** argv) {
    Cli cli;
    try {
        cli = parse_cli(argc, argv);
    } catch (const rf::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        print_usage(std::cerr);
        return kExitUsage;
    }
    if (cli.help) {
        if (cli.subcommand.empty() || cli.subcommand == "--help" || cli.subcommand == "-h")
            print_usage(std::cout);
        else
            print_subcommand_help(cli.subcommand);
        return kExitOk;
    }

    try {
        const rf::RunConfig cfg = rf::parse_config(cli.config_file, cli.overrides);
        const int threads = cfg.get_int("threads", 1);
        if (threads < 1) throw rf::UsageError("threads must be >= 1");
        std::filesystem::path out = cfg.get_string("out_dir", cli.out_dir);
        std::filesystem::create_directories(out);

        const auto start = std::chrono::steady_clock::now();
        std::map<std::string, std::string> runtime;
        int code = kExitOk;
        try {
            if (cli.subcommand == "speed")
                code = cmd_speed(cfg, out);
            else if (cli.subcommand == "stationary")
                code = cmd_stationary(cfg, out);
            else if (cli.subcommand == "simulate")
                code = cmd_simulate(cfg, out, runtime);
            else
                code = cmd_converge(cfg, out);
        } catch (const rf::NumericalFailure& e) {
            std::ofstream diag(out / "diagnostics.txt");
            diag << "numerical failure in subcommand '" << cli.subcommand << "'\n" << e.what() << "\n";
            throw;
        }

        const auto end = std::chrono::steady_clock::now();
        runtime["wall_seconds"] =
            rf::format_g17(std::chrono::duration<double>(end - start).count());
        runtime["subcommand"] = cli.subcommand;
        rf::RunConfig echo = cfg;
        echo.values["out_dir"] = out.string();
        rf::write_manifest((out / "manifest.json").string(), echo, runtime);
        return code;
    } catch (const rf::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const rf::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
