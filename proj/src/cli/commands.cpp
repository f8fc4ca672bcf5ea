#include "posfix/cli.hpp"
#include "posfix/error.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <ostream>
#include <sstream>

namespace posfix::cli {

namespace {

// Writes through a temporary sibling so a failed run never leaves a partial file.
void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InvalidInputError(fmt::format("{}: cannot write file", path.string()));
        out << content;
        if (!out) throw InvalidInputError(fmt::format("{}: write failed", path.string()));
    }
    fs::rename(tmp, path);
}

fs::path output_dir(const GlobalOptions& g, const RunConfig& cfg) {
    fs::path dir = g.out ? *g.out : cfg.out_dir;
    fs::create_directories(dir);
    return dir;
}

std::string equilibrium_text(const StateVector& x, int digits) {
    std::string s = "label,value\n";
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        s += x.labels()[static_cast<std::size_t>(j)] + "," + format_number(x.values()(j), digits) + "\n";
    }
    return s;
}

std::string outcomes_text(const trade::Outcomes& o, int digits) {
    std::string s;
    for (const auto& [k, v] : o.flatten()) s += k + ": " + format_number(v, digits) + "\n";
    return s;
}

std::string trace_text(const std::vector<TraceRow>& trace) {
    std::ostringstream os;
    write_trace_csv(os, trace);
    return os.str();
}

// Runs body and maps every failure to one exit code.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ModelEvaluationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolve;
    } catch (const StaleStateError& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolve;
    } catch (const BudgetExceededError& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolve;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (...) {
        err << "error: unknown failure\n";
        return kExitInput;
    }
}

RunConfig require_config(const GlobalOptions& g) {
    if (g.config.empty()) throw InvalidInputError("--config is required for this command");
    return load_config(g.config);
}

SolveOptions solve_options(const RunConfig& cfg) {
    return cfg.solve;
}

}  // namespace

int run_certify(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = require_config(g);
        // Connectivity is a certified condition here, not an input error.
        const trade::TradeModel model = load_parameters(cfg, false);
        const PositiveSystem sys = trade::build_system(model);
        CertifyOptions opts = cfg.certify;
        if (g.seed) opts.seed = *g.seed;
        opts.threads = g.threads;
        const CertificationReport report = certify(sys, opts);
        const fs::path dir = output_dir(g, cfg);
        write_atomic(dir / "report.txt", serialize_report(report, cfg.print_digits));
        const int code = certify_exit_code(report);
        if (code != kExitOk) {
            for (const auto* c : {&report.connectedness, &report.self_interaction, &report.scaling, &report.monotonicity}) {
                if (!c->ok()) err << "condition failed: " << c->detail << '\n';
            }
        }
        if (!g.quiet) {
            out << fmt::format("certify: {} mode {}; connectedness {}, self-interaction {}, scaling {}, monotonicity {}; report {}\n",
                               sys.name(), to_string(report.mode), to_string(report.connectedness.verdict),
                               to_string(report.self_interaction.verdict), to_string(report.scaling.verdict),
                               to_string(report.monotonicity.verdict), (dir / "report.txt").string());
        }
        return code;
    });
}

int run_solve(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = require_config(g);
        const trade::TradeModel model = load_parameters(cfg);
        std::optional<StateVector> x0;
        if (g.seed) x0 = draw_samples(trade::build_system(model), 1, *g.seed).front();
        const trade::ModelSolution sol = trade::solve_model(model, solve_options(cfg), x0);
        const fs::path dir = output_dir(g, cfg);
        write_atomic(dir / "trace.csv", trace_text(sol.solve.trace));
        if (sol.solve.status != SolveStatus::converged) {
            err << fmt::format("solve: {} after {} iterations: {}\n", to_string(sol.solve.status), sol.solve.iterations,
                               sol.solve.message);
            return kExitSolve;
        }
        write_atomic(dir / "equilibrium.csv", equilibrium_text(sol.solve.x_star, cfg.print_digits));
        write_atomic(dir / "outcomes.txt", outcomes_text(*sol.outcomes, cfg.print_digits));
        if (!g.quiet) {
            out << fmt::format("solve: converged in {} iterations, residual {:.3g}; wrote {}\n", sol.solve.iterations,
                               sol.solve.residual, dir.string());
        }
        return kExitOk;
    });
}

int run_counterfactual(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = require_config(g);
        if (g.shock.empty()) throw InvalidInputError("--shock is required for counterfactual");
        const trade::TradeModel model = load_parameters(cfg);
        const trade::Shock shock = read_shock(g.shock);
        // Rejects shocks that break an invariant before any solving.
        (void)trade::apply_shock(model, shock);
        const trade::CounterfactualResult r = trade::counterfactual(model, shock, solve_options(cfg));
        for (const auto* s : {&r.base, &r.shocked}) {
            if (s->solve.status != SolveStatus::converged) {
                err << fmt::format("counterfactual: {} solve {} after {} iterations: {}\n", s == &r.base ? "baseline" : "shocked",
                                   to_string(s->solve.status), s->solve.iterations, s->solve.message);
                return kExitSolve;
            }
        }
        std::string table = "key,base,shocked,relative_change\n";
        for (const auto& c : r.changes) {
            table += fmt::format("{},{},{},{}\n", c.key, format_number(c.base, cfg.print_digits),
                                 format_number(c.shocked, cfg.print_digits), format_number(c.relative_change, cfg.print_digits));
        }
        const fs::path dir = output_dir(g, cfg);
        write_atomic(dir / "counterfactual.csv", table);
        if (!g.quiet) out << fmt::format("counterfactual: {} outcomes compared; wrote {}\n", r.changes.size(), dir.string());
        return kExitOk;
    });
}

int run_report(const GlobalOptions& g, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (g.report.empty()) throw InvalidInputError("report: a report file is required");
        std::ifstream in(g.report);
        if (!in) throw InvalidInputError(fmt::format("{}: cannot open file", g.report.string()));
        out << pretty_report(parse_report(in, g.report.string()));
        return kExitOk;
    });
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Certify and solve positive fixed-point systems and built-in trade models"};
    app.require_subcommand(1);
    GlobalOptions g;
    std::string config, out_dir, shock, report;
    std::uint64_t seed = 0;
    app.add_option("--config", config, "configuration file");
    app.add_option("--out", out_dir, "output directory (default: out/ next to the configuration)");
    auto* seed_opt = app.add_option("--seed", seed, "certify: sampling seed; solve: seed for a random start");
    app.add_flag("--quiet", g.quiet, "suppress the summary line");
    app.add_option("--threads", g.threads, "worker threads for certification")->check(CLI::Range(1u, 256u));

    auto* certify_cmd = app.add_subcommand("certify", "check the structural conditions and write report.txt")->fallthrough();
    auto* solve_cmd = app.add_subcommand("solve", "solve for the normalized equilibrium")->fallthrough();
    auto* cf_cmd = app.add_subcommand("counterfactual", "solve baseline and shocked models and compare outcomes")->fallthrough();
    cf_cmd->add_option("--shock", shock, "shock file")->required();
    auto* report_cmd = app.add_subcommand("report", "pretty-print an existing report")->fallthrough();
    report_cmd->add_option("file", report, "report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    g.config = config;
    if (!out_dir.empty()) g.out = fs::path(out_dir);
    if (seed_opt->count() > 0) g.seed = seed;
    g.shock = shock;
    g.report = report;

    if (certify_cmd->parsed()) return run_certify(g, out, err);
    if (solve_cmd->parsed()) return run_solve(g, out, err);
    if (cf_cmd->parsed()) return run_counterfactual(g, out, err);
    return run_report(g, out, err);
}

}  // namespace posfix::cli
