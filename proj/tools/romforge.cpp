// romforge: snapshot generation, surrogate training, prediction, cross-validation and plots.

#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "romforge/cli/commands.hpp"

namespace {

const char* kExitCodes =
    "Exit codes: 0 success, 1 other error, 2 argument error, 3 format error,\n"
    "4 convergence error, 5 training error, 6 I/O error, 7 numerical error.";

}  // namespace

int main(int argc, char** argv) {
    using namespace romforge::cli;
    CLI::App app{"Reduced-order modelling toolkit: POD-GPR and CAE-GPR surrogates"};
    app.footer(kExitCodes);
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;

    using Command = std::function<int(const Options&, std::ostream&)>;
    std::map<CLI::App*, Command> commands;
    auto add = [&](const std::string& name, const std::string& help, Command fn) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "run configuration (key = value)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the configured seed");
        commands[sub] = std::move(fn);
        return sub;
    };

    auto* gen = add("generate", "solve the cavity over an LHS design and write snapshots", cmd_generate);
    gen->add_option("--out", o.out, "snapshot file");
    gen->add_flag("--allow-partial", o.allow_partial, "keep converged solves when some fail");

    auto* train = add("train", "build a surrogate from a snapshot file", cmd_train);
    train->add_option("--method", o.method, "pod-gpr or cae-gpr")->check(CLI::IsMember({"pod-gpr", "cae-gpr"}));
    train->add_option("--k", o.k, "reduced dimension");
    train->add_option("--data", o.data, "snapshot file");
    train->add_option("--out", o.out, "surrogate file");

    auto* pred = add("predict", "evaluate a surrogate at new design points", cmd_predict);
    pred->add_option("--surrogate", o.surrogate, "surrogate file");
    pred->add_option("--mu", o.mu, "one design point, comma separated");
    pred->add_option("--design", o.design, "design table of query points");
    pred->add_option("--out", o.out, "prediction snapshot file");

    auto* eval = add("evaluate", "five-fold cross-validation of the configured methods", cmd_evaluate);
    eval->add_option("--method", o.method, "restrict to pod-gpr or cae-gpr")->check(CLI::IsMember({"pod-gpr", "cae-gpr"}));
    eval->add_option("--k", o.k, "k list, e.g. 5,10 or 1:35 or 5:35:5");
    eval->add_option("--data", o.data, "snapshot file");
    eval->add_option("--out", o.out, "report CSV");

    auto* plot = add("plot", "SVG error curves from a report CSV", cmd_plot);
    plot->add_option("--report", o.report, "report CSV");
    plot->add_option("--out", o.out, "output prefix");

    auto* imp = add("import", "build a snapshot file from per-channel CSV files", cmd_import);
    imp->add_option("--csv", o.csv, "channel CSV file (repeat per channel)");
    imp->add_option("--grid", o.grid, "NYxNX of structured data");
    imp->add_option("--out", o.out, "snapshot file");

    auto* exp = add("export", "write per-channel CSV files from a snapshot file", cmd_export);
    exp->add_option("--data", o.data, "snapshot file");
    exp->add_option("--out", o.out, "output prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kArgumentError;
    }

    for (const auto& [sub, fn] : commands) {
        if (!sub->parsed()) continue;
        if (sub->count("--seed")) o.seed = seed;
        try {
            return fn(o, std::cout);
        } catch (const std::exception& e) {
            std::cerr << "romforge " << sub->get_name() << ": " << e.what() << "\n";
            return exit_code_for(e);
        }
    }
    return kOtherError;
}
