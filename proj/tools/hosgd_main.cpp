#include <string>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/verify.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hosgd: hybrid-order distributed SGD simulation lab"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string out_dir;
    int jobs = 1;
    CLI::App* run = app.add_subcommand("run", "execute the runs in an experiment spec");
    run->add_option("spec", spec_path, "experiment spec (TOML subset)")->required();
    run->add_option("--jobs", jobs, "number of runs to execute concurrently")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "output directory (overrides the spec)");

    bool full = false;
    CLI::App* verify = app.add_subcommand("verify", "run the invariant property suites");
    verify->add_flag("--full", full, "use the 10^5-sample Monte-Carlo level");

    std::string bound_path;
    CLI::App* bound = app.add_subcommand("bound", "evaluate the convergence bound");
    bound->add_option("config", bound_path, "bound config (TOML subset)")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return hosgd::cli::cmd_run(spec_path, out_dir, jobs);
    if (verify->parsed()) return hosgd::cli::cmd_verify(full);
    return hosgd::cli::cmd_bound(bound_path);
}
