// omotto — feedback-controlled optomechanical cavity as a polariton Otto
// engine: steady states, polariton spectra, cycle ledgers, parameter sweeps.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "omotto/cli.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int threads = -1;
    std::string formats;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "path to the run configuration file")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (default: config output.directory)");
    cmd->add_option("--threads", args.threads, "worker threads for sweeps (0 = all cores)");
    cmd->add_option("--format", args.formats, "output formats, e.g. csv,json");
}

omotto::RunConfig load(const CommonArgs& args) {
    omotto::RunConfig rc = omotto::load_run_config_file(args.config_path);
    if (args.threads >= 0) {
        rc.output.threads = args.threads;
        if (rc.sweep) rc.sweep->threads = args.threads;
    }
    if (!args.formats.empty()) {
        rc.output.write_csv = args.formats.find("csv") != std::string::npos;
        rc.output.write_json = args.formats.find("json") != std::string::npos;
        if (!rc.output.write_csv && !rc.output.write_json) {
            throw omotto::InvalidParameter("--format must mention csv and/or json");
        }
    }
    return rc;
}

std::filesystem::path out_dir(const CommonArgs& args, const omotto::RunConfig& rc) {
    return args.out_dir.empty() ? std::filesystem::path(rc.output.directory)
                                : std::filesystem::path(args.out_dir);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"polariton-based optomechanical Otto engine simulator"};
    app.require_subcommand(1);

    CommonArgs steady_args, polariton_args, cycle_args, sweep_args, check_args;
    CLI::App* steady = app.add_subcommand("steady", "steady state at delta_i");
    add_common(steady, steady_args);
    CLI::App* polariton = app.add_subcommand("polariton", "polariton spectrum scan");
    add_common(polariton, polariton_args);
    CLI::App* cycle = app.add_subcommand("cycle", "full-dynamics Otto cycle");
    add_common(cycle, cycle_args);
    CLI::App* sweep = app.add_subcommand("sweep", "parameter-grid sweep");
    add_common(sweep, sweep_args);
    CLI::App* check = app.add_subcommand("check", "validate configuration and hierarchy");
    add_common(check, check_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (steady->parsed()) {
            const auto rc = load(steady_args);
            return omotto::cmd_steady(rc, out_dir(steady_args, rc));
        }
        if (polariton->parsed()) {
            const auto rc = load(polariton_args);
            return omotto::cmd_polariton(rc, out_dir(polariton_args, rc));
        }
        if (cycle->parsed()) {
            const auto rc = load(cycle_args);
            return omotto::cmd_cycle(rc, out_dir(cycle_args, rc));
        }
        if (sweep->parsed()) {
            const auto rc = load(sweep_args);
            return omotto::cmd_sweep(rc, out_dir(sweep_args, rc));
        }
        const auto rc = load(check_args);
        return omotto::cmd_check(rc, out_dir(check_args, rc));
    } catch (const omotto::InvalidParameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const omotto::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
