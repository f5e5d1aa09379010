#include "proxopt/bench.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace proxopt;

int main(int argc, char** argv)
{
    CLI::App app{"proximal solver benchmarks"};
    app.require_subcommand(1);

    std::string config, out;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config, "TOML configuration")->required();
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) {
        seed = s;
        seed_set = true;
    }, "random seed");

    // global options may also follow the subcommand
    app.fallthrough();
    app.add_subcommand("groundtruth", "compute and store the reference image");
    app.add_subcommand("bench", "run every configured solver against the reference");
    app.add_subcommand("denoise", "single ROF denoising run");
    app.add_subcommand("lasso", "single LASSO run");
    app.add_subcommand("pet", "single PET reconstruction run");
    app.add_subcommand("pwls", "single PWLS reconstruction run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig rc = load_config(config);
        if (!out.empty()) rc.out_dir = out;
        if (threads > 0) rc.threads = threads;
        if (seed_set) rc.seed = seed;

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "groundtruth") {
            const auto files = cmd_groundtruth(rc);
            std::cout << files.image_path << " sha256 " << files.digest << "\n";
        } else if (cmd == "bench") {
            std::cout << cmd_bench(rc).table();
        } else {
            const auto res = cmd_single(rc, cmd);
            const auto& last = res.record.rows.back();
            std::cout << cmd << ": " << last.iter << " iterations, objective " << last.objective << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const DigestMismatch& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
