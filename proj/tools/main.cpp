// mtbo command-line interface: experiment execution, dataset generation,
// rank aggregation and plotting on top of the shared-library C API.
//
// Exit codes: 0 success, 1 validation error, 2 partial run failures.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"transfer Bayesian optimization benchmark harness"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, manifest_path;
    int workers = 0;
    std::uint64_t seed_offset = 0;

    auto* run = app.add_subcommand("run", "execute every problem x method x seed in a spec");
    run->add_option("--spec", spec_path, "experiment spec (JSON)")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--workers", workers, "worker pool size (default: available cores)");
    run->add_option("--seed-offset", seed_offset, "added to every seed in the spec");

    auto* aggregate = app.add_subcommand("aggregate", "mean ranks per method from summary.csv");
    aggregate->add_option("--out", out_dir, "experiment output directory")->required();

    auto* plot = app.add_subcommand("plot", "SVG charts (best value, ranks, weights)");
    plot->add_option("--out", out_dir, "experiment output directory")->required();

    auto* gen = app.add_subcommand("gen-data", "generate the datasets listed in a manifest");
    gen->add_option("--manifest", manifest_path, "dataset manifest (JSON)")->required();

    auto* validate = app.add_subcommand("validate", "check a spec without running it");
    validate->add_option("--spec", spec_path, "experiment spec (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto spec = mtbo::harness::load_spec(spec_path);
            const std::string out = !out_dir.empty() ? out_dir
                                    : !spec.output_dir.empty()
                                        ? spec.output_dir
                                        : throw std::invalid_argument(
                                              "no output directory (--out or spec output_dir)");
            const auto result = mtbo::harness::run_experiment(spec, out, workers, seed_offset);
            std::cout << result.runs.size() << " runs, " << result.failures << " failed\n"
                      << "summary: " << result.summary_path << "\n";
            return result.failures > 0 ? 2 : 0;
        }
        if (aggregate->parsed()) {
            const auto rows = mtbo::harness::aggregate_ranks(out_dir);
            std::cout << "wrote " << out_dir << "/ranks.csv (" << rows.size() << " rows)\n";
            return 0;
        }
        if (plot->parsed()) {
            for (const auto& line : mtbo::harness::emit_plots(out_dir))
                std::cout << line << "\n";
            return 0;
        }
        if (gen->parsed()) {
            mtbo::harness::generate_manifest_datasets(manifest_path);
            std::cout << "datasets written per " << manifest_path << "\n";
            return 0;
        }
        if (validate->parsed()) {
            const auto spec = mtbo::harness::load_spec(spec_path);
            const auto errors = mtbo::harness::validate_spec(spec);
            if (errors.empty()) {
                std::cout << "spec ok: " << spec.problems.size() << " problems, "
                          << spec.methods.size() << " methods, " << spec.seeds.size()
                          << " seeds\n";
                return 0;
            }
            for (const auto& e : errors) std::cerr << "error: " << e << "\n";
            return 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
