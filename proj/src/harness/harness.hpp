#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mtbo::harness {

/// One problem entry of an experiment spec. Built-in defaults: sphere lives
/// on [-10, 10]^dim, the standard functions on [-5, 5]^dim.
struct ProblemSpec {
    std::string name;   // sphere | rastrigin | rosenbrock | griewank_rosenbrock |
                        // lunacek | sharp_ridge
    std::string label;  // unique; defaults to name
    int dim = 2;
    std::vector<double> x_star;  // sphere only
    std::vector<double> shift;   // standard functions; empty = derived from seed
    std::uint64_t problem_seed = 0;
    std::optional<std::uint64_t> family_seed;
    std::vector<double> lower, upper;       // empty = defaults
    std::vector<std::string> sources;       // task ids resolved via the manifest
};

struct MethodSpec {
    std::string label;  // unique; defaults to method
    std::string method = "mcts_transfer";
    double gamma = 0.99;
    double cp = 0.1;
    int theta = 10;
    std::string similarity_measure = "best_n_mean";
    int similarity_n = 5;
    double similarity_percent = 0.30;
    std::string weight_strategy = "linear";
    double alpha = 0.5;
    double beta = 0.5;
    int kl_mc_samples = 1024;
    int similarity_interval = 1;
    bool normalize_objectives = true;
    bool cluster_with_objective = true;
    std::string classifier = "logistic_regression";
    bool local_gp = false;
    bool strict_literal_ucb = false;
    int init_points = 5;
};

struct ExperimentSpec {
    std::vector<ProblemSpec> problems;
    std::vector<MethodSpec> methods;
    std::string source_manifest;  // optional, resolved relative to the spec file
    std::vector<std::uint64_t> seeds;
    int budget = 100;
    std::string output_dir;  // optional, CLI --out overrides
};

ExperimentSpec load_spec(const std::string& path);

/// Structural validation plus manifest/dataset resolution. Returns the
/// problems' error messages; empty means the spec is runnable.
std::vector<std::string> validate_spec(const ExperimentSpec& spec);

struct ManifestEntry {
    std::string task_id;
    ProblemSpec problem;  // sources field unused
    std::string sampler = "random";
    int n = 100;
    std::uint64_t seed = 0;
    std::string path;  // dataset file, relative to the manifest
};

std::vector<ManifestEntry> load_manifest(const std::string& path);

/// gen-data: generates every dataset listed in the manifest through the C
/// API and writes the JSONL files next to it.
void generate_manifest_datasets(const std::string& manifest_path);

struct RunOutcome {
    std::string problem;
    std::string method;
    std::uint64_t seed = 0;
    std::string sense;  // "min" | "max"
    std::string status; // ok | aborted | failed
    std::string error;
    std::vector<double> incumbents;  // original sense, per iteration
    std::vector<std::string> task_ids;
    std::vector<std::vector<double>> weights;  // [iteration][task]
    std::string trace_csv, trace_json;
};

struct ExperimentResult {
    std::vector<RunOutcome> runs;
    int failures = 0;
    std::string summary_path;
};

/// Executes |problems| x |methods| x |seeds| runs on a bounded worker pool,
/// writes one trace CSV/JSON pair per run, summary.csv and
/// run_manifest.json under out_dir. Failed runs are logged and marked in
/// the summary; the rest proceed.
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                int workers = 0, std::uint64_t seed_offset = 0);

struct RankRow {
    std::string method;
    int iter = 0;
    double mean_rank = 0.0;
    double std_rank = 0.0;
    int count = 0;
};

/// Mean rank (1 = best, ties averaged) per method per evaluation index
/// across problems x seeds, from summary.csv. Requires >= 2 methods.
std::vector<RankRow> aggregate_ranks(const std::string& out_dir);

/// Best-value curves per problem, the rank curve, and weight trajectories,
/// as SVG charts plus the backing CSVs. Returns the written file names.
std::vector<std::string> emit_plots(const std::string& out_dir);

}  // namespace mtbo::harness
