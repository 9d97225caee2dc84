#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "mtbo.h"
#include "svg.hpp"

namespace mtbo::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

struct ProblemDeleter {
    void operator()(mtbo_problem* p) const { mtbo_problem_free(p); }
};
struct DatasetDeleter {
    void operator()(mtbo_dataset* d) const { mtbo_dataset_free(d); }
};
struct ResultDeleter {
    void operator()(mtbo_result* r) const { mtbo_result_free(r); }
};
using ProblemHandle = std::unique_ptr<mtbo_problem, ProblemDeleter>;
using DatasetHandle = std::unique_ptr<mtbo_dataset, DatasetDeleter>;
using ResultHandle = std::unique_ptr<mtbo_result, ResultDeleter>;

ProblemSpec parse_problem(const json& j) {
    ProblemSpec p;
    p.name = j.at("name").get<std::string>();
    p.dim = j.value("dim", 2);
    p.label = j.value("label", p.name);
    if (j.contains("x_star")) p.x_star = j.at("x_star").get<std::vector<double>>();
    if (j.contains("shift")) p.shift = j.at("shift").get<std::vector<double>>();
    p.problem_seed = j.value("problem_seed", 0ULL);
    if (j.contains("family_seed")) p.family_seed = j.at("family_seed").get<std::uint64_t>();
    if (j.contains("lower")) p.lower = j.at("lower").get<std::vector<double>>();
    if (j.contains("upper")) p.upper = j.at("upper").get<std::vector<double>>();
    if (j.contains("sources")) p.sources = j.at("sources").get<std::vector<std::string>>();
    return p;
}

MethodSpec parse_method_spec(const json& j) {
    MethodSpec m;
    m.method = j.at("method").get<std::string>();
    m.label = j.value("label", m.method);
    m.gamma = j.value("gamma", m.gamma);
    m.cp = j.value("cp", m.cp);
    m.theta = j.value("theta", m.theta);
    if (j.contains("similarity")) {
        const json& s = j.at("similarity");
        m.similarity_measure = s.value("measure", m.similarity_measure);
        m.similarity_n = s.value("n", m.similarity_n);
        m.similarity_percent = s.value("percent", m.similarity_percent);
        m.weight_strategy = s.value("strategy", m.weight_strategy);
        m.alpha = s.value("alpha", m.alpha);
        m.beta = s.value("beta", m.beta);
        m.kl_mc_samples = s.value("kl_mc_samples", m.kl_mc_samples);
        m.similarity_interval = s.value("recompute_interval", m.similarity_interval);
    }
    m.normalize_objectives = j.value("normalize_objectives", m.normalize_objectives);
    m.cluster_with_objective = j.value("cluster_with_objective", m.cluster_with_objective);
    m.classifier = j.value("classifier", m.classifier);
    m.local_gp = j.value("local_gp", m.local_gp);
    m.strict_literal_ucb = j.value("strict_literal_ucb", m.strict_literal_ucb);
    m.init_points = j.value("init_points", m.init_points);
    return m;
}

/// Builds a problem handle; throws with the C API error text on failure.
ProblemHandle build_problem(const ProblemSpec& spec) {
    std::vector<double> lower = spec.lower, upper = spec.upper;
    const double def = spec.name == "sphere" ? 10.0 : 5.0;
    if (lower.empty()) lower.assign(spec.dim, -def);
    if (upper.empty()) upper.assign(spec.dim, def);
    if (static_cast<int>(lower.size()) != spec.dim || static_cast<int>(upper.size()) != spec.dim)
        throw std::runtime_error("problem '" + spec.label + "': bounds dimension mismatch");

    mtbo_problem* raw = nullptr;
    mtbo_status st;
    if (spec.name == "sphere") {
        if (static_cast<int>(spec.x_star.size()) != spec.dim)
            throw std::runtime_error("problem '" + spec.label + "': sphere needs x_star[dim]");
        st = mtbo_problem_sphere(spec.dim, spec.x_star.data(), lower.data(), upper.data(), &raw);
    } else {
        st = mtbo_problem_standard(spec.name.c_str(), spec.dim,
                                   spec.shift.empty() ? nullptr : spec.shift.data(),
                                   spec.problem_seed, lower.data(), upper.data(), &raw);
    }
    if (st != MTBO_OK)
        throw std::runtime_error("problem '" + spec.label + "': " + mtbo_last_error());
    ProblemHandle handle(raw);
    if (spec.family_seed) {
        mtbo_problem* fam = nullptr;
        if (mtbo_problem_family(handle.get(), *spec.family_seed, &fam) != MTBO_OK)
            throw std::runtime_error("problem '" + spec.label + "': " + mtbo_last_error());
        handle.reset(fam);
    }
    return handle;
}

mtbo_run_options build_options(const MethodSpec& m, int budget, std::uint64_t seed) {
    mtbo_run_options o;
    mtbo_run_options_init(&o);
    o.method = m.method.c_str();
    o.budget = budget;
    o.seed = seed;
    o.gamma = m.gamma;
    o.cp = m.cp;
    o.theta = m.theta;
    o.similarity_measure = m.similarity_measure.c_str();
    o.similarity_n = m.similarity_n;
    o.similarity_percent = m.similarity_percent;
    o.weight_strategy = m.weight_strategy.c_str();
    o.alpha = m.alpha;
    o.beta = m.beta;
    o.kl_mc_samples = m.kl_mc_samples;
    o.similarity_interval = m.similarity_interval;
    o.normalize_objectives = m.normalize_objectives ? 1 : 0;
    o.cluster_with_objective = m.cluster_with_objective ? 1 : 0;
    o.classifier = m.classifier.c_str();
    o.local_gp = m.local_gp ? 1 : 0;
    o.strict_literal_ucb = m.strict_literal_ucb ? 1 : 0;
    o.init_points = m.init_points;
    return o;
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

Csv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    Csv csv;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            csv.header = std::move(cells);
            first = false;
        } else {
            csv.rows.push_back(std::move(cells));
        }
    }
    return csv;
}

/// Average ranks with tie averaging; best (per `minimize`) gets rank 1.
std::vector<double> rank_values(const std::vector<double>& values, bool minimize) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return minimize ? values[a] < values[b] : values[a] > values[b];
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec: " + path);
    json j = json::parse(in);

    ExperimentSpec spec;
    for (const auto& p : j.at("problems")) spec.problems.push_back(parse_problem(p));
    for (const auto& m : j.at("methods")) spec.methods.push_back(parse_method_spec(m));
    spec.budget = j.value("budget", 100);
    if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    spec.output_dir = j.value("output_dir", "");
    if (j.contains("source_manifest")) {
        const fs::path manifest = j.at("source_manifest").get<std::string>();
        spec.source_manifest =
            manifest.is_absolute() ? manifest.string()
                                   : (fs::path(path).parent_path() / manifest).string();
    }
    return spec;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    json j = json::parse(in);
    std::vector<ManifestEntry> entries;
    for (const auto& e : j.at("datasets")) {
        ManifestEntry entry;
        entry.task_id = e.at("task_id").get<std::string>();
        entry.problem = parse_problem(e.at("problem"));
        entry.sampler = e.value("sampler", "random");
        entry.n = e.value("n", 100);
        entry.seed = e.value("seed", 0ULL);
        const fs::path p = e.at("path").get<std::string>();
        entry.path = p.is_absolute() ? p.string() : (fs::path(path).parent_path() / p).string();
        entries.push_back(std::move(entry));
    }
    return entries;
}

void generate_manifest_datasets(const std::string& manifest_path) {
    for (const auto& entry : load_manifest(manifest_path)) {
        const ProblemHandle problem = build_problem(entry.problem);
        mtbo_dataset* raw = nullptr;
        if (mtbo_dataset_generate(problem.get(), entry.sampler.c_str(), entry.n, entry.seed,
                                  entry.task_id.c_str(), &raw) != MTBO_OK)
            throw std::runtime_error("gen-data '" + entry.task_id + "': " + mtbo_last_error());
        DatasetHandle ds(raw);
        fs::create_directories(fs::path(entry.path).parent_path());
        if (mtbo_dataset_save(ds.get(), entry.path.c_str()) != MTBO_OK)
            throw std::runtime_error("gen-data '" + entry.task_id + "': " + mtbo_last_error());
    }
}

std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
    std::vector<std::string> errors;
    if (spec.problems.empty()) errors.push_back("spec has no problems");
    if (spec.methods.empty()) errors.push_back("spec has no methods");
    if (spec.seeds.empty()) errors.push_back("spec has no seeds");
    if (spec.budget < 1) errors.push_back("budget must be >= 1");

    std::set<std::string> labels;
    for (const auto& p : spec.problems)
        if (!labels.insert(p.label).second)
            errors.push_back("duplicate problem label: " + p.label);
    labels.clear();
    for (const auto& m : spec.methods) {
        if (!labels.insert(m.label).second) errors.push_back("duplicate method label: " + m.label);
        static const std::set<std::string> known{"mcts_transfer", "gp_ei", "la_mcts", "box_gp",
                                                 "ellipsoid_gp"};
        if (!known.count(m.method)) errors.push_back("unknown method: " + m.method);
    }

    std::map<std::string, ManifestEntry> manifest;
    if (!spec.source_manifest.empty()) {
        try {
            for (auto& e : load_manifest(spec.source_manifest)) manifest[e.task_id] = e;
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }

    for (const auto& p : spec.problems) {
        try {
            const ProblemHandle handle = build_problem(p);
            for (const auto& task : p.sources) {
                auto it = manifest.find(task);
                if (it == manifest.end()) {
                    errors.push_back("problem '" + p.label + "' references unknown dataset '" +
                                     task + "'");
                    continue;
                }
                mtbo_dataset* raw = nullptr;
                if (mtbo_dataset_load(it->second.path.c_str(), &raw) != MTBO_OK) {
                    errors.push_back("dataset '" + task + "': " + mtbo_last_error());
                    continue;
                }
                DatasetHandle ds(raw);
                if (mtbo_dataset_dim(ds.get()) != p.dim)
                    errors.push_back("dataset '" + task + "' dimension disagrees with problem '" +
                                     p.label + "'");
            }
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }

    const bool needs_sources = std::any_of(
        spec.methods.begin(), spec.methods.end(), [](const MethodSpec& m) {
            return m.method == "box_gp" || m.method == "ellipsoid_gp";
        });
    if (needs_sources)
        for (const auto& p : spec.problems)
            if (p.sources.empty())
                errors.push_back("problem '" + p.label +
                                 "' has no source datasets but a region method needs them");
    return errors;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                int workers, std::uint64_t seed_offset) {
    const auto errors = validate_spec(spec);
    if (!errors.empty()) {
        std::string msg = "spec validation failed:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::invalid_argument(msg);
    }
    fs::create_directories(out_dir);

    std::map<std::string, ManifestEntry> manifest;
    if (!spec.source_manifest.empty())
        for (auto& e : load_manifest(spec.source_manifest)) manifest[e.task_id] = e;

    // problems and datasets are built once and shared read-only
    std::vector<ProblemHandle> problems;
    std::map<std::string, DatasetHandle> datasets;
    for (const auto& p : spec.problems) {
        problems.push_back(build_problem(p));
        for (const auto& task : p.sources) {
            if (datasets.count(task)) continue;
            mtbo_dataset* raw = nullptr;
            if (mtbo_dataset_load(manifest.at(task).path.c_str(), &raw) != MTBO_OK)
                throw std::runtime_error("dataset '" + task + "': " + mtbo_last_error());
            datasets.emplace(task, DatasetHandle(raw));
        }
    }

    struct RunJob {
        std::size_t problem_idx;
        std::size_t method_idx;
        std::uint64_t seed;
    };
    std::vector<RunJob> jobs;
    for (std::size_t pi = 0; pi < spec.problems.size(); ++pi)
        for (std::size_t mi = 0; mi < spec.methods.size(); ++mi)
            for (std::uint64_t seed : spec.seeds) jobs.push_back({pi, mi, seed + seed_offset});

    ExperimentResult result;
    result.runs.resize(jobs.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const RunJob& job = jobs[i];
            const ProblemSpec& pspec = spec.problems[job.problem_idx];
            const MethodSpec& mspec = spec.methods[job.method_idx];
            RunOutcome& out = result.runs[i];
            out.problem = pspec.label;
            out.method = mspec.label;
            out.seed = job.seed;

            const std::string base = sanitize(pspec.label) + "_" + sanitize(mspec.label) +
                                     "_seed" + std::to_string(job.seed);
            out.trace_csv = (fs::path(out_dir) / ("trace_" + base + ".csv")).string();
            out.trace_json = (fs::path(out_dir) / ("trace_" + base + ".json")).string();

            std::vector<const mtbo_dataset*> sources;
            for (const auto& task : pspec.sources) sources.push_back(datasets.at(task).get());

            const mtbo_run_options opts = build_options(mspec, spec.budget, job.seed);
            mtbo_result* raw = nullptr;
            const mtbo_status st =
                mtbo_optimize(problems[job.problem_idx].get(), sources.data(),
                              static_cast<int>(sources.size()), &opts, &raw);
            if (st != MTBO_OK) {
                out.status = "failed";
                out.error = mtbo_last_error();
                continue;
            }
            ResultHandle res(raw);
            out.sense = mtbo_problem_is_minimization(problems[job.problem_idx].get()) ? "min"
                                                                                      : "max";
            out.status = mtbo_result_aborted(res.get()) ? "aborted" : "ok";
            const int iters = mtbo_result_iterations(res.get());
            const int tasks = mtbo_result_num_tasks(res.get());
            for (int k = 0; k < tasks; ++k) out.task_ids.push_back(mtbo_result_task_id(res.get(), k));
            for (int t = 0; t < iters; ++t) {
                out.incumbents.push_back(mtbo_result_incumbent(res.get(), t));
                std::vector<double> w(static_cast<std::size_t>(tasks));
                for (int k = 0; k < tasks; ++k) w[static_cast<std::size_t>(k)] =
                                                    mtbo_result_weight(res.get(), t, k);
                out.weights.push_back(std::move(w));
            }
            mtbo_result_write_csv(res.get(), out.trace_csv.c_str());
            mtbo_result_write_json(res.get(), out.trace_json.c_str());
        }
    };

    int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    n_workers = std::min<int>(n_workers, static_cast<int>(jobs.size()));
    std::vector<std::thread> pool;
    for (int i = 1; i < n_workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const auto& r : result.runs)
        if (r.status != "ok") ++result.failures;

    // deterministic summary order regardless of scheduling
    std::vector<const RunOutcome*> ordered;
    for (const auto& r : result.runs) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](const RunOutcome* a, const RunOutcome* b) {
        return std::tie(a->problem, a->method, a->seed) < std::tie(b->problem, b->method, b->seed);
    });

    result.summary_path = (fs::path(out_dir) / "summary.csv").string();
    std::ofstream summary(result.summary_path);
    if (!summary) throw std::runtime_error("cannot write " + result.summary_path);
    summary << "problem,method,seed,sense,iter,best,status\n";
    for (const RunOutcome* r : ordered) {
        if (r->incumbents.empty()) {
            summary << r->problem << "," << r->method << "," << r->seed << "," << r->sense
                    << ",0,nan," << r->status << "\n";
            continue;
        }
        for (std::size_t t = 0; t < r->incumbents.size(); ++t)
            summary << r->problem << "," << r->method << "," << r->seed << "," << r->sense << ","
                    << (t + 1) << "," << fmt(r->incumbents[t]) << "," << r->status << "\n";
    }
    summary.close();

    json run_manifest = json::array();
    for (const RunOutcome* r : ordered)
        run_manifest.push_back({{"problem", r->problem},
                                {"method", r->method},
                                {"seed", r->seed},
                                {"status", r->status},
                                {"error", r->error},
                                {"trace_csv", fs::path(r->trace_csv).filename().string()},
                                {"trace_json", fs::path(r->trace_json).filename().string()}});
    std::ofstream mf(fs::path(out_dir) / "run_manifest.json");
    mf << json{{"budget", spec.budget}, {"runs", run_manifest}}.dump(2) << "\n";

    return result;
}

std::vector<RankRow> aggregate_ranks(const std::string& out_dir) {
    const Csv summary = read_csv((fs::path(out_dir) / "summary.csv").string());
    const int c_problem = summary.column("problem");
    const int c_method = summary.column("method");
    const int c_seed = summary.column("seed");
    const int c_sense = summary.column("sense");
    const int c_iter = summary.column("iter");
    const int c_best = summary.column("best");
    const int c_status = summary.column("status");
    if (c_problem < 0 || c_method < 0 || c_iter < 0 || c_best < 0)
        throw std::runtime_error("summary.csv is malformed");

    std::set<std::string> method_set;
    // cell = (problem, seed) -> method -> best per iter
    std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<double>>>
        cells;
    std::map<std::string, bool> problem_minimizes;
    for (const auto& row : summary.rows) {
        if (c_status >= 0 && row[c_status] == "failed") continue;
        const std::string& problem = row[c_problem];
        const std::string& method = row[c_method];
        method_set.insert(method);
        problem_minimizes[problem] = c_sense < 0 || row[c_sense] == "min";
        auto& series = cells[{problem, row[c_seed]}][method];
        const std::size_t iter = std::stoul(row[c_iter]);
        if (iter == 0) continue;  // failed placeholder
        if (series.size() < iter) series.resize(iter);
        series[iter - 1] = std::stod(row[c_best]);
    }
    const std::vector<std::string> methods(method_set.begin(), method_set.end());
    if (methods.size() < 2)
        throw std::invalid_argument("rank aggregation needs at least 2 methods");

    // accumulate per (method, iter)
    std::map<std::string, std::vector<std::vector<double>>> acc;  // method -> iter -> ranks
    for (const auto& [key, per_method] : cells) {
        bool complete = per_method.size() == methods.size();
        if (!complete) continue;
        std::size_t len = std::numeric_limits<std::size_t>::max();
        for (const auto& [m, series] : per_method) len = std::min(len, series.size());
        const bool minimize = problem_minimizes[key.first];
        for (std::size_t t = 0; t < len; ++t) {
            std::vector<double> values;
            for (const auto& m : methods) values.push_back(per_method.at(m)[t]);
            const std::vector<double> ranks = rank_values(values, minimize);
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                auto& lanes = acc[methods[mi]];
                if (lanes.size() <= t) lanes.resize(t + 1);
                lanes[t].push_back(ranks[mi]);
            }
        }
    }

    std::vector<RankRow> rows;
    for (const auto& m : methods) {
        const auto& lanes = acc[m];
        for (std::size_t t = 0; t < lanes.size(); ++t) {
            if (lanes[t].empty()) continue;
            double mean = 0.0;
            for (double r : lanes[t]) mean += r;
            mean /= static_cast<double>(lanes[t].size());
            double var = 0.0;
            for (double r : lanes[t]) var += (r - mean) * (r - mean);
            var /= static_cast<double>(lanes[t].size());
            rows.push_back(RankRow{m, static_cast<int>(t + 1), mean, std::sqrt(var),
                                   static_cast<int>(lanes[t].size())});
        }
    }

    std::ofstream out(fs::path(out_dir) / "ranks.csv");
    if (!out) throw std::runtime_error("cannot write ranks.csv");
    out << "method,iter,mean_rank,std_rank,count\n";
    for (const auto& r : rows)
        out << r.method << "," << r.iter << "," << fmt(r.mean_rank) << "," << fmt(r.std_rank)
            << "," << r.count << "\n";
    return rows;
}

std::vector<std::string> emit_plots(const std::string& out_dir) {
    std::vector<std::string> log;
    const Csv summary = read_csv((fs::path(out_dir) / "summary.csv").string());
    const int c_problem = summary.column("problem");
    const int c_method = summary.column("method");
    const int c_iter = summary.column("iter");
    const int c_best = summary.column("best");
    const int c_status = summary.column("status");

    // best-value curves: mean +- std across seeds, per problem
    std::map<std::string, std::map<std::string, std::map<int, std::vector<double>>>> best;
    for (const auto& row : summary.rows) {
        if (c_status >= 0 && row[c_status] == "failed") continue;
        const int iter = std::stoi(row[c_iter]);
        if (iter == 0) continue;
        best[row[c_problem]][row[c_method]][iter].push_back(std::stod(row[c_best]));
    }
    for (const auto& [problem, per_method] : best) {
        std::vector<Series> series;
        std::ofstream csv(fs::path(out_dir) / ("plot_best_" + sanitize(problem) + ".csv"));
        csv << "method,iter,mean,std\n";
        for (const auto& [method, per_iter] : per_method) {
            Series s;
            s.label = method;
            for (const auto& [iter, values] : per_iter) {
                double mean = 0.0;
                for (double v : values) mean += v;
                mean /= static_cast<double>(values.size());
                double var = 0.0;
                for (double v : values) var += (v - mean) * (v - mean);
                var /= static_cast<double>(values.size());
                s.x.push_back(iter);
                s.y.push_back(mean);
                s.band.push_back(std::sqrt(var));
                csv << method << "," << iter << "," << fmt(mean) << "," << fmt(std::sqrt(var))
                    << "\n";
            }
            series.push_back(std::move(s));
        }
        const std::string svg =
            (fs::path(out_dir) / ("best_value_" + sanitize(problem) + ".svg")).string();
        write_line_chart(svg, "best value: " + problem, "evaluations", "best value", series);
        log.push_back("wrote " + svg);
    }

    // rank curve
    const fs::path ranks_path = fs::path(out_dir) / "ranks.csv";
    std::set<std::string> methods;
    for (const auto& row : summary.rows) methods.insert(row[c_method]);
    if (methods.size() < 2) {
        log.push_back("skipped rank plot: rank is undefined for a single method");
    } else if (!fs::exists(ranks_path)) {
        log.push_back("skipped rank plot: ranks.csv not found (run aggregate first)");
    } else {
        const Csv ranks = read_csv(ranks_path.string());
        std::map<std::string, Series> series;
        const int rc_method = ranks.column("method");
        const int rc_iter = ranks.column("iter");
        const int rc_mean = ranks.column("mean_rank");
        const int rc_std = ranks.column("std_rank");
        for (const auto& row : ranks.rows) {
            Series& s = series[row[rc_method]];
            s.label = row[rc_method];
            s.x.push_back(std::stod(row[rc_iter]));
            s.y.push_back(std::stod(row[rc_mean]));
            s.band.push_back(std::stod(row[rc_std]));
        }
        std::vector<Series> list;
        for (auto& [_, s] : series) list.push_back(std::move(s));
        const std::string svg = (fs::path(out_dir) / "ranks.svg").string();
        write_line_chart(svg, "mean rank (1 = best)", "evaluations", "rank", list);
        log.push_back("wrote " + svg);
    }

    // weight trajectories from the per-run traces
    std::ifstream mf(fs::path(out_dir) / "run_manifest.json");
    if (mf) {
        json manifest = json::parse(mf);
        // (problem, method) -> task -> iter -> weights across seeds
        std::map<std::pair<std::string, std::string>,
                 std::map<std::string, std::map<int, std::vector<double>>>>
            weights;
        for (const auto& run : manifest.at("runs")) {
            if (run.at("status").get<std::string>() == "failed") continue;
            const Csv trace =
                read_csv((fs::path(out_dir) / run.at("trace_csv").get<std::string>()).string());
            const int t_col = trace.column("t");
            for (std::size_t c = 0; c < trace.header.size(); ++c) {
                if (trace.header[c].rfind("w_", 0) != 0) continue;
                const std::string task = trace.header[c].substr(2);
                for (const auto& row : trace.rows)
                    weights[{run.at("problem"), run.at("method")}][task]
                           [std::stoi(row[t_col])].push_back(std::stod(row[c]));
            }
        }
        if (weights.empty()) {
            log.push_back("skipped weight plots: no weight trajectories in any trace");
        } else {
            for (const auto& [key, per_task] : weights) {
                std::vector<Series> series;
                std::ofstream csv(fs::path(out_dir) / ("plot_weights_" + sanitize(key.first) +
                                                       "_" + sanitize(key.second) + ".csv"));
                csv << "task,iter,mean,std\n";
                for (const auto& [task, per_iter] : per_task) {
                    Series s;
                    s.label = task;
                    for (const auto& [iter, values] : per_iter) {
                        double mean = 0.0;
                        for (double v : values) mean += v;
                        mean /= static_cast<double>(values.size());
                        double var = 0.0;
                        for (double v : values) var += (v - mean) * (v - mean);
                        var /= static_cast<double>(values.size());
                        s.x.push_back(iter);
                        s.y.push_back(mean);
                        s.band.push_back(std::sqrt(var));
                        csv << task << "," << iter << "," << fmt(mean) << ","
                            << fmt(std::sqrt(var)) << "\n";
                    }
                    series.push_back(std::move(s));
                }
                const std::string svg = (fs::path(out_dir) / ("weights_" + sanitize(key.first) +
                                                              "_" + sanitize(key.second) + ".svg"))
                                            .string();
                write_line_chart(svg, "source-task weights: " + key.first + " / " + key.second,
                                 "evaluations", "weight", series);
                log.push_back("wrote " + svg);
            }
        }
    }
    return log;
}

}  // namespace mtbo::harness
