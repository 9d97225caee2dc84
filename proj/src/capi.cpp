#include "mtbo.h"

#include <cstring>
#include <string>

#include "bench.hpp"
#include "core.hpp"
#include "optimizer.hpp"

using namespace mtbo;

struct mtbo_problem {
    BenchmarkProblem impl;
};

struct mtbo_dataset {
    TaskDataset impl;
};

struct mtbo_result {
    RunTrace impl;
};

namespace {

thread_local std::string g_last_error = "";

mtbo_status fail(mtbo_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename F>
mtbo_status guarded(F&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        return fail(MTBO_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(MTBO_ERR_RUNTIME, e.what());
    }
}

OptimizerConfig to_config(const mtbo_run_options& o) {
    OptimizerConfig c;
    c.method = parse_method(o.method ? o.method : "mcts_transfer");
    c.eval_budget = o.budget;
    c.seed = o.seed;
    c.gamma = o.gamma;
    c.cp = o.cp;
    c.theta = o.theta;
    const std::string measure = o.similarity_measure ? o.similarity_measure : "best_n_mean";
    if (measure == "best_n_mean")
        c.similarity.measure = SimilarityMeasure::BestNMean;
    else if (measure == "optimal_point")
        c.similarity.measure = SimilarityMeasure::OptimalPoint;
    else if (measure == "best_n_percent")
        c.similarity.measure = SimilarityMeasure::BestNPercent;
    else if (measure == "kendall")
        c.similarity.measure = SimilarityMeasure::Kendall;
    else if (measure == "kl_divergence")
        c.similarity.measure = SimilarityMeasure::KlDivergence;
    else
        throw std::invalid_argument("unknown similarity measure: " + measure);
    c.similarity.n = o.similarity_n;
    c.similarity.percent = o.similarity_percent;
    const std::string strategy = o.weight_strategy ? o.weight_strategy : "linear";
    if (strategy == "linear")
        c.similarity.strategy = WeightStrategy::Linear;
    else if (strategy == "exponential")
        c.similarity.strategy = WeightStrategy::Exponential;
    else if (strategy == "all_one")
        c.similarity.strategy = WeightStrategy::AllOne;
    else
        throw std::invalid_argument("unknown weight strategy: " + strategy);
    c.similarity.alpha = o.alpha;
    c.similarity.beta = o.beta;
    c.similarity.kl_mc_samples = o.kl_mc_samples;
    c.similarity.recompute_interval = o.similarity_interval;
    c.normalize_objectives = o.normalize_objectives != 0;
    c.cluster_with_objective = o.cluster_with_objective != 0;
    const std::string clf = o.classifier ? o.classifier : "logistic_regression";
    if (clf == "logistic_regression")
        c.classifier = ClassifierKind::LogisticRegression;
    else if (clf == "linear_svm")
        c.classifier = ClassifierKind::LinearSvm;
    else
        throw std::invalid_argument("unknown classifier: " + clf);
    c.local_gp = o.local_gp != 0;
    c.strict_literal_ucb = o.strict_literal_ucb != 0;
    c.init_points = o.init_points;
    return c;
}

std::vector<TaskDataset> collect_sources(const mtbo_dataset* const* sources, int n_sources) {
    std::vector<TaskDataset> out;
    out.reserve(n_sources > 0 ? static_cast<std::size_t>(n_sources) : 0);
    for (int i = 0; i < n_sources; ++i) {
        if (!sources || !sources[i]) throw std::invalid_argument("null source dataset");
        out.push_back(sources[i]->impl);
    }
    return out;
}

}  // namespace

extern "C" {

const char* mtbo_version(void) { return "0.1.0"; }

const char* mtbo_last_error(void) { return g_last_error.c_str(); }

mtbo_status mtbo_problem_sphere(int dim, const double* x_star, const double* lower,
                                const double* upper, mtbo_problem** out) {
    return guarded([&]() {
        if (!x_star || !lower || !upper || !out || dim < 1)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_problem_sphere: bad arguments");
        SearchDomain domain(Vec(lower, lower + dim), Vec(upper, upper + dim));
        *out = new mtbo_problem{make_sphere(Vec(x_star, x_star + dim), domain)};
        return MTBO_OK;
    });
}

mtbo_status mtbo_problem_standard(const char* name, int dim, const double* shift, uint64_t seed,
                                  const double* lower, const double* upper, mtbo_problem** out) {
    return guarded([&]() {
        if (!name || !out || dim < 1)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_problem_standard: bad arguments");
        std::optional<Vec> sh;
        if (shift) sh = Vec(shift, shift + dim);
        std::optional<SearchDomain> domain;
        if (lower && upper) domain = SearchDomain(Vec(lower, lower + dim), Vec(upper, upper + dim));
        *out = new mtbo_problem{make_standard(name, dim, sh, seed, domain)};
        return MTBO_OK;
    });
}

mtbo_status mtbo_problem_family(const mtbo_problem* base, uint64_t seed, mtbo_problem** out) {
    return guarded([&]() {
        if (!base || !out)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_problem_family: bad arguments");
        *out = new mtbo_problem{make_family(base->impl, seed)};
        return MTBO_OK;
    });
}

int mtbo_problem_dim(const mtbo_problem* p) { return p ? p->impl.dim : 0; }

int mtbo_problem_is_minimization(const mtbo_problem* p) {
    return p && p->impl.sense == Sense::Minimize ? 1 : 0;
}

mtbo_status mtbo_problem_bounds(const mtbo_problem* p, double* lower, double* upper) {
    return guarded([&]() {
        if (!p || !lower || !upper)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_problem_bounds: bad arguments");
        for (int d = 0; d < p->impl.dim; ++d) {
            lower[d] = p->impl.domain.lower[d];
            upper[d] = p->impl.domain.upper[d];
        }
        return MTBO_OK;
    });
}

mtbo_status mtbo_problem_optimum(const mtbo_problem* p, double* x, double* value) {
    return guarded([&]() {
        if (!p) return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_problem_optimum: null problem");
        if (!p->impl.optimum) return fail(MTBO_ERR_RUNTIME, "problem optimum is unknown");
        if (x)
            for (int d = 0; d < p->impl.dim; ++d) x[d] = (*p->impl.optimum)[d];
        if (value) *value = p->impl.optimum_value;
        return MTBO_OK;
    });
}

mtbo_status mtbo_problem_eval(const mtbo_problem* p, const double* x, double* value) {
    return guarded([&]() {
        if (!p || !x || !value)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_problem_eval: bad arguments");
        *value = p->impl.evaluate(Vec(x, x + p->impl.dim));
        return MTBO_OK;
    });
}

void mtbo_problem_free(mtbo_problem* p) { delete p; }

mtbo_status mtbo_dataset_generate(const mtbo_problem* p, const char* sampler, int n,
                                  uint64_t seed, const char* task_id, mtbo_dataset** out) {
    return guarded([&]() {
        if (!p || !sampler || !out || n < 1)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_dataset_generate: bad arguments");
        *out = new mtbo_dataset{generate_source_data(p->impl, parse_sampler(sampler), n, seed,
                                                     task_id ? task_id : "")};
        return MTBO_OK;
    });
}

mtbo_status mtbo_dataset_load(const char* path, mtbo_dataset** out) {
    return guarded([&]() {
        if (!path || !out)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_dataset_load: bad arguments");
        try {
            *out = new mtbo_dataset{load_dataset_jsonl(path)};
        } catch (const std::runtime_error& e) {
            return fail(MTBO_ERR_IO, e.what());
        }
        return MTBO_OK;
    });
}

mtbo_status mtbo_dataset_load_csv(const char* path, int dim, const double* lower,
                                  const double* upper, const char* task_id, mtbo_dataset** out) {
    return guarded([&]() {
        if (!path || !lower || !upper || !out || dim < 1)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_dataset_load_csv: bad arguments");
        SearchDomain domain(Vec(lower, lower + dim), Vec(upper, upper + dim));
        try {
            *out = new mtbo_dataset{
                load_dataset_csv(path, domain, task_id ? task_id : "csv_task")};
        } catch (const std::runtime_error& e) {
            return fail(MTBO_ERR_IO, e.what());
        }
        return MTBO_OK;
    });
}

mtbo_status mtbo_dataset_save(const mtbo_dataset* d, const char* path) {
    return guarded([&]() {
        if (!d || !path)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_dataset_save: bad arguments");
        try {
            save_dataset_jsonl(d->impl, path);
        } catch (const std::runtime_error& e) {
            return fail(MTBO_ERR_IO, e.what());
        }
        return MTBO_OK;
    });
}

mtbo_status mtbo_dataset_validate(const mtbo_dataset* d, char* report, size_t report_cap,
                                  int* n_issues) {
    return guarded([&]() {
        if (!d) return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_dataset_validate: null dataset");
        const ValidationReport r = validate_dataset(d->impl, d->impl.domain);
        if (n_issues) *n_issues = static_cast<int>(r.issues.size());
        if (report && report_cap > 0) {
            const std::string text = r.to_string();
            std::strncpy(report, text.c_str(), report_cap - 1);
            report[report_cap - 1] = '\0';
        }
        return MTBO_OK;
    });
}

int mtbo_dataset_size(const mtbo_dataset* d) { return d ? static_cast<int>(d->impl.size()) : 0; }

int mtbo_dataset_dim(const mtbo_dataset* d) { return d ? d->impl.domain.dim : 0; }

const char* mtbo_dataset_task_id(const mtbo_dataset* d) {
    return d ? d->impl.task_id.c_str() : "";
}

void mtbo_dataset_free(mtbo_dataset* d) { delete d; }

void mtbo_run_options_init(mtbo_run_options* opts) {
    if (!opts) return;
    opts->method = "mcts_transfer";
    opts->budget = 100;
    opts->seed = 0;
    opts->gamma = 0.99;
    opts->cp = 0.1;
    opts->theta = 10;
    opts->similarity_measure = "best_n_mean";
    opts->similarity_n = 5;
    opts->similarity_percent = 0.30;
    opts->weight_strategy = "linear";
    opts->alpha = 0.5;
    opts->beta = 0.5;
    opts->kl_mc_samples = 1024;
    opts->similarity_interval = 1;
    opts->normalize_objectives = 1;
    opts->cluster_with_objective = 1;
    opts->classifier = "logistic_regression";
    opts->local_gp = 0;
    opts->strict_literal_ucb = 0;
    opts->init_points = 5;
}

mtbo_status mtbo_optimize(const mtbo_problem* p, const mtbo_dataset* const* sources,
                          int n_sources, const mtbo_run_options* opts, mtbo_result** out) {
    return guarded([&]() {
        if (!p || !opts || !out)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_optimize: bad arguments");
        const OptimizerConfig config = to_config(*opts);
        auto src = collect_sources(sources, n_sources);
        for (const auto& s : src) {
            if (s.domain.dim != p->impl.dim)
                return fail(MTBO_ERR_INVALID_ARGUMENT,
                            "source dataset '" + s.task_id + "' dimension disagrees with problem");
            for (int d = 0; d < p->impl.dim; ++d) {
                if (std::abs(s.domain.lower[d] - p->impl.domain.lower[d]) > 1e-9 ||
                    std::abs(s.domain.upper[d] - p->impl.domain.upper[d]) > 1e-9)
                    return fail(MTBO_ERR_INVALID_ARGUMENT,
                                "source dataset '" + s.task_id +
                                    "' bounds disagree with the problem domain");
            }
        }
        *out = new mtbo_result{
            run(p->impl.objective(), p->impl.domain, std::move(src), config, p->impl.name)};
        return MTBO_OK;
    });
}

mtbo_status mtbo_optimize_fn(mtbo_objective_fn fn, void* user, int dim, const double* lower,
                             const double* upper, int maximize,
                             const mtbo_dataset* const* sources, int n_sources,
                             const mtbo_run_options* opts, mtbo_result** out) {
    return guarded([&]() {
        if (!fn || !lower || !upper || !opts || !out || dim < 1)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_optimize_fn: bad arguments");
        const OptimizerConfig config = to_config(*opts);
        SearchDomain domain(Vec(lower, lower + dim), Vec(upper, upper + dim));
        Objective objective;
        objective.sense = maximize ? Sense::Maximize : Sense::Minimize;
        objective.fn = [fn, user, dim](const Vec& x) { return fn(x.data(), dim, user); };
        *out = new mtbo_result{run(objective, domain, collect_sources(sources, n_sources),
                                   config, "callback")};
        return MTBO_OK;
    });
}

int mtbo_result_iterations(const mtbo_result* r) {
    return r ? static_cast<int>(r->impl.iterations.size()) : 0;
}

int mtbo_result_dim(const mtbo_result* r) {
    if (!r || r->impl.iterations.empty()) return 0;
    return static_cast<int>(r->impl.iterations[0].x.size());
}

int mtbo_result_num_tasks(const mtbo_result* r) {
    return r ? static_cast<int>(r->impl.task_ids.size()) : 0;
}

const char* mtbo_result_task_id(const mtbo_result* r, int task) {
    if (!r || task < 0 || task >= static_cast<int>(r->impl.task_ids.size())) return "";
    return r->impl.task_ids[static_cast<std::size_t>(task)].c_str();
}

int mtbo_result_aborted(const mtbo_result* r) { return r && r->impl.aborted ? 1 : 0; }

mtbo_status mtbo_result_point(const mtbo_result* r, int t, double* x) {
    return guarded([&]() {
        if (!r || !x || t < 0 || t >= static_cast<int>(r->impl.iterations.size()))
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_result_point: bad arguments");
        const auto& rec = r->impl.iterations[static_cast<std::size_t>(t)];
        for (std::size_t d = 0; d < rec.x.size(); ++d) x[d] = rec.x[d];
        return MTBO_OK;
    });
}

double mtbo_result_value(const mtbo_result* r, int t) {
    if (!r || t < 0 || t >= static_cast<int>(r->impl.iterations.size())) return 0.0;
    return from_max_sense(r->impl.iterations[static_cast<std::size_t>(t)].y_max, r->impl.sense);
}

double mtbo_result_incumbent(const mtbo_result* r, int t) {
    if (!r || t < 0 || t >= static_cast<int>(r->impl.iterations.size())) return 0.0;
    return from_max_sense(r->impl.iterations[static_cast<std::size_t>(t)].inc_max, r->impl.sense);
}

double mtbo_result_weight(const mtbo_result* r, int t, int task) {
    if (!r || t < 0 || t >= static_cast<int>(r->impl.iterations.size())) return 0.0;
    const auto& w = r->impl.iterations[static_cast<std::size_t>(t)].weights;
    if (task < 0 || task >= static_cast<int>(w.size())) return 0.0;
    return w[static_cast<std::size_t>(task)];
}

int mtbo_result_leaf(const mtbo_result* r, int t) {
    if (!r || t < 0 || t >= static_cast<int>(r->impl.iterations.size())) return -1;
    return r->impl.iterations[static_cast<std::size_t>(t)].leaf_id;
}

mtbo_status mtbo_result_best(const mtbo_result* r, double* x, double* value) {
    return guarded([&]() {
        if (!r) return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_result_best: null result");
        if (r->impl.iterations.empty())
            return fail(MTBO_ERR_RUNTIME, "mtbo_result_best: empty trace");
        if (x)
            for (std::size_t d = 0; d < r->impl.best_x.size(); ++d) x[d] = r->impl.best_x[d];
        if (value) *value = r->impl.best_y_original();
        return MTBO_OK;
    });
}

mtbo_status mtbo_result_write_csv(const mtbo_result* r, const char* path) {
    return guarded([&]() {
        if (!r || !path)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_result_write_csv: bad arguments");
        try {
            write_trace_csv(r->impl, path);
        } catch (const std::runtime_error& e) {
            return fail(MTBO_ERR_IO, e.what());
        }
        return MTBO_OK;
    });
}

mtbo_status mtbo_result_write_json(const mtbo_result* r, const char* path) {
    return guarded([&]() {
        if (!r || !path)
            return fail(MTBO_ERR_INVALID_ARGUMENT, "mtbo_result_write_json: bad arguments");
        try {
            write_trace_json(r->impl, path);
        } catch (const std::runtime_error& e) {
            return fail(MTBO_ERR_IO, e.what());
        }
        return MTBO_OK;
    });
}

void mtbo_result_free(mtbo_result* r) { delete r; }

}  // extern "C"
