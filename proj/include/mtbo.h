/* mtbo — transfer Bayesian optimization over a learned search-space
 * partition tree. C API: opaque handles, integer status codes, thread-local
 * error messages. All functions returning mtbo_status set the last-error
 * string on failure. */

#ifndef MTBO_H
#define MTBO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define MTBO_API __declspec(dllexport)
#else
#  define MTBO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mtbo_status {
    MTBO_OK = 0,
    MTBO_ERR_INVALID_ARGUMENT = 1,
    MTBO_ERR_IO = 2,
    MTBO_ERR_RUNTIME = 3
} mtbo_status;

typedef struct mtbo_problem mtbo_problem;
typedef struct mtbo_dataset mtbo_dataset;
typedef struct mtbo_result mtbo_result;

MTBO_API const char* mtbo_version(void);
/* Message for the most recent failure on this thread; never NULL. */
MTBO_API const char* mtbo_last_error(void);

/* ---- problems ---------------------------------------------------------- */

/* Sphere: f(x) = sum (x_d - x_star_d)^2, minimization. */
MTBO_API mtbo_status mtbo_problem_sphere(int dim, const double* x_star, const double* lower,
                                         const double* upper, mtbo_problem** out);

/* name: rastrigin | rosenbrock | griewank_rosenbrock | lunacek | sharp_ridge.
 * shift may be NULL (derived from seed, optimum in the central 80% of the
 * box). lower/upper may be NULL for the default [-5, 5]^dim. */
MTBO_API mtbo_status mtbo_problem_standard(const char* name, int dim, const double* shift,
                                           uint64_t seed, const double* lower,
                                           const double* upper, mtbo_problem** out);

/* Family member: seeded optimum shift + orthogonal rotation, optimum value
 * preserved. */
MTBO_API mtbo_status mtbo_problem_family(const mtbo_problem* base, uint64_t seed,
                                         mtbo_problem** out);

MTBO_API int mtbo_problem_dim(const mtbo_problem* p);
/* 1 when the problem is a minimization problem (all built-ins are). */
MTBO_API int mtbo_problem_is_minimization(const mtbo_problem* p);
MTBO_API mtbo_status mtbo_problem_bounds(const mtbo_problem* p, double* lower, double* upper);
/* Known optimum location; MTBO_ERR_RUNTIME when unknown. */
MTBO_API mtbo_status mtbo_problem_optimum(const mtbo_problem* p, double* x, double* value);
MTBO_API mtbo_status mtbo_problem_eval(const mtbo_problem* p, const double* x, double* value);
MTBO_API void mtbo_problem_free(mtbo_problem* p);

/* ---- datasets ---------------------------------------------------------- */

/* sampler: random | hill_climb | gp_ei. */
MTBO_API mtbo_status mtbo_dataset_generate(const mtbo_problem* p, const char* sampler, int n,
                                           uint64_t seed, const char* task_id,
                                           mtbo_dataset** out);

/* Line-delimited JSON (header + records, original coordinates,
 * maximization sense). */
MTBO_API mtbo_status mtbo_dataset_load(const char* path, mtbo_dataset** out);
/* CSV fallback (x_0..x_{d-1},y columns); bounds must be supplied. */
MTBO_API mtbo_status mtbo_dataset_load_csv(const char* path, int dim, const double* lower,
                                           const double* upper, const char* task_id,
                                           mtbo_dataset** out);
MTBO_API mtbo_status mtbo_dataset_save(const mtbo_dataset* d, const char* path);

/* Writes a human-readable issue report (NaNs, out-of-bounds, duplicates,
 * dimension mismatches) into `report` (truncated to report_cap) and the
 * issue count into n_issues. A clean dataset yields "ok" and 0. */
MTBO_API mtbo_status mtbo_dataset_validate(const mtbo_dataset* d, char* report,
                                           size_t report_cap, int* n_issues);

MTBO_API int mtbo_dataset_size(const mtbo_dataset* d);
MTBO_API int mtbo_dataset_dim(const mtbo_dataset* d);
MTBO_API const char* mtbo_dataset_task_id(const mtbo_dataset* d);
MTBO_API void mtbo_dataset_free(mtbo_dataset* d);

/* ---- optimization ------------------------------------------------------ */

typedef struct mtbo_run_options {
    const char* method;   /* mcts_transfer | gp_ei | la_mcts | box_gp | ellipsoid_gp */
    int budget;           /* objective evaluations */
    uint64_t seed;
    double gamma;         /* source decay factor */
    double cp;            /* exploration constant */
    int theta;            /* split threshold */
    const char* similarity_measure; /* best_n_mean | optimal_point | best_n_percent |
                                       kendall | kl_divergence */
    int similarity_n;
    double similarity_percent;
    const char* weight_strategy;    /* linear | exponential | all_one */
    double alpha;
    double beta;
    int kl_mc_samples;
    int similarity_interval;        /* recompute distances every k iterations */
    int normalize_objectives;       /* bool */
    int cluster_with_objective;     /* bool: k-means features are (x, y) */
    const char* classifier;         /* logistic_regression | linear_svm */
    int local_gp;                   /* bool: fit GP on the leaf pool only */
    int strict_literal_ucb;         /* bool: p_m / n_m in the UCB score */
    int init_points;                /* initial design for gp_ei-family methods */
} mtbo_run_options;

/* Paper-default options: gamma 0.99, cp 0.1, theta 10, best-5-mean linear
 * weights with alpha 0.5, budget 100. */
MTBO_API void mtbo_run_options_init(mtbo_run_options* opts);

MTBO_API mtbo_status mtbo_optimize(const mtbo_problem* p, const mtbo_dataset* const* sources,
                                   int n_sources, const mtbo_run_options* opts,
                                   mtbo_result** out);

/* Arbitrary objective via callback. `maximize` selects the sense; return NaN
 * to signal an evaluation failure (retried once, then the run aborts with a
 * partial trace). */
typedef double (*mtbo_objective_fn)(const double* x, int dim, void* user);
MTBO_API mtbo_status mtbo_optimize_fn(mtbo_objective_fn fn, void* user, int dim,
                                      const double* lower, const double* upper, int maximize,
                                      const mtbo_dataset* const* sources, int n_sources,
                                      const mtbo_run_options* opts, mtbo_result** out);

/* ---- results ----------------------------------------------------------- */

MTBO_API int mtbo_result_iterations(const mtbo_result* r);
MTBO_API int mtbo_result_dim(const mtbo_result* r);
MTBO_API int mtbo_result_num_tasks(const mtbo_result* r);
MTBO_API const char* mtbo_result_task_id(const mtbo_result* r, int task);
MTBO_API int mtbo_result_aborted(const mtbo_result* r);

/* Per-iteration data, t in [0, iterations). Values are reported in the
 * problem's original sense. */
MTBO_API mtbo_status mtbo_result_point(const mtbo_result* r, int t, double* x);
MTBO_API double mtbo_result_value(const mtbo_result* r, int t);
MTBO_API double mtbo_result_incumbent(const mtbo_result* r, int t);
MTBO_API double mtbo_result_weight(const mtbo_result* r, int t, int task);
MTBO_API int mtbo_result_leaf(const mtbo_result* r, int t);

MTBO_API mtbo_status mtbo_result_best(const mtbo_result* r, double* x, double* value);
/* Trace CSV: one row per iteration (x, y, incumbent, leaf, rebuild count,
 * timings, per-task weights). */
MTBO_API mtbo_status mtbo_result_write_csv(const mtbo_result* r, const char* path);
/* JSON sidecar: config echo, final tree snapshot, timing breakdown. */
MTBO_API mtbo_status mtbo_result_write_json(const mtbo_result* r, const char* path);
MTBO_API void mtbo_result_free(mtbo_result* r);

#ifdef __cplusplus
}
#endif

#endif /* MTBO_H */
