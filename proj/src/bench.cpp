#include "bench.hpp"

#include <cmath>

#include "rng.hpp"

namespace mtbo {

namespace {

Vec shifted(const Vec& x, const Vec& shift) {
    Vec z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - shift[i];
    return z;
}

double rastrigin(const Vec& z) {
    double s = 10.0 * static_cast<double>(z.size());
    for (double v : z) s += v * v - 10.0 * std::cos(2.0 * M_PI * v);
    return s;
}

double rosenbrock(const Vec& z) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        const double a = z[i + 1] - z[i] * z[i];
        const double b = z[i] - 1.0;
        s += 100.0 * a * a + b * b;
    }
    return s;
}

double griewank_rosenbrock(const Vec& z) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
        const double a = z[i + 1] - z[i] * z[i];
        const double b = z[i] - 1.0;
        const double r = 100.0 * a * a + b * b;
        s += r / 4000.0 - std::cos(r) + 1.0;
    }
    return s;
}

double lunacek(const Vec& z) {
    const double dd = static_cast<double>(z.size());
    const double mu0 = 2.5;
    const double s_coef = 1.0 - 1.0 / (2.0 * std::sqrt(dd + 20.0) - 8.2);
    const double mu1 = -std::sqrt((mu0 * mu0 - 1.0) / s_coef);
    double sphere0 = 0.0, sphere1 = 0.0, cosines = 0.0;
    for (double v : z) {
        sphere0 += (v - mu0) * (v - mu0);
        sphere1 += (v - mu1) * (v - mu1);
        cosines += std::cos(2.0 * M_PI * (v - mu0));
    }
    return std::min(sphere0, dd + s_coef * sphere1) + 10.0 * (dd - cosines);
}

double sharp_ridge(const Vec& z) {
    double tail = 0.0;
    for (std::size_t i = 1; i < z.size(); ++i) tail += z[i] * z[i];
    return z[0] * z[0] + 100.0 * std::sqrt(tail);
}

struct StandardSpec {
    double (*fn)(const Vec&);
    double opt_coord;  // optimum of the unshifted function, per coordinate
};

StandardSpec standard_spec(const std::string& name) {
    if (name == "rastrigin") return {rastrigin, 0.0};
    if (name == "rosenbrock") return {rosenbrock, 1.0};
    if (name == "griewank_rosenbrock") return {griewank_rosenbrock, 1.0};
    if (name == "lunacek") return {lunacek, 2.5};
    if (name == "sharp_ridge") return {sharp_ridge, 0.0};
    throw std::invalid_argument("unknown benchmark function: " + name);
}

/// Random orthogonal matrix by Gram-Schmidt on a seeded Gaussian matrix.
std::vector<Vec> random_rotation(int dim, Rng& rng) {
    std::vector<Vec> q(dim, Vec(dim));
    for (auto& row : q)
        for (auto& v : row) v = rng.normal();
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < i; ++j) {
            double dot = 0.0;
            for (int d = 0; d < dim; ++d) dot += q[i][d] * q[j][d];
            for (int d = 0; d < dim; ++d) q[i][d] -= dot * q[j][d];
        }
        double norm = 0.0;
        for (double v : q[i]) norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            // essentially impossible with Gaussian rows; restart that row
            for (auto& v : q[i]) v = rng.normal();
            --i;
            continue;
        }
        for (auto& v : q[i]) v /= norm;
    }
    return q;
}

}  // namespace

BenchmarkProblem make_sphere(const Vec& x_star, const SearchDomain& domain) {
    if (static_cast<int>(x_star.size()) != domain.dim)
        throw std::invalid_argument("make_sphere: x_star dimension mismatch");
    BenchmarkProblem p;
    p.name = "sphere";
    p.dim = domain.dim;
    p.domain = domain;
    p.optimum = x_star;
    p.optimum_value = 0.0;
    p.sense = Sense::Minimize;
    p.evaluate = [x_star](const Vec& x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - x_star[i];
            s += d * d;
        }
        return s;
    };
    return p;
}

BenchmarkProblem make_standard(const std::string& name, int dim, const std::optional<Vec>& shift,
                               std::uint64_t seed, const std::optional<SearchDomain>& domain) {
    if (dim < 2) throw std::invalid_argument("make_standard: dim must be >= 2");
    const StandardSpec spec = standard_spec(name);

    BenchmarkProblem p;
    p.name = name;
    p.dim = dim;
    p.domain = domain ? *domain : SearchDomain(Vec(dim, -5.0), Vec(dim, 5.0));
    p.sense = Sense::Minimize;
    p.optimum_value = 0.0;

    Vec sh;
    if (shift) {
        if (static_cast<int>(shift->size()) != dim)
            throw std::invalid_argument("make_standard: shift dimension mismatch");
        sh = *shift;
    } else {
        // optimum uniform in the central 80% of the box
        Rng rng(seed);
        sh.resize(dim);
        for (int d = 0; d < dim; ++d) {
            const double lo = p.domain.lower[d];
            const double hi = p.domain.upper[d];
            const double opt = lo + (0.1 + 0.8 * rng.uniform()) * (hi - lo);
            sh[d] = opt - spec.opt_coord;
        }
    }
    Vec opt(dim);
    for (int d = 0; d < dim; ++d) opt[d] = sh[d] + spec.opt_coord;
    p.optimum = opt;
    auto fn = spec.fn;
    p.evaluate = [fn, sh](const Vec& x) { return fn(shifted(x, sh)); };
    return p;
}

BenchmarkProblem make_family(const BenchmarkProblem& base, std::uint64_t seed) {
    if (!base.optimum)
        throw std::invalid_argument("make_family: base problem needs a known optimum");
    Rng rng(seed);
    const int dim = base.dim;

    Vec new_opt(dim);
    for (int d = 0; d < dim; ++d) {
        const double lo = base.domain.lower[d];
        const double hi = base.domain.upper[d];
        new_opt[d] = lo + (0.1 + 0.8 * rng.uniform()) * (hi - lo);
    }
    const auto rot = random_rotation(dim, rng);
    const Vec base_opt = *base.optimum;
    auto base_fn = base.evaluate;

    BenchmarkProblem p;
    p.name = base.name + "_family" + std::to_string(seed);
    p.dim = dim;
    p.domain = base.domain;
    p.optimum = new_opt;
    p.optimum_value = base.optimum_value;
    p.sense = base.sense;
    p.evaluate = [base_fn, rot, new_opt, base_opt, dim](const Vec& x) {
        // rotate about the new optimum, then translate onto the base optimum
        Vec z(dim);
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += rot[i][j] * (x[j] - new_opt[j]);
            z[i] = s + base_opt[i];
        }
        return base_fn(z);
    };
    return p;
}

Sampler parse_sampler(const std::string& name) {
    if (name == "random") return Sampler::Random;
    if (name == "hill_climb") return Sampler::HillClimb;
    if (name == "gp_ei") return Sampler::GpEi;
    throw std::invalid_argument("unknown sampler: " + name);
}

std::string sampler_name(Sampler s) {
    switch (s) {
        case Sampler::Random: return "random";
        case Sampler::HillClimb: return "hill_climb";
        case Sampler::GpEi: return "gp_ei";
    }
    return "unknown";
}

TaskDataset generate_source_data(const BenchmarkProblem& problem, Sampler sampler, int n,
                                 std::uint64_t seed, const std::string& task_id) {
    if (n < 1) throw std::invalid_argument("generate_source_data: n must be >= 1");
    TaskDataset ds;
    ds.task_id = task_id.empty()
                     ? problem.name + "_" + sampler_name(sampler) + "_s" + std::to_string(seed)
                     : task_id;
    ds.role = TaskRole::Source;
    ds.domain = problem.domain;

    const Objective obj = problem.objective();
    Rng rng(seed);

    auto eval_norm = [&](const Vec& x_norm) {
        return to_max_sense(obj.fn(denormalize_point(x_norm, problem.domain)), obj.sense);
    };

    switch (sampler) {
        case Sampler::Random: {
            for (int i = 0; i < n; ++i) {
                Vec x(problem.dim);
                for (auto& v : x) v = rng.uniform();
                ds.append(x, eval_norm(x));
            }
            break;
        }
        case Sampler::HillClimb: {
            constexpr double kSigma = 0.1;  // normalized coordinates
            Vec cur(problem.dim);
            for (auto& v : cur) v = rng.uniform();
            double cur_y = eval_norm(cur);
            ds.append(cur, cur_y);
            for (int i = 1; i < n; ++i) {
                Vec prop = cur;
                for (auto& v : prop) v = std::clamp(v + kSigma * rng.normal(), 0.0, 1.0);
                const double y = eval_norm(prop);
                if (y > cur_y) {
                    cur = prop;
                    cur_y = y;
                }
                ds.append(cur, cur_y);
            }
            break;
        }
        case Sampler::GpEi: {
            OptimizerConfig cfg;
            cfg.method = Method::GpEi;
            cfg.eval_budget = n;
            cfg.seed = seed;
            const RunTrace trace = run_gp_ei(obj, problem.domain, cfg);
            for (const auto& it : trace.iterations)
                ds.append(normalize_point(it.x, problem.domain), it.y_max);
            break;
        }
    }
    return ds;
}

}  // namespace mtbo
