#pragma once

#include <functional>
#include <optional>
#include <string>

#include "core.hpp"
#include "optimizer.hpp"

namespace mtbo {

/// A synthetic objective with known optimum. `evaluate` takes original
/// coordinates; minimization problems are negated by Objective adapters
/// before entering the optimizer.
struct BenchmarkProblem {
    std::string name;
    int dim = 0;
    SearchDomain domain;
    std::optional<Vec> optimum;  // location, original coordinates
    double optimum_value = 0.0;
    Sense sense = Sense::Minimize;
    std::function<double(const Vec&)> evaluate;

    Objective objective() const { return Objective{evaluate, sense}; }
};

/// f(x) = sum_d (x_d - x*_d)^2, minimization.
BenchmarkProblem make_sphere(const Vec& x_star, const SearchDomain& domain);

/// Standard synthetic functions evaluated at x - shift:
/// rastrigin, rosenbrock, griewank_rosenbrock, lunacek, sharp_ridge.
/// With no shift given, one is derived from the seed (optimum uniform in the
/// central 80% of the box). Default domain is [-5, 5]^dim.
BenchmarkProblem make_standard(const std::string& name, int dim,
                               const std::optional<Vec>& shift = std::nullopt,
                               std::uint64_t seed = 0,
                               const std::optional<SearchDomain>& domain = std::nullopt);

/// A family member of `base`: seeded shift of the optimum into the central
/// 80% of the box plus a seeded orthogonal rotation about the new optimum.
/// The optimum value is preserved; the seed fully determines the instance.
BenchmarkProblem make_family(const BenchmarkProblem& base, std::uint64_t seed);

enum class Sampler { Random, HillClimb, GpEi };
Sampler parse_sampler(const std::string& name);
std::string sampler_name(Sampler s);

/// n evaluated samples from the chosen sampler, as a source dataset in the
/// problem's domain (maximization sense). hill_climb records the
/// accept-if-better state after each evaluation (sigma = 0.1 normalized);
/// gp_ei reuses the GP-EI baseline.
TaskDataset generate_source_data(const BenchmarkProblem& problem, Sampler sampler, int n,
                                 std::uint64_t seed, const std::string& task_id = "");

}  // namespace mtbo
