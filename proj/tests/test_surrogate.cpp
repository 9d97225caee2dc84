#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gp_oracle.hpp"
#include "rng.hpp"
#include "surrogate.hpp"

using namespace mtbo;
using mtbo_oracle::dense_posterior;

TEST_CASE("Matern-5/2 kernel basics") {
    const GpKernel k{2.0, 0.7, 0.0};
    const Vec a{0.1, 0.2}, b{0.9, 0.4};
    CHECK(matern52(a, a, k) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(matern52(a, b, k) == doctest::Approx(matern52(b, a, k)).epsilon(1e-15));
    CHECK(matern52(a, b, k) < matern52(a, a, k));
}

TEST_CASE("Gram matrices are positive semidefinite before jitter") {
    Rng rng(17);
    const GpKernel k{1.3, 0.4, 0.0};
    std::vector<Vec> xs;
    for (int i = 0; i < 12; ++i) xs.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    const std::size_t n = xs.size();
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) gram[i * n + j] = matern52(xs[i], xs[j], k);
    // smallest eigenvalue via inverse-power-free bound: check x^T G x >= -1e-8
    // over random unit vectors (sufficient smoke for PSD)
    for (int trial = 0; trial < 200; ++trial) {
        Vec v(n);
        double norm = 0.0;
        for (auto& c : v) {
            c = rng.normal();
            norm += c * c;
        }
        norm = std::sqrt(norm);
        double quad = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) quad += (v[i] / norm) * gram[i * n + j] * (v[j] / norm);
        CHECK(quad >= -1e-8);
    }
}

TEST_CASE("GP interpolates noiseless sin within 1e-4 at training points") {
    std::vector<Vec> xs;
    Vec ys;
    for (int i = 0; i < 9; ++i) {
        const double t = static_cast<double>(i) / 8.0;
        xs.push_back({t});
        ys.push_back(std::sin(2.0 * M_PI * t));
    }
    const GpModel model = GpModel::fit(xs, ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto [mu, sd] = model.predict(xs[i]);
        CHECK(mu == doctest::Approx(ys[i]).epsilon(1e-4));
    }
}

TEST_CASE("constant targets give near-constant predictions") {
    const std::vector<Vec> xs{{0.1}, {0.4}, {0.7}, {0.95}};
    const Vec ys{2.5, 2.5, 2.5, 2.5};
    const GpModel model = GpModel::fit(xs, ys);
    const auto [mu, sd] = model.predict({0.5});
    CHECK(mu == doctest::Approx(2.5).epsilon(1e-6));
    CHECK(sd < 0.1);
}

TEST_CASE("optimized likelihood is at least the default-parameter likelihood") {
    Rng rng(31);
    std::vector<Vec> xs;
    Vec ys;
    for (int i = 0; i < 5; ++i) {
        xs.push_back({rng.uniform(), rng.uniform()});
        ys.push_back(rng.uniform(-1, 1));
    }
    const GpModel model = GpModel::fit(xs, ys);

    // likelihood of the fitted kernel must beat (or match) the first start
    Vec ys_std = model.train_y_standardized();
    const GpKernel defaults{1.0, 1.0, 1e-6};
    // recompute default lml through the public surface: fit a model with one
    // point short of optimization is not possible, so compare via predict's
    // internals indirectly: the fit keeps the best of all restarts, whose
    // first candidate is exactly `defaults`
    CHECK(model.log_marginal() >= -1e9);  // finite
    // direct comparison using the same formula
    const std::size_t n = xs.size();
    std::vector<double> gram(n * n);
    const auto& tx = model.train_x();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram[i * n + j] = matern52(tx[i], tx[j], defaults) + (i == j ? defaults.noise2 : 0.0);
    // naive logdet/quad via Gaussian elimination on the augmented system
    const auto [mu0, sd0] = dense_posterior(tx, ys_std, defaults, tx[0]);
    (void)mu0;
    (void)sd0;
    // the pattern search starts at the defaults, so lml(model) >= lml(defaults):
    // verify by evaluating the default lml with the dense oracle pieces
    // (quad term and determinant via LU)
    std::vector<double> lu = gram;
    double logdet = 0.0;
    Vec y2 = ys_std;
    for (std::size_t col = 0; col < n; ++col) {
        logdet += std::log(std::fabs(lu[col * n + col]));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = lu[r * n + col] / lu[col * n + col];
            for (std::size_t c = col; c < n; ++c) lu[r * n + c] -= f * lu[col * n + c];
            y2[r] -= f * y2[col];
        }
    }
    double quad = 0.0;
    {
        Vec alpha(n);
        for (std::size_t i = n; i-- > 0;) {
            double s = y2[i];
            for (std::size_t c = i + 1; c < n; ++c) s -= lu[i * n + c] * alpha[c];
            alpha[i] = s / lu[i * n + i];
        }
        for (std::size_t i = 0; i < n; ++i) quad += alpha[i] * ys_std[i];
    }
    const double default_lml =
        -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
    CHECK(model.log_marginal() >= default_lml - 1e-9);
}

TEST_CASE("posterior matches the dense oracle on random small problems") {
    Rng rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng.index(8));  // 3..10 points
        std::vector<Vec> xs;
        Vec ys;
        for (int i = 0; i < n; ++i) {
            xs.push_back({rng.uniform(), rng.uniform()});
            ys.push_back(rng.uniform(-2, 2));
        }
        const GpModel model = GpModel::fit(xs, ys);
        for (int probe = 0; probe < 5; ++probe) {
            const Vec x{rng.uniform(), rng.uniform()};
            const auto [mu, sd] = model.predict(x);
            const auto [omu, osd] =
                dense_posterior(model.train_x(), model.train_y_standardized(), model.kernel(), x);
            CHECK(mu == doctest::Approx(model.y_mean() + model.y_std() * omu).epsilon(1e-8));
            CHECK(sd == doctest::Approx(model.y_std() * osd).epsilon(1e-8));
        }
    }
}

TEST_CASE("prediction at a training point reproduces the target; far away it reverts") {
    std::vector<Vec> xs{{0.1, 0.1}, {0.2, 0.3}, {0.3, 0.15}};
    Vec ys{1.0, 2.0, 1.4};
    const GpModel model = GpModel::fit(xs, ys);
    const auto [mu, sd] = model.predict(xs[1]);
    CHECK(mu == doctest::Approx(2.0).epsilon(3.0 * std::sqrt(model.kernel().noise2) + 1e-2));
    (void)sd;

    const auto [far_mu, far_sd] = model.predict({100.0, 100.0});
    CHECK(far_mu == doctest::Approx(model.y_mean()).epsilon(1e-9));
    CHECK(far_sd ==
          doctest::Approx(model.y_std() * std::sqrt(model.kernel().sigma2)).epsilon(1e-9));
}

TEST_CASE("single-sample fit falls back to fixed hyper-parameters") {
    const GpModel model = GpModel::fit({{0.5, 0.5}}, {3.0});
    CHECK(model.kernel().length == 1.0);
    CHECK(model.kernel().sigma2 == 1.0);
    CHECK(model.kernel().noise2 == 1e-6);
    const auto [mu, sd] = model.predict({0.5, 0.5});
    CHECK(mu == doctest::Approx(3.0).epsilon(1e-3));
    (void)sd;
}

TEST_CASE("duplicate inputs are collapsed keeping the best target") {
    const GpModel model = GpModel::fit({{0.5}, {0.5}, {0.7}}, {1.0, 4.0, 2.0});
    CHECK(model.size() == 2);
    const auto [mu, sd] = model.predict({0.5});
    CHECK(mu == doctest::Approx(4.0).epsilon(0.05));
    (void)sd;
}

TEST_CASE("expected improvement closed-form values") {
    CHECK(expected_improvement(1.0, 0.0, 1.0) == 0.0);
    CHECK(expected_improvement(0.5, 0.0, 1.0) == 0.0);
    CHECK(expected_improvement(2.0, 0.0, 1.0) == 1.0);
    // mean = y_best, std = 1: EI = phi(0) = 1/sqrt(2 pi)
    CHECK(expected_improvement(1.0, 1.0, 1.0) ==
          doctest::Approx(0.3989422804014327).epsilon(1e-9));
    // monotone in std at fixed mean = y_best
    double prev = 0.0;
    for (double s = 0.1; s <= 2.0; s += 0.1) {
        const double ei = expected_improvement(0.0, s, 0.0);
        CHECK(ei > prev);
        prev = ei;
    }
    // EI >= 0 everywhere
    Rng rng(3);
    for (int i = 0; i < 1000; ++i)
        CHECK(expected_improvement(rng.uniform(-5, 5), rng.uniform(0, 3), rng.uniform(-5, 5)) >=
              0.0);
}

TEST_CASE("propose_candidate maximizes EI over the retained candidates") {
    Rng data_rng(5);
    std::vector<Vec> xs;
    Vec ys;
    for (int i = 0; i < 12; ++i) {
        const Vec x{data_rng.uniform(), data_rng.uniform()};
        ys.push_back(-((x[0] - 0.3) * (x[0] - 0.3) + (x[1] - 0.6) * (x[1] - 0.6)));
        xs.push_back(x);
    }
    const GpModel model = GpModel::fit(xs, ys);
    const double y_best = *std::max_element(ys.begin(), ys.end());
    const SearchDomain domain({0.0, 0.0}, {1.0, 1.0});

    Rng rng_a(99);
    const Vec chosen = propose_candidate(model, domain, RegionPath{}, y_best, rng_a);
    // exhaustively re-enumerate the identical candidate batch
    Rng rng_b(99);
    const auto candidates = sample_in_region(domain, RegionPath{}, rng_b);
    const auto [cmu, csd] = model.predict(chosen);
    const double chosen_ei = expected_improvement(cmu, csd, y_best);
    for (const auto& c : candidates) {
        const auto [mu, sd] = model.predict(c);
        CHECK(chosen_ei >= expected_improvement(mu, sd, y_best) - 1e-15);
    }
}
