#include "surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mtbo {

namespace {

constexpr double kLogBoundLo = -6.907755278982137;   // ln 1e-3
constexpr double kLogBoundHi = 6.907755278982137;    // ln 1e3
constexpr double kLogNoiseLo = -18.420680743952367;  // ln 1e-8
constexpr double kLogNoiseHi = -2.302585092994046;   // ln 1e-1

double sq_norm_diff(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return s;
}

/// Lower-triangular Cholesky of K + (noise2 + jitter) I; returns false when
/// a pivot goes non-positive.
bool cholesky(const std::vector<double>& gram, std::size_t n, double diag_add,
              std::vector<double>& out) {
    out.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = gram[i * n + j] + (i == j ? diag_add : 0.0);
            for (std::size_t k = 0; k < j; ++k) s -= out[i * n + k] * out[j * n + k];
            if (i == j) {
                if (s <= 0.0) return false;
                out[i * n + i] = std::sqrt(s);
            } else {
                out[i * n + j] = s / out[j * n + j];
            }
        }
    }
    return true;
}

void solve_lower(const std::vector<double>& chol, std::size_t n, Vec& b) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol[i * n + k] * b[k];
        b[i] = s / chol[i * n + i];
    }
}

void solve_upper_from_lower(const std::vector<double>& chol, std::size_t n, Vec& b) {
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= chol[k * n + ii] * b[k];
        b[ii] = s / chol[ii * n + ii];
    }
}

struct LmlEval {
    double value = -std::numeric_limits<double>::infinity();
    bool ok = false;
};

LmlEval log_marginal_likelihood(const std::vector<Vec>& xs, const Vec& ys, const GpKernel& k) {
    const std::size_t n = xs.size();
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            gram[i * n + j] = gram[j * n + i] = matern52(xs[i], xs[j], k);

    std::vector<double> chol;
    double jitter = 0.0;
    bool ok = cholesky(gram, n, k.noise2, chol);
    for (double j = 1e-10; !ok && j < 1.0; j *= 2.0) {
        jitter = j;
        ok = cholesky(gram, n, k.noise2 + jitter, chol);
    }
    if (!ok) return {};

    Vec alpha = ys;
    solve_lower(chol, n, alpha);
    double quad = 0.0;
    double logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        quad += alpha[i] * alpha[i];
        logdet += std::log(chol[i * n + i]);
    }
    LmlEval res;
    res.ok = true;
    res.value = -0.5 * quad - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
    return res;
}

}  // namespace

double matern52(const Vec& a, const Vec& b, const GpKernel& k) {
    const double r = std::sqrt(sq_norm_diff(a, b));
    const double u = std::sqrt(5.0) * r / k.length;
    return k.sigma2 * (1.0 + u + u * u / 3.0) * std::exp(-u);
}

GpModel GpModel::fit(const std::vector<Vec>& xs, const Vec& ys) {
    if (xs.empty() || xs.size() != ys.size())
        throw std::invalid_argument("GpModel::fit: need at least one sample");

    // collapse exact-duplicate inputs, keeping the best target
    std::map<Vec, double> dedup;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        auto [it, inserted] = dedup.emplace(xs[i], ys[i]);
        if (!inserted) it->second = std::max(it->second, ys[i]);
    }
    GpModel m;
    // preserve first-occurrence order of the distinct points
    for (const auto& x : xs) {
        auto it = dedup.find(x);
        if (it != dedup.end()) {
            m.x_.push_back(it->first);
            m.y_.push_back(it->second);
            dedup.erase(it);
        }
    }

    const std::size_t n = m.x_.size();
    m.y_mean_ = 0.0;
    for (double v : m.y_) m.y_mean_ += v;
    m.y_mean_ /= static_cast<double>(n);
    double var = 0.0;
    for (double v : m.y_) var += (v - m.y_mean_) * (v - m.y_mean_);
    var /= static_cast<double>(n);
    m.y_sd_ = var > 0.0 ? std::sqrt(var) : 1.0;
    for (double& v : m.y_) v = (v - m.y_mean_) / m.y_sd_;

    if (n < 2) {
        m.kernel_ = GpKernel{1.0, 1.0, 1e-6};
        m.factorize();
        return m;
    }

    // multi-start pattern search on (ln sigma2, ln length, ln noise2)
    const double starts[5][3] = {
        {0.0, 0.0, std::log(1e-6)},          {0.0, std::log(0.3), std::log(1e-4)},
        {0.0, std::log(3.0), std::log(1e-2)}, {std::log(10.0), std::log(0.1), std::log(1e-6)},
        {std::log(0.1), 0.0, std::log(1e-3)}};
    const double lo[3] = {kLogBoundLo, kLogBoundLo, kLogNoiseLo};
    const double hi[3] = {kLogBoundHi, kLogBoundHi, kLogNoiseHi};

    auto eval = [&](const double* p) {
        GpKernel k{std::exp(p[0]), std::exp(p[1]), std::exp(p[2])};
        return log_marginal_likelihood(m.x_, m.y_, k);
    };

    double best_p[3] = {starts[0][0], starts[0][1], starts[0][2]};
    double best_v = -std::numeric_limits<double>::infinity();

    for (const auto& s : starts) {
        double p[3] = {s[0], s[1], s[2]};
        LmlEval cur = eval(p);
        if (!cur.ok) continue;
        double step = 1.0;
        int evals = 0;
        while (step >= 0.1 && evals < 60) {
            bool improved = false;
            for (int c = 0; c < 3; ++c) {
                for (double dir : {+1.0, -1.0}) {
                    double trial[3] = {p[0], p[1], p[2]};
                    trial[c] = std::clamp(trial[c] + dir * step, lo[c], hi[c]);
                    if (trial[c] == p[c]) continue;
                    LmlEval v = eval(trial);
                    ++evals;
                    if (v.ok && v.value > cur.value) {
                        p[c] = trial[c];
                        cur = v;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        if (cur.value > best_v) {
            best_v = cur.value;
            best_p[0] = p[0];
            best_p[1] = p[1];
            best_p[2] = p[2];
        }
    }

    m.kernel_ = GpKernel{std::exp(best_p[0]), std::exp(best_p[1]), std::exp(best_p[2])};
    m.factorize();
    return m;
}

void GpModel::factorize() {
    const std::size_t n = x_.size();
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            gram[i * n + j] = gram[j * n + i] = matern52(x_[i], x_[j], kernel_);

    bool ok = cholesky(gram, n, kernel_.noise2, chol_);
    for (double j = 1e-10; !ok && j < 1.0; j *= 2.0)
        ok = cholesky(gram, n, kernel_.noise2 + j, chol_);
    if (!ok) throw std::runtime_error("GpModel: factorization failed after jitter escalation");

    alpha_ = y_;
    solve_lower(chol_, n, alpha_);
    double quad = 0.0;
    double logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        quad += alpha_[i] * alpha_[i];
        logdet += std::log(chol_[i * n + i]);
    }
    lml_ = -0.5 * quad - logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
    solve_upper_from_lower(chol_, n, alpha_);  // alpha = (K + noise2 I)^{-1} y
}

std::pair<double, double> GpModel::predict(const Vec& x) const {
    const std::size_t n = x_.size();
    Vec kstar(n);
    for (std::size_t i = 0; i < n; ++i) kstar[i] = matern52(x, x_[i], kernel_);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += kstar[i] * alpha_[i];
    Vec v = kstar;
    solve_lower(chol_, n, v);
    double var = kernel_.sigma2;
    for (std::size_t i = 0; i < n; ++i) var -= v[i] * v[i];
    var = std::max(var, 0.0);
    return {y_mean_ + y_sd_ * mean, y_sd_ * std::sqrt(var)};
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double expected_improvement(double mean, double std, double y_best) {
    if (std <= 0.0) return std::max(0.0, mean - y_best);
    const double z = (mean - y_best) / std;
    return (mean - y_best) * normal_cdf(z) + std * normal_pdf(z);
}

std::size_t argmax_ei(const GpModel& model, const std::vector<Vec>& candidates, double y_best) {
    double best_ei = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto [mu, sd] = model.predict(candidates[i]);
        const double ei = expected_improvement(mu, sd, y_best);
        if (ei > best_ei) {
            best_ei = ei;
            best_i = i;
        }
    }
    return best_i;
}

Vec propose_candidate(const GpModel& model, const SearchDomain& domain, const RegionPath& path,
                      double y_best, Rng& rng) {
    const auto candidates = sample_in_region(domain, path, rng);
    return candidates[argmax_ei(model, candidates, y_best)];
}

}  // namespace mtbo
