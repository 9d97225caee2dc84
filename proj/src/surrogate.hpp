#pragma once

#include <utility>
#include <vector>

#include "core.hpp"
#include "partition.hpp"
#include "rng.hpp"

namespace mtbo {

struct GpKernel {
    double sigma2 = 1.0;  // signal variance
    double length = 1.0;  // isotropic length scale
    double noise2 = 1e-6;
};

/// Matern-5/2 covariance between two points.
double matern52(const Vec& a, const Vec& b, const GpKernel& k);

/// Gaussian-process regression with a Matern-5/2 kernel. Targets are
/// standardized internally; hyper-parameters are fit by maximizing the log
/// marginal likelihood with a 5-restart pattern search in log space
/// (sigma2, length in [1e-3, 1e3]; noise2 in [1e-8, 1e-1]). The Cholesky
/// factor of K + noise2*I is kept for prediction; jitter is doubled from
/// 1e-10 until the factorization succeeds.
class GpModel {
public:
    /// Duplicate inputs are collapsed keeping the best target. Fewer than
    /// two distinct samples yields fixed default hyper-parameters.
    static GpModel fit(const std::vector<Vec>& xs, const Vec& ys);

    /// Posterior (mean, std) in the original target scale; std >= 0.
    std::pair<double, double> predict(const Vec& x) const;

    const GpKernel& kernel() const { return kernel_; }
    double y_mean() const { return y_mean_; }
    double y_std() const { return y_sd_; }
    std::size_t size() const { return x_.size(); }
    double log_marginal() const { return lml_; }
    const std::vector<Vec>& train_x() const { return x_; }
    const Vec& train_y_standardized() const { return y_; }

private:
    std::vector<Vec> x_;
    Vec y_;               // standardized
    Vec alpha_;           // (K + noise2 I)^{-1} y
    std::vector<double> chol_;  // lower triangular, row-major n x n
    GpKernel kernel_;
    double y_mean_ = 0.0;
    double y_sd_ = 1.0;
    double lml_ = 0.0;

    void factorize();
};

double normal_pdf(double z);
double normal_cdf(double z);

/// EI for maximization with exploration offset 0; the std = 0 limit is
/// max(0, mean - y_best).
double expected_improvement(double mean, double std, double y_best);

/// Draws candidates inside the leaf region (3 x 10,000 rejection rounds with
/// the near-miss fallback) and returns the one maximizing EI, first
/// occurrence winning ties.
Vec propose_candidate(const GpModel& model, const SearchDomain& domain, const RegionPath& path,
                      double y_best, Rng& rng);

/// Argmax-EI over an explicit candidate set (first occurrence wins ties).
std::size_t argmax_ei(const GpModel& model, const std::vector<Vec>& candidates, double y_best);

}  // namespace mtbo
