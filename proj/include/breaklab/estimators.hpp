#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "breaklab/dgp.hpp"

namespace breaklab {

/// Relative pivot threshold below which a design is declared rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Least-squares fit of y on X.
struct OlsFit {
    Eigen::VectorXd beta_hat;
    Eigen::VectorXd residuals;
    /// (1/T) * sum of squared residuals.
    double sigma_hat_sq = 0.0;
    /// X'X.
    Eigen::MatrixXd xtx;
    /// Design the fit was computed on; needed for the weighted partial sums.
    Eigen::MatrixXd design;
    std::string sample_ref;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(residuals.size()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(beta_hat.size()); }
};

/// Fits on rows 1..k and k+1..T separately, plus the pooled fit on all rows.
struct SplitFit {
    std::size_t k = 0;
    OlsFit fit_pre;
    OlsFit fit_post;
    OlsFit pooled_null_fit;
};

/// Throws SingularMatrixError naming the first dependent column when X is rank deficient,
/// SpecError on shape mismatch.
[[nodiscard]] OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                             std::string sample_ref = {});
[[nodiscard]] OlsFit ols_fit(const Sample& sample, std::string sample_ref = {});

/// Requires p <= k <= T - p; throws BreakIndexError otherwise.
[[nodiscard]] SplitFit split_fit(const Sample& sample, std::size_t k);

/// Row t holds S_t = sum_{j<=t} x_j * e_j (T x p). With X = ones this is the plain
/// cumulative sum of the residuals.
[[nodiscard]] Eigen::MatrixXd residual_partial_sums(const OlsFit& fit);
[[nodiscard]] Eigen::MatrixXd residual_partial_sums(const Eigen::VectorXd& residuals,
                                                    const Eigen::MatrixXd& X);

/// T^-2 * sum_t S_t S_t' (p x p, symmetric positive semi-definite).
[[nodiscard]] Eigen::MatrixXd partial_sum_covariance(const OlsFit& fit);

}  // namespace breaklab
