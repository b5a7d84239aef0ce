#include "breaklab/estimators.hpp"

#include <fmt/format.h>

#include "breaklab/errors.hpp"

namespace breaklab {

OlsFit ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, std::string sample_ref) {
    if (X.rows() != y.size()) {
        throw SpecError(fmt::format("X: {} rows but y has {} entries", X.rows(), y.size()));
    }
    if (X.cols() == 0) throw SpecError("X: design has no columns");
    if (X.rows() < X.cols()) {
        throw SingularMatrixError(
            fmt::format("design: {} rows cannot identify {} coefficients", X.rows(), X.cols()),
            static_cast<long>(X.rows()));
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.rows(), X.cols());
    qr.setThreshold(kRankTolerance);
    qr.compute(X);
    if (qr.rank() < X.cols()) {
        const auto col = qr.colsPermutation().indices()[qr.rank()];
        throw SingularMatrixError(
            fmt::format("design: column {} (x{}) is linearly dependent on the others (rank {} of {})",
                        col, col + 1, qr.rank(), X.cols()),
            static_cast<long>(col));
    }

    OlsFit fit;
    fit.beta_hat = qr.solve(y);
    fit.residuals = y - X * fit.beta_hat;
    fit.sigma_hat_sq = fit.residuals.squaredNorm() / static_cast<double>(y.size());
    fit.xtx = X.transpose() * X;
    fit.design = X;
    fit.sample_ref = std::move(sample_ref);
    return fit;
}

OlsFit ols_fit(const Sample& sample, std::string sample_ref) {
    return ols_fit(sample.y, sample.X, std::move(sample_ref));
}

SplitFit split_fit(const Sample& sample, std::size_t k) {
    const std::size_t T = sample.size();
    const std::size_t p = sample.dim();
    if (k < p || k < 1 || k + p > T) {
        throw BreakIndexError(fmt::format("k: break index {} outside admissible range [{}, {}]", k,
                                          std::max<std::size_t>(p, 1), T >= p ? T - p : 0));
    }
    const auto kk = static_cast<Eigen::Index>(k);
    const auto rest = static_cast<Eigen::Index>(T - k);
    SplitFit out;
    out.k = k;
    out.fit_pre = ols_fit(sample.y.head(kk), sample.X.topRows(kk), "pre");
    out.fit_post = ols_fit(sample.y.tail(rest), sample.X.bottomRows(rest), "post");
    out.pooled_null_fit = ols_fit(sample, "pooled");
    return out;
}

Eigen::MatrixXd residual_partial_sums(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& X) {
    if (X.rows() != residuals.size()) {
        throw SpecError(fmt::format("X: {} rows but {} residuals", X.rows(), residuals.size()));
    }
    Eigen::MatrixXd S(X.rows(), X.cols());
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(X.cols());
    for (Eigen::Index t = 0; t < X.rows(); ++t) {
        acc += residuals[t] * X.row(t);
        S.row(t) = acc;
    }
    return S;
}

Eigen::MatrixXd residual_partial_sums(const OlsFit& fit) {
    return residual_partial_sums(fit.residuals, fit.design);
}

Eigen::MatrixXd partial_sum_covariance(const OlsFit& fit) {
    const Eigen::MatrixXd S = residual_partial_sums(fit);
    const double T = static_cast<double>(S.rows());
    Eigen::MatrixXd C = S.transpose() * S / (T * T);
    return 0.5 * (C + C.transpose());
}

}  // namespace breaklab
