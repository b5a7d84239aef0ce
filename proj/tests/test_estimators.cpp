#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "breaklab/dgp.hpp"
#include "breaklab/errors.hpp"
#include "breaklab/estimators.hpp"

using namespace breaklab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

Sample random_regression(std::uint64_t id, std::size_t T, std::size_t p) {
    DgpSpec d;
    d.family = Family::LinearRegression;
    d.T = T;
    d.params_pre.assign(p, 0.7);
    d.params_post = d.params_pre;
    RandomStream s = derive_stream({314, id});
    return gen_linear_regression(d, s);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[(v.size() - 1) / 2] + v[v.size() / 2]);
}

}  // namespace

TEST_CASE("ols on an intercept is the sample mean") {
    const OlsFit f = ols_fit(make_sample(vec({1, 2, 3})));
    CHECK(f.beta_hat[0] == doctest::Approx(2.0));
    CHECK(f.residuals[0] == doctest::Approx(-1.0));
    CHECK(f.residuals[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.residuals[2] == doctest::Approx(1.0));
    CHECK(f.sigma_hat_sq == doctest::Approx(2.0 / 3.0));

    const OlsFit g = ols_fit(make_sample(vec({0, 0, 2, 2})));
    CHECK(g.beta_hat[0] == doctest::Approx(1.0));
    CHECK(g.sigma_hat_sq == doctest::Approx(1.0));
    CHECK(g.xtx(0, 0) == 4.0);
}

TEST_CASE("noiseless data interpolate") {
    Eigen::MatrixXd X(5, 2);
    X << 1, 0.5, 1, -1, 1, 2, 1, 3, 1, -0.25;
    const Eigen::VectorXd y = X * vec({1.5, -2.0});
    const OlsFit f = ols_fit(y, X);
    CHECK(f.residuals.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(f.sigma_hat_sq < 1e-24);
    CHECK(f.beta_hat[1] == doctest::Approx(-2.0));
}

TEST_CASE("normal equations hold (property)") {
    for (std::uint64_t id = 0; id < 200; ++id) {
        const std::size_t p = 1 + id % 4;
        const Sample x = random_regression(id, 30 + id, p);
        const OlsFit f = ols_fit(x);
        const double tol = 1e-8 * x.y.norm();
        CHECK((x.X.transpose() * f.residuals).cwiseAbs().maxCoeff() <= tol);
        CHECK(f.sigma_hat_sq >= 0.0);
        // Intercept in the design: the plain partial sums end at zero.
        CHECK(std::abs(residual_partial_sums(f)(f.residuals.size() - 1, 0)) <= tol);
    }
}

TEST_CASE("rank-deficient design names the dependent column") {
    Eigen::MatrixXd X(6, 3);
    X.col(0).setOnes();
    X.col(1) << 1, 2, 3, 4, 5, 6;
    X.col(2) = 2.0 * X.col(1);
    const Eigen::VectorXd y = vec({1, 0, 1, 0, 1, 3});
    try {
        (void)ols_fit(y, X);
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        CHECK((e.column() == 1 || e.column() == 2));
        CHECK(std::string(e.what()).find("column") != std::string::npos);
    }
    CHECK_THROWS_AS((void)ols_fit(vec({1, 2}), Eigen::MatrixXd::Ones(2, 3)), SingularMatrixError);
}

TEST_CASE("split fit") {
    const Sample x = make_sample(vec({0, 0, 2, 2}));
    const SplitFit sf = split_fit(x, 2);
    CHECK(sf.fit_pre.beta_hat[0] == doctest::Approx(0.0));
    CHECK(sf.fit_post.beta_hat[0] == doctest::Approx(2.0));
    CHECK(sf.pooled_null_fit.beta_hat[0] == doctest::Approx(1.0));

    CHECK_NOTHROW((void)split_fit(x, 1));
    CHECK_THROWS_AS((void)split_fit(x, 0), BreakIndexError);
    CHECK_THROWS_AS((void)split_fit(x, 4), BreakIndexError);
    const Sample r = random_regression(1, 10, 3);
    CHECK_THROWS_AS((void)split_fit(r, 2), BreakIndexError);
    CHECK_THROWS_AS((void)split_fit(r, 8), BreakIndexError);
    CHECK_NOTHROW((void)split_fit(r, 3));
    CHECK_NOTHROW((void)split_fit(r, 7));
}

TEST_CASE("regime estimates agree at rate 1/sqrt(T) under the null") {
    std::vector<double> medians;
    for (std::size_t T : {100, 400, 1600}) {
        DgpSpec d;
        d.family = Family::Location;
        d.T = T;
        d.params_pre = d.params_post = {0.4};
        std::vector<double> gaps;
        for (std::uint64_t r = 0; r < 1000; ++r) {
            RandomStream s = derive_stream({kDefaultSeed, r});
            const SplitFit sf = split_fit(gen_location(d, s), T / 2);
            gaps.push_back(std::abs(sf.fit_pre.beta_hat[0] - sf.fit_post.beta_hat[0]));
        }
        medians.push_back(median(gaps));
    }
    // Quadrupling T halves the typical gap.
    CHECK(medians[0] / medians[1] == doctest::Approx(2.0).epsilon(0.2));
    CHECK(medians[1] / medians[2] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("indicator-partitioned designs are orthogonal") {
    const Sample x = random_regression(17, 40, 3);
    const Eigen::Index k = 15;
    Eigen::MatrixXd X1 = x.X;
    Eigen::MatrixXd X2 = x.X;
    X1.bottomRows(40 - k).setZero();
    X2.topRows(k).setZero();
    CHECK((X1.transpose() * X2).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd G = x.X.transpose() * x.X;
    CHECK((G - (X1.transpose() * X1 + X2.transpose() * X2)).cwiseAbs().maxCoeff() <= 1e-12 * G.norm());
}

TEST_CASE("pooled residual sum of squares dominates the regime sums (property)") {
    for (std::uint64_t id = 0; id < 100; ++id) {
        const Sample x = random_regression(id, 60, 2);
        const std::size_t k = 5 + id % 50;
        const SplitFit sf = split_fit(x, k);
        const double pooled = sf.pooled_null_fit.residuals.squaredNorm();
        const double split = sf.fit_pre.residuals.squaredNorm() + sf.fit_post.residuals.squaredNorm();
        CHECK(pooled >= split - 1e-10 * pooled);
    }
}

TEST_CASE("residual partial sums") {
    OlsFit f;
    f.beta_hat = vec({0});
    f.residuals = vec({-1, -1, 1, 1});
    f.design = Eigen::MatrixXd::Ones(4, 1);
    const Eigen::MatrixXd S = residual_partial_sums(f);
    CHECK(S(0, 0) == -1.0);
    CHECK(S(1, 0) == -2.0);
    CHECK(S(2, 0) == -1.0);
    CHECK(S(3, 0) == 0.0);
    CHECK(partial_sum_covariance(f)(0, 0) == doctest::Approx(0.375));

    f.residuals.setZero();
    CHECK(residual_partial_sums(f).cwiseAbs().maxCoeff() == 0.0);
    CHECK(partial_sum_covariance(f)(0, 0) == 0.0);

    // Weighted sums use x_j * e_j.
    Eigen::MatrixXd X(3, 2);
    X << 1, 2, 1, -1, 1, 0.5;
    const Eigen::MatrixXd W = residual_partial_sums(vec({1, 2, -4}), X);
    CHECK(W(2, 0) == -1.0);
    CHECK(W(1, 1) == 0.0);
    CHECK(W(2, 1) == -2.0);
}

TEST_CASE("partial sum covariance is symmetric PSD and sign invariant (property)") {
    for (std::uint64_t id = 0; id < 50; ++id) {
        const Sample x = random_regression(id, 80, 3);
        OlsFit f = ols_fit(x);
        const Eigen::MatrixXd C = partial_sum_covariance(f);
        CHECK((C - C.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12 * C.norm());
        f.residuals = -f.residuals;
        CHECK((partial_sum_covariance(f) - C).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + C.norm()));
    }
}

TEST_CASE("partial sum covariance approaches the Cramer-von Mises mean") {
    DgpSpec d;
    d.family = Family::Location;
    d.T = 1000;
    d.params_pre = d.params_post = {0.0};
    double sum = 0.0;
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) {
        RandomStream s = derive_stream({kDefaultSeed, static_cast<std::uint64_t>(r)});
        const OlsFit f = ols_fit(gen_location(d, s));
        sum += partial_sum_covariance(f)(0, 0) / f.sigma_hat_sq;
    }
    CHECK(sum / reps == doctest::Approx(1.0 / 6.0).epsilon(0.02));
}
