#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "breaklab/rng.hpp"

namespace breaklab {

enum class Family { Location, LinearRegression, Cointegration, PredictiveLUR, AR1 };

[[nodiscard]] std::string_view to_string(Family f);
/// Accepts the names printed by to_string, case-insensitively. Throws SpecError.
[[nodiscard]] Family parse_family(std::string_view name);

/// Parametric description of a data-generating process with at most one break.
///
/// The regime boundary is k = floor(T * s): rows t <= k use params_pre, rows t > k use
/// params_post (1-based t). s = 0 or s = 1 means no break. For 0 < s < 1, k is clamped
/// to [1, T-1].
///
/// Persistent regressors use rho = 1 + c / T, so c < 0 is near-stationary and c = 0 is a
/// unit root.
///
/// Meaning of params per family:
///   Location          mean (p = 1)
///   LinearRegression  coefficients on [1, x2, ..., xp], x's i.i.d. N(0, 1)
///   Cointegration     beta in y_t = beta x_t + u_t, x_t = x_{t-1} + eps_t (p = 1)
///   PredictiveLUR     slope beta in y_t = mu + beta x_{t-1} + eps_t (p = 1)
///   AR1               shift added to the autoregressive root 1 + c/T (p = 1)
struct DgpSpec {
    Family family = Family::Location;
    std::size_t T = 100;
    double s = 0.0;
    std::vector<double> params_pre{0.0};
    std::vector<double> params_post{0.0};
    InnovCov cov{};
    double persistence_c = 0.0;
    double mu = 0.0;
    double x0 = 0.0;
    /// PredictiveLUR: put an intercept column in front of x_{t-1}.
    bool fit_intercept = true;

    /// Throws SpecError naming the offending field.
    void validate() const;

    [[nodiscard]] bool is_null() const { return params_pre == params_post; }

    /// Last row of the first regime, 0 when there is no break.
    [[nodiscard]] std::size_t break_index() const;

    /// 1 + c / T.
    [[nodiscard]] double rho() const { return 1.0 + persistence_c / static_cast<double>(T); }

    friend bool operator==(const DgpSpec&, const DgpSpec&) = default;
};

/// Quantities derived from the generating spec, kept with each sample.
struct Truth {
    DgpSpec spec;
    std::size_t k = 0;
    double rho = 1.0;
    double phi = 0.0;
    double sigma_v_sq = 0.0;
};

/// One dataset: y has length T, X is T x p.
struct Sample {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    Truth truth;
    std::optional<InnovationPairs> innovations;
    /// Full regressor path where it differs from X (integrated / LUR families).
    std::optional<std::vector<double>> regressor;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(y.size()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(X.cols()); }
};

/// Wrap user-supplied data. An empty X means intercept only.
[[nodiscard]] Sample make_sample(Eigen::VectorXd y, Eigen::MatrixXd X = {});

// Generators. Each draws T innovation pairs from the stream (LinearRegression also
// draws its regressors afterwards) and stores them in Sample::innovations.
[[nodiscard]] Sample gen_location(const DgpSpec& spec, RandomStream& stream);
[[nodiscard]] Sample gen_linear_regression(const DgpSpec& spec, RandomStream& stream);
[[nodiscard]] Sample gen_cointegration(const DgpSpec& spec, RandomStream& stream);
[[nodiscard]] Sample gen_predictive_lur(const DgpSpec& spec, RandomStream& stream);
[[nodiscard]] Sample gen_ar1(const DgpSpec& spec, RandomStream& stream);

/// Dispatch on spec.family.
[[nodiscard]] Sample generate(const DgpSpec& spec, RandomStream& stream);

// Deterministic builders from given innovations, used by the generators and by
// tests that force the innovation sequence.
[[nodiscard]] Sample build_location(const DgpSpec& spec, InnovationPairs innov);
[[nodiscard]] Sample build_linear_regression(const DgpSpec& spec, InnovationPairs innov,
                                             const Eigen::MatrixXd& regressors);
[[nodiscard]] Sample build_cointegration(const DgpSpec& spec, InnovationPairs innov);
[[nodiscard]] Sample build_predictive_lur(const DgpSpec& spec, InnovationPairs innov);
[[nodiscard]] Sample build_ar1(const DgpSpec& spec, InnovationPairs innov);

}  // namespace breaklab
