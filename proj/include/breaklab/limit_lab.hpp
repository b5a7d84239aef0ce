#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "breaklab/rng.hpp"

namespace breaklab {

/// Default grid resolution for tabulation.
inline constexpr std::size_t kDefaultSteps = 2000;

/// A process sampled on the uniform grid 0, 1/n, ..., 1. Row j of `values` is
/// coordinate j, so a scalar process is a 1 x (n+1) matrix.
struct PathGrid {
    std::size_t n_steps = 0;
    Eigen::MatrixXd values;

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] double operator()(std::size_t i) const { return values(0, static_cast<Eigen::Index>(i)); }
    [[nodiscard]] double at(std::size_t coord, std::size_t i) const {
        return values(static_cast<Eigen::Index>(coord), static_cast<Eigen::Index>(i));
    }
};

/// Grid indices i with nu <= i/n <= 1 - nu (a 1e-9 slack absorbs rounding in nu * n).
struct GridRange {
    std::size_t first = 0;
    std::size_t last = 0;
};
[[nodiscard]] GridRange trimmed_range(std::size_t n_steps, double nu);

/// Standard Brownian motion in `dim` independent coordinates, increments N(0, 1/n).
[[nodiscard]] PathGrid simulate_brownian(std::size_t n_steps, std::size_t dim, RandomStream& stream);

/// W(s) - s W(1) applied coordinate-wise.
[[nodiscard]] PathGrid to_bridge(const PathGrid& brownian);

/// One standard Brownian bridge. Requires n_steps >= 2.
[[nodiscard]] PathGrid simulate_bridge(std::size_t n_steps, RandomStream& stream);

/// max |path(i)| over the trimmed grid (coordinate 0).
[[nodiscard]] double sup_abs(const PathGrid& path, double nu);

/// Q_p(pi) = |BB_p(pi)|^2 / (pi (1 - pi)) at interior grid points; entries 0 and n are NaN.
[[nodiscard]] std::vector<double> qp_path(const PathGrid& bridges);

/// One draw of sup |BB| over [nu, 1 - nu].
[[nodiscard]] double simulate_sup_abs_bridge(std::size_t n_steps, double nu, RandomStream& stream);

/// One draw of sup Q_p(pi) over grid points in [nu, 1 - nu]. Requires 0 < nu < 0.5.
[[nodiscard]] double simulate_qp_sup(std::size_t p, double nu, std::size_t n_steps, RandomStream& stream);

/// Exact-discretization Ornstein-Uhlenbeck recursion
///   J(t + dt) = e^{c dt} J(t) + eta,  eta ~ N(0, (e^{2 c dt} - 1) / (2c)),
/// with variance dt at c = 0. Advances `steps` steps from `start` and returns the
/// visited values including `start`.
[[nodiscard]] std::vector<double> ou_advance(double c, double dt, std::size_t steps, double start,
                                             RandomStream& stream);

/// J_c on [0, 1] started at 0.
[[nodiscard]] PathGrid simulate_ou(double c, std::size_t n_steps, RandomStream& stream);

/// Variance of one exact OU step of length dt.
[[nodiscard]] double ou_step_variance(double c, double dt);

/// Components of the persistence-contaminated CUSUM limit on one grid.
struct LurCusumLimitPath {
    std::vector<double> bridge;      ///< W(r) - r W(1), W driven by B_eps
    std::vector<double> correction;  ///< Jt(c; r) - r Jt(c; 1)
    std::vector<double> jtilde;      ///< Jt(c; r)
};

/// Simulates one path of [W(r) - r W(1)] - [Jt(c; r) - r Jt(c; 1)] where
///   Jt(c; r) = (int_0^r J_c dB_u / int_0^1 J_c^2) * int_0^r J_c,
/// J_c is driven by B_u, and corr(B_eps, B_u) = corr. Integrals are left-point sums.
[[nodiscard]] LurCusumLimitPath simulate_lur_cusum_path(double c, double corr, std::size_t n_steps,
                                                        RandomStream& stream);

/// One draw of sup_r |bridge - correction| over [nu, 1 - nu].
[[nodiscard]] double simulate_lur_cusum_limit(double c, double corr, std::size_t n_steps,
                                              RandomStream& stream, double nu = 0.0);

/// One draw of the limit of the t-statistic for beta = 0 in the cointegrating regression,
/// with unit innovation variances:
///   (phi/2) [W(1)^2 + 1] (int W^2)^{-1/2} + sqrt(1 - phi^2) N(0, 1).
/// Requires |phi| <= 1.
[[nodiscard]] double simulate_cointegration_tstat_limit(double phi, std::size_t n_steps,
                                                        RandomStream& stream);

/// One draw of int_0^1 BB(r)^2 dr.
[[nodiscard]] double simulate_cvm_p1(std::size_t n_steps, RandomStream& stream);

/// One draw of trace P_p = sum over p independent bridges of int BB_j^2.
[[nodiscard]] double simulate_cvm_trace(std::size_t p, std::size_t n_steps, RandomStream& stream);

enum class Functional { SupAbsBB, SupQp, SupAbsLurCusum, CvmP1Trace };

[[nodiscard]] std::string_view to_string(Functional f);
/// Accepts to_string names and the lowercase CLI spellings (supabsbb, supqp, ...).
[[nodiscard]] Functional parse_functional(std::string_view name);

/// Which functional to draw and its nuisance parameters.
struct FunctionalSpec {
    Functional kind = Functional::SupAbsBB;
    std::size_t p = 1;
    double nu = 0.0;
    double c = 0.0;     ///< SupAbsLurCusum only
    double corr = 0.0;  ///< SupAbsLurCusum only

    void validate() const;
};

[[nodiscard]] double draw_functional(const FunctionalSpec& spec, std::size_t n_steps, RandomStream& stream);

/// n_reps draws, draw r from stream (seed, r). Order of the result matches r.
[[nodiscard]] std::vector<double> draw_many(const FunctionalSpec& spec, std::size_t n_reps,
                                            std::size_t n_steps, std::uint64_t seed,
                                            std::size_t workers = 0);

/// Type-1 empirical quantile: the order statistic at ceil(level * n), 1-based.
/// `sorted` must be ascending and non-empty.
[[nodiscard]] double empirical_quantile(std::span<const double> sorted, double level);

/// Simulated quantiles of a limit functional.
struct CriticalValueTable {
    Functional kind = Functional::SupAbsBB;
    std::size_t p = 1;
    double nu = 0.0;
    std::optional<double> c;
    std::optional<double> corr;
    /// Quantile level -> value.
    std::map<double, double> quantiles;
    struct Meta {
        std::size_t n_steps = 0;
        std::size_t n_reps = 0;
        std::uint64_t seed = 0;

        friend bool operator==(const Meta&, const Meta&) = default;
    } meta;

    /// Value at `level` (matched to 1e-9); throws LookupError when absent.
    [[nodiscard]] double quantile(double level) const;

    friend bool operator==(const CriticalValueTable&, const CriticalValueTable&) = default;
};

inline const std::vector<double> kDefaultLevels{0.90, 0.95, 0.99};

/// Requires n_reps >= 1000. The result depends only on the arguments, not on `workers`.
[[nodiscard]] CriticalValueTable tabulate(const FunctionalSpec& spec, std::span<const double> levels,
                                          std::size_t n_reps, std::size_t n_steps, std::uint64_t seed,
                                          std::size_t workers = 0);

}  // namespace breaklab
