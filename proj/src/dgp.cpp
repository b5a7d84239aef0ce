#include "breaklab/dgp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "breaklab/errors.hpp"

namespace breaklab {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void require_family(const DgpSpec& spec, Family f) {
    if (spec.family != f) {
        throw SpecError(fmt::format("family: expected {}, got {}", to_string(f), to_string(spec.family)));
    }
}

void require_length(const DgpSpec& spec, const InnovationPairs& innov) {
    if (innov.eps.size() != spec.T || innov.u.size() != spec.T) {
        throw SpecError(fmt::format("innovations: expected {} pairs, got {}", spec.T, innov.eps.size()));
    }
}

Truth make_truth(const DgpSpec& spec) {
    Truth t;
    t.spec = spec;
    t.k = spec.break_index();
    t.rho = spec.rho();
    t.phi = spec.cov.phi();
    t.sigma_v_sq = spec.cov.sigma_v_sq();
    return t;
}

// Coefficient vector for 1-based observation t.
const std::vector<double>& regime(const DgpSpec& spec, std::size_t k, std::size_t t) {
    return (k == 0 || t <= k) ? spec.params_pre : spec.params_post;
}

}  // namespace

std::string_view to_string(Family f) {
    switch (f) {
        case Family::Location: return "location";
        case Family::LinearRegression: return "linear_regression";
        case Family::Cointegration: return "cointegration";
        case Family::PredictiveLUR: return "predictive_lur";
        case Family::AR1: return "ar1";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    const std::string n = lower(name);
    if (n == "location") return Family::Location;
    if (n == "linear_regression" || n == "regression") return Family::LinearRegression;
    if (n == "cointegration") return Family::Cointegration;
    if (n == "predictive_lur" || n == "predictive") return Family::PredictiveLUR;
    if (n == "ar1") return Family::AR1;
    throw SpecError(fmt::format("family: unknown value '{}'", name));
}

void DgpSpec::validate() const {
    if (T < 4) throw SpecError(fmt::format("T: must be at least 4, got {}", T));
    if (!(s >= 0.0 && s <= 1.0)) throw SpecError(fmt::format("s: must lie in [0, 1], got {}", s));
    if (params_pre.empty()) throw SpecError("beta_pre: needs at least one coefficient");
    if (params_pre.size() != params_post.size()) {
        throw SpecError(fmt::format("beta_post: dimension {} differs from beta_pre dimension {}",
                                    params_post.size(), params_pre.size()));
    }
    cov.validate();
    if (family != Family::LinearRegression && params_pre.size() != 1) {
        throw SpecError(fmt::format("beta_pre: family {} takes one coefficient, got {}",
                                    to_string(family), params_pre.size()));
    }
    if (!std::isfinite(persistence_c)) throw SpecError("c: must be finite");
    if (family == Family::PredictiveLUR || family == Family::AR1) {
        if (std::abs(rho()) > 1.5) {
            throw SpecError(fmt::format("c: root 1 + c/T = {} is outside [-1.5, 1.5]", rho()));
        }
    }
}

std::size_t DgpSpec::break_index() const {
    if (s <= 0.0 || s >= 1.0) return 0;
    auto k = static_cast<std::size_t>(std::floor(static_cast<double>(T) * s));
    return std::clamp<std::size_t>(k, 1, T - 1);
}

Sample make_sample(Eigen::VectorXd y, Eigen::MatrixXd X) {
    if (X.size() == 0) X = Eigen::MatrixXd::Ones(y.size(), 1);
    if (X.rows() != y.size()) {
        throw SpecError(fmt::format("X: {} rows but y has {} entries", X.rows(), y.size()));
    }
    Sample out;
    out.truth.spec.T = static_cast<std::size_t>(y.size());
    out.truth.spec.params_pre.assign(static_cast<std::size_t>(X.cols()), 0.0);
    out.truth.spec.params_post = out.truth.spec.params_pre;
    out.y = std::move(y);
    out.X = std::move(X);
    return out;
}

Sample build_location(const DgpSpec& spec, InnovationPairs innov) {
    require_family(spec, Family::Location);
    spec.validate();
    require_length(spec, innov);
    const std::size_t k = spec.break_index();
    Sample out;
    out.truth = make_truth(spec);
    out.y.resize(static_cast<Eigen::Index>(spec.T));
    out.X = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(spec.T), 1);
    for (std::size_t t = 1; t <= spec.T; ++t) {
        out.y[static_cast<Eigen::Index>(t - 1)] = regime(spec, k, t)[0] + innov.eps[t - 1];
    }
    out.innovations = std::move(innov);
    return out;
}

Sample build_linear_regression(const DgpSpec& spec, InnovationPairs innov,
                               const Eigen::MatrixXd& regressors) {
    require_family(spec, Family::LinearRegression);
    spec.validate();
    require_length(spec, innov);
    const auto T = static_cast<Eigen::Index>(spec.T);
    const auto p = static_cast<Eigen::Index>(spec.params_pre.size());
    if (regressors.rows() != T || regressors.cols() != p - 1) {
        throw SpecError(fmt::format("regressors: expected {}x{} matrix, got {}x{}", T, p - 1,
                                    regressors.rows(), regressors.cols()));
    }
    const std::size_t k = spec.break_index();
    Sample out;
    out.truth = make_truth(spec);
    out.X.resize(T, p);
    out.X.col(0).setOnes();
    if (p > 1) out.X.rightCols(p - 1) = regressors;
    out.y.resize(T);
    for (Eigen::Index i = 0; i < T; ++i) {
        const auto& beta = regime(spec, k, static_cast<std::size_t>(i) + 1);
        const Eigen::Map<const Eigen::VectorXd> b(beta.data(), p);
        out.y[i] = out.X.row(i).dot(b) + innov.eps[static_cast<std::size_t>(i)];
    }
    out.innovations = std::move(innov);
    return out;
}

Sample build_cointegration(const DgpSpec& spec, InnovationPairs innov) {
    require_family(spec, Family::Cointegration);
    spec.validate();
    require_length(spec, innov);
    const std::size_t k = spec.break_index();
    const auto T = static_cast<Eigen::Index>(spec.T);
    Sample out;
    out.truth = make_truth(spec);
    out.X.resize(T, 1);
    out.y.resize(T);
    std::vector<double> path(spec.T + 1);
    path[0] = spec.x0;
    for (std::size_t t = 1; t <= spec.T; ++t) {
        path[t] = path[t - 1] + innov.eps[t - 1];
        const auto i = static_cast<Eigen::Index>(t - 1);
        out.X(i, 0) = path[t];
        out.y[i] = regime(spec, k, t)[0] * path[t] + innov.u[t - 1];
    }
    out.regressor = std::move(path);
    out.innovations = std::move(innov);
    return out;
}

Sample build_predictive_lur(const DgpSpec& spec, InnovationPairs innov) {
    require_family(spec, Family::PredictiveLUR);
    spec.validate();
    require_length(spec, innov);
    const std::size_t k = spec.break_index();
    const auto T = static_cast<Eigen::Index>(spec.T);
    const double rho = spec.rho();
    const Eigen::Index xcol = spec.fit_intercept ? 1 : 0;
    Sample out;
    out.truth = make_truth(spec);
    out.X.resize(T, xcol + 1);
    if (spec.fit_intercept) out.X.col(0).setOnes();
    out.y.resize(T);
    std::vector<double> path(spec.T + 1);
    path[0] = spec.x0;
    for (std::size_t t = 1; t <= spec.T; ++t) {
        const auto i = static_cast<Eigen::Index>(t - 1);
        out.X(i, xcol) = path[t - 1];
        out.y[i] = spec.mu + regime(spec, k, t)[0] * path[t - 1] + innov.eps[t - 1];
        path[t] = rho * path[t - 1] + innov.u[t - 1];
    }
    out.regressor = std::move(path);
    out.innovations = std::move(innov);
    return out;
}

Sample build_ar1(const DgpSpec& spec, InnovationPairs innov) {
    require_family(spec, Family::AR1);
    spec.validate();
    require_length(spec, innov);
    const std::size_t k = spec.break_index();
    const auto T = static_cast<Eigen::Index>(spec.T);
    const double rho = spec.rho();
    Sample out;
    out.truth = make_truth(spec);
    out.X.resize(T, 1);
    out.y.resize(T);
    double prev = spec.x0;
    for (std::size_t t = 1; t <= spec.T; ++t) {
        const auto i = static_cast<Eigen::Index>(t - 1);
        out.X(i, 0) = prev;
        prev = (rho + regime(spec, k, t)[0]) * prev + innov.eps[t - 1];
        out.y[i] = prev;
    }
    out.innovations = std::move(innov);
    return out;
}

Sample gen_location(const DgpSpec& spec, RandomStream& stream) {
    require_family(spec, Family::Location);
    spec.validate();
    return build_location(spec, draw_gaussian_pairs(stream, spec.T, spec.cov));
}

Sample gen_linear_regression(const DgpSpec& spec, RandomStream& stream) {
    require_family(spec, Family::LinearRegression);
    spec.validate();
    auto innov = draw_gaussian_pairs(stream, spec.T, spec.cov);
    const auto T = static_cast<Eigen::Index>(spec.T);
    const auto q = static_cast<Eigen::Index>(spec.params_pre.size()) - 1;
    Eigen::MatrixXd reg(T, q);
    for (Eigen::Index i = 0; i < T; ++i) {
        for (Eigen::Index j = 0; j < q; ++j) reg(i, j) = stream.normal();
    }
    return build_linear_regression(spec, std::move(innov), reg);
}

Sample gen_cointegration(const DgpSpec& spec, RandomStream& stream) {
    require_family(spec, Family::Cointegration);
    spec.validate();
    return build_cointegration(spec, draw_gaussian_pairs(stream, spec.T, spec.cov));
}

Sample gen_predictive_lur(const DgpSpec& spec, RandomStream& stream) {
    require_family(spec, Family::PredictiveLUR);
    spec.validate();
    return build_predictive_lur(spec, draw_gaussian_pairs(stream, spec.T, spec.cov));
}

Sample gen_ar1(const DgpSpec& spec, RandomStream& stream) {
    require_family(spec, Family::AR1);
    spec.validate();
    return build_ar1(spec, draw_gaussian_pairs(stream, spec.T, spec.cov));
}

Sample generate(const DgpSpec& spec, RandomStream& stream) {
    switch (spec.family) {
        case Family::Location: return gen_location(spec, stream);
        case Family::LinearRegression: return gen_linear_regression(spec, stream);
        case Family::Cointegration: return gen_cointegration(spec, stream);
        case Family::PredictiveLUR: return gen_predictive_lur(spec, stream);
        case Family::AR1: return gen_ar1(spec, stream);
    }
    throw SpecError("family: unhandled value");
}

}  // namespace breaklab
