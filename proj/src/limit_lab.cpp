#include "breaklab/limit_lab.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "breaklab/errors.hpp"
#include "breaklab/parallel.hpp"

namespace breaklab {

namespace {

void require_steps(std::size_t n_steps) {
    if (n_steps < 2) throw SpecError(fmt::format("n_steps: must be at least 2, got {}", n_steps));
}

void require_nu(double nu) {
    if (!(nu >= 0.0 && nu < 0.5)) throw SpecError(fmt::format("nu: must lie in [0, 0.5), got {}", nu));
}

}  // namespace

GridRange trimmed_range(std::size_t n_steps, double nu) {
    const double n = static_cast<double>(n_steps);
    GridRange r;
    r.first = static_cast<std::size_t>(std::ceil(nu * n - 1e-9));
    r.last = static_cast<std::size_t>(std::floor((1.0 - nu) * n + 1e-9));
    r.last = std::min(r.last, n_steps);
    return r;
}

PathGrid simulate_brownian(std::size_t n_steps, std::size_t dim, RandomStream& stream) {
    require_steps(n_steps);
    const double sd = std::sqrt(1.0 / static_cast<double>(n_steps));
    PathGrid out;
    out.n_steps = n_steps;
    out.values.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n_steps + 1));
    out.values.col(0).setZero();
    for (Eigen::Index i = 1; i <= static_cast<Eigen::Index>(n_steps); ++i) {
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(dim); ++j) {
            out.values(j, i) = out.values(j, i - 1) + sd * stream.normal();
        }
    }
    return out;
}

PathGrid to_bridge(const PathGrid& brownian) {
    PathGrid out = brownian;
    const auto n = static_cast<Eigen::Index>(brownian.n_steps);
    const Eigen::VectorXd end = brownian.values.col(n);
    for (Eigen::Index i = 0; i <= n; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(n);
        out.values.col(i) -= s * end;
    }
    // Pin exactly.
    out.values.col(n).setZero();
    return out;
}

PathGrid simulate_bridge(std::size_t n_steps, RandomStream& stream) {
    return to_bridge(simulate_brownian(n_steps, 1, stream));
}

double sup_abs(const PathGrid& path, double nu) {
    const GridRange r = trimmed_range(path.n_steps, nu);
    double best = 0.0;
    for (std::size_t i = r.first; i <= r.last; ++i) best = std::max(best, std::abs(path(i)));
    return best;
}

std::vector<double> qp_path(const PathGrid& bridges) {
    const std::size_t n = bridges.n_steps;
    std::vector<double> q(n + 1, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i < n; ++i) {
        const double pi = static_cast<double>(i) / static_cast<double>(n);
        q[i] = bridges.values.col(static_cast<Eigen::Index>(i)).squaredNorm() / (pi * (1.0 - pi));
    }
    return q;
}

double simulate_sup_abs_bridge(std::size_t n_steps, double nu, RandomStream& stream) {
    require_nu(nu);
    return sup_abs(simulate_bridge(n_steps, stream), nu);
}

double simulate_qp_sup(std::size_t p, double nu, std::size_t n_steps, RandomStream& stream) {
    if (p < 1) throw SpecError("p: must be at least 1");
    if (!(nu > 0.0 && nu < 0.5)) throw SpecError(fmt::format("nu: must lie in (0, 0.5), got {}", nu));
    const PathGrid bb = to_bridge(simulate_brownian(n_steps, p, stream));
    const std::vector<double> q = qp_path(bb);
    const GridRange r = trimmed_range(n_steps, nu);
    double best = 0.0;
    for (std::size_t i = std::max<std::size_t>(r.first, 1); i <= std::min(r.last, n_steps - 1); ++i) {
        best = std::max(best, q[i]);
    }
    return best;
}

double ou_step_variance(double c, double dt) {
    const double x = 2.0 * c * dt;
    if (std::abs(x) < 1e-12) return dt;
    return std::expm1(x) / (2.0 * c);
}

std::vector<double> ou_advance(double c, double dt, std::size_t steps, double start, RandomStream& stream) {
    if (!std::isfinite(c)) throw SpecError("c: must be finite");
    const double a = std::exp(c * dt);
    const double sd = std::sqrt(ou_step_variance(c, dt));
    std::vector<double> out(steps + 1);
    out[0] = start;
    for (std::size_t i = 1; i <= steps; ++i) out[i] = a * out[i - 1] + sd * stream.normal();
    return out;
}

PathGrid simulate_ou(double c, std::size_t n_steps, RandomStream& stream) {
    require_steps(n_steps);
    const auto v = ou_advance(c, 1.0 / static_cast<double>(n_steps), n_steps, 0.0, stream);
    PathGrid out;
    out.n_steps = n_steps;
    out.values = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    return out;
}

LurCusumLimitPath simulate_lur_cusum_path(double c, double corr, std::size_t n_steps, RandomStream& stream) {
    require_steps(n_steps);
    if (!(std::abs(corr) <= 1.0)) throw SpecError(fmt::format("corr: must lie in [-1, 1], got {}", corr));
    if (!std::isfinite(c)) throw SpecError("c: must be finite");
    const std::size_t n = n_steps;
    const double dt = 1.0 / static_cast<double>(n);
    const double sqdt = std::sqrt(dt);
    const double a = std::exp(c * dt);
    // J is driven by the same increments as B_u, rescaled to the exact step variance.
    const double scale = std::sqrt(ou_step_variance(c, dt) / dt);
    const double orth = std::sqrt(std::max(0.0, 1.0 - corr * corr));

    std::vector<double> be(n + 1, 0.0);    // B_eps
    std::vector<double> ito(n + 1, 0.0);   // int_0^r J dB_u
    std::vector<double> area(n + 1, 0.0);  // int_0^r J ds
    double j = 0.0;
    double energy = 0.0;  // int_0^1 J^2 ds
    for (std::size_t i = 0; i < n; ++i) {
        const double zu = stream.normal();
        const double ze = stream.normal();
        const double dbu = sqdt * zu;
        const double dbe = sqdt * (corr * zu + orth * ze);
        ito[i + 1] = ito[i] + j * dbu;
        area[i + 1] = area[i] + j * dt;
        energy += j * j * dt;
        be[i + 1] = be[i] + dbe;
        j = a * j + scale * dbu;
    }
    energy = std::max(energy, std::numeric_limits<double>::min());

    LurCusumLimitPath out;
    out.bridge.resize(n + 1);
    out.correction.resize(n + 1);
    out.jtilde.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.jtilde[i] = ito[i] / energy * area[i];
    for (std::size_t i = 0; i <= n; ++i) {
        const double r = static_cast<double>(i) * dt;
        out.bridge[i] = be[i] - r * be[n];
        out.correction[i] = out.jtilde[i] - r * out.jtilde[n];
    }
    return out;
}

double simulate_lur_cusum_limit(double c, double corr, std::size_t n_steps, RandomStream& stream, double nu) {
    require_nu(nu);
    const LurCusumLimitPath path = simulate_lur_cusum_path(c, corr, n_steps, stream);
    const GridRange r = trimmed_range(n_steps, nu);
    double best = 0.0;
    for (std::size_t i = r.first; i <= r.last; ++i) {
        best = std::max(best, std::abs(path.bridge[i] - path.correction[i]));
    }
    return best;
}

double simulate_cointegration_tstat_limit(double phi, std::size_t n_steps, RandomStream& stream) {
    if (!(std::abs(phi) <= 1.0)) throw SpecError(fmt::format("phi: must lie in [-1, 1], got {}", phi));
    const PathGrid w = simulate_brownian(n_steps, 1, stream);
    const std::size_t n = n_steps;
    const double dt = 1.0 / static_cast<double>(n);
    double energy = 0.0;
    for (std::size_t i = 1; i < n; ++i) energy += w(i) * w(i);
    energy = (energy + 0.5 * w(n) * w(n)) * dt;
    energy = std::max(energy, std::numeric_limits<double>::min());
    const double w1 = w(n);
    const double z = stream.normal();
    return 0.5 * phi * (w1 * w1 + 1.0) / std::sqrt(energy) + std::sqrt(1.0 - phi * phi) * z;
}

double simulate_cvm_trace(std::size_t p, std::size_t n_steps, RandomStream& stream) {
    if (p < 1) throw SpecError("p: must be at least 1");
    const PathGrid bb = to_bridge(simulate_brownian(n_steps, p, stream));
    // Trapezoid rule; the end points are zero.
    double sum = 0.0;
    for (std::size_t i = 1; i < n_steps; ++i) sum += bb.values.col(static_cast<Eigen::Index>(i)).squaredNorm();
    return sum / static_cast<double>(n_steps);
}

double simulate_cvm_p1(std::size_t n_steps, RandomStream& stream) {
    return simulate_cvm_trace(1, n_steps, stream);
}

std::string_view to_string(Functional f) {
    switch (f) {
        case Functional::SupAbsBB: return "SupAbsBB";
        case Functional::SupQp: return "SupQp";
        case Functional::SupAbsLurCusum: return "SupAbsLurCusum";
        case Functional::CvmP1Trace: return "CvmP1Trace";
    }
    return "unknown";
}

Functional parse_functional(std::string_view name) {
    std::string n(name);
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (n == "supabsbb") return Functional::SupAbsBB;
    if (n == "supqp") return Functional::SupQp;
    if (n == "supabslurcusum" || n == "lurcusum") return Functional::SupAbsLurCusum;
    if (n == "cvmp1trace" || n == "cvm") return Functional::CvmP1Trace;
    throw SpecError(fmt::format("kind: unknown functional '{}'", name));
}

void FunctionalSpec::validate() const {
    if (p < 1) throw SpecError("p: must be at least 1");
    require_nu(nu);
    if (kind == Functional::SupQp && nu <= 0.0) {
        throw SpecError("nu: SupQp needs a positive trimming fraction");
    }
    if (kind == Functional::SupAbsLurCusum) {
        if (!std::isfinite(c)) throw SpecError("c: must be finite");
        if (!(std::abs(corr) <= 1.0)) throw SpecError(fmt::format("corr: must lie in [-1, 1], got {}", corr));
    }
}

double draw_functional(const FunctionalSpec& spec, std::size_t n_steps, RandomStream& stream) {
    switch (spec.kind) {
        case Functional::SupAbsBB: return simulate_sup_abs_bridge(n_steps, spec.nu, stream);
        case Functional::SupQp: return simulate_qp_sup(spec.p, spec.nu, n_steps, stream);
        case Functional::SupAbsLurCusum:
            return simulate_lur_cusum_limit(spec.c, spec.corr, n_steps, stream, spec.nu);
        case Functional::CvmP1Trace: return simulate_cvm_trace(spec.p, n_steps, stream);
    }
    throw SpecError("kind: unhandled functional");
}

std::vector<double> draw_many(const FunctionalSpec& spec, std::size_t n_reps, std::size_t n_steps,
                              std::uint64_t seed, std::size_t workers) {
    spec.validate();
    require_steps(n_steps);
    std::vector<double> draws(n_reps);
    parallel_for(n_reps, workers, [&](std::size_t r) {
        RandomStream stream = derive_stream({seed, r});
        draws[r] = draw_functional(spec, n_steps, stream);
    });
    return draws;
}

double empirical_quantile(std::span<const double> sorted, double level) {
    if (sorted.empty()) throw SpecError("quantile: no draws");
    if (!(level > 0.0 && level < 1.0)) throw SpecError(fmt::format("level: must lie in (0, 1), got {}", level));
    const double n = static_cast<double>(sorted.size());
    auto idx = static_cast<std::size_t>(std::ceil(level * n - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, sorted.size());
    return sorted[idx - 1];
}

double CriticalValueTable::quantile(double level) const {
    for (const auto& [lv, value] : quantiles) {
        if (std::abs(lv - level) < 1e-9) return value;
    }
    throw LookupError(fmt::format("critical values: table ({}, p = {}, nu = {}) has no quantile at level {}",
                                  to_string(kind), p, nu, level));
}

CriticalValueTable tabulate(const FunctionalSpec& spec, std::span<const double> levels, std::size_t n_reps,
                            std::size_t n_steps, std::uint64_t seed, std::size_t workers) {
    if (n_reps < 1000) throw SpecError(fmt::format("reps: tabulation needs at least 1000 draws, got {}", n_reps));
    if (levels.empty()) throw SpecError("levels: at least one quantile level is required");
    std::vector<double> draws = draw_many(spec, n_reps, n_steps, seed, workers);
    std::sort(draws.begin(), draws.end());

    CriticalValueTable table;
    table.kind = spec.kind;
    table.p = spec.p;
    table.nu = spec.nu;
    if (spec.kind == Functional::SupAbsLurCusum) {
        table.c = spec.c;
        table.corr = spec.corr;
    }
    for (double level : levels) table.quantiles[level] = empirical_quantile(draws, level);
    table.meta = {n_steps, n_reps, seed};
    return table;
}

}  // namespace breaklab
