#include "breaklab/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "breaklab/errors.hpp"

namespace breaklab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RandomStream::engine_type make_engine(SeedSpec seed) {
    const std::uint64_t a = splitmix64(seed.master_seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(seed.stream_id + 0x5851F42D4C957F2DULL));
    std::array<std::uint32_t, 6> words{
        static_cast<std::uint32_t>(a),        static_cast<std::uint32_t>(a >> 32),
        static_cast<std::uint32_t>(b),        static_cast<std::uint32_t>(b >> 32),
        static_cast<std::uint32_t>(seed.stream_id), static_cast<std::uint32_t>(seed.stream_id >> 32)};
    std::seed_seq seq(words.begin(), words.end());
    return RandomStream::engine_type(seq);
}

}  // namespace

RandomStream::RandomStream(SeedSpec seed) : seed_(seed), engine_(make_engine(seed)) {}

RandomStream derive_stream(SeedSpec seed) { return RandomStream(seed); }

void InnovCov::validate() const {
    if (!std::isfinite(sigma_eps_sq) || !std::isfinite(sigma_u_sq) || !std::isfinite(sigma_eps_u)) {
        throw SpecError("innovation covariance: entries must be finite");
    }
    if (sigma_eps_sq < 0.0) {
        throw SpecError(fmt::format("innovation covariance: sigma_eps_sq = {} is negative", sigma_eps_sq));
    }
    if (sigma_u_sq < 0.0) {
        throw SpecError(fmt::format("innovation covariance: sigma_u_sq = {} is negative", sigma_u_sq));
    }
    // Relative slack so that corr = +-1 written in decimal is still accepted.
    const double scale = sigma_eps_sq * sigma_u_sq;
    if (determinant() < -1e-12 * (scale > 0.0 ? scale : 1.0)) {
        throw SpecError(fmt::format(
            "innovation covariance: determinant {} is negative (sigma_eps_u = {} too large)",
            determinant(), sigma_eps_u));
    }
}

double InnovCov::correlation() const noexcept {
    const double d = std::sqrt(sigma_eps_sq * sigma_u_sq);
    return d > 0.0 ? sigma_eps_u / d : 0.0;
}

double InnovCov::phi() const noexcept {
    return sigma_eps_sq > 0.0 ? sigma_eps_u / sigma_eps_sq : 0.0;
}

double InnovCov::sigma_v_sq() const noexcept {
    if (sigma_eps_sq <= 0.0) return sigma_u_sq;
    return std::max(0.0, sigma_u_sq - sigma_eps_u * sigma_eps_u / sigma_eps_sq);
}

CovFactor InnovCov::factor() const {
    validate();
    CovFactor f;
    f.l11 = std::sqrt(sigma_eps_sq);
    f.l21 = f.l11 > 0.0 ? sigma_eps_u / f.l11 : 0.0;
    f.l22 = std::sqrt(std::max(0.0, sigma_u_sq - f.l21 * f.l21));
    return f;
}

InnovCov InnovCov::from_correlation(double corr) {
    return InnovCov{1.0, 1.0, corr};
}

InnovationPairs draw_gaussian_pairs(RandomStream& stream, std::size_t n, const InnovCov& cov) {
    const CovFactor f = cov.factor();
    InnovationPairs out;
    out.eps.resize(n);
    out.u.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double z1 = stream.normal();
        const double z2 = stream.normal();
        out.eps[t] = f.l11 * z1;
        out.u[t] = f.l21 * z1 + f.l22 * z2;
    }
    return out;
}

}  // namespace breaklab
