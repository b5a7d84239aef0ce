#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace breaklab {

/// Master seed used whenever the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

/// Identifies one random stream: replication r of an experiment uses stream_id = r.
struct SeedSpec {
    std::uint64_t master_seed = kDefaultSeed;
    std::uint64_t stream_id = 0;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Deterministic random stream keyed on a SeedSpec.
///
/// The engine state is a pure function of (master_seed, stream_id): both words are
/// passed through a SplitMix64 finalizer and expanded with std::seed_seq, so nearby
/// stream ids give unrelated engines. A stream must be used by one thread at a time.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(SeedSpec seed);

    [[nodiscard]] const SeedSpec& seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Standard normal draw.
    double normal() { return gauss_(engine_); }

    void fill_normal(std::span<double> out) {
        for (auto& v : out) v = gauss_(engine_);
    }

    engine_type& engine() noexcept { return engine_; }

private:
    SeedSpec seed_;
    engine_type engine_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

[[nodiscard]] RandomStream derive_stream(SeedSpec seed);

/// Lower-triangular square root of a 2x2 covariance [[a, b], [b, d]].
struct CovFactor {
    double l11 = 0.0;
    double l21 = 0.0;
    double l22 = 0.0;
};

/// Covariance of the innovation pair (eps_t, u_t).
struct InnovCov {
    double sigma_eps_sq = 1.0;
    double sigma_u_sq = 1.0;
    double sigma_eps_u = 0.0;

    /// Throws SpecError unless the matrix is positive semi-definite.
    void validate() const;

    [[nodiscard]] double determinant() const noexcept {
        return sigma_eps_sq * sigma_u_sq - sigma_eps_u * sigma_eps_u;
    }

    /// corr(eps, u); 0 when either variance vanishes.
    [[nodiscard]] double correlation() const noexcept;

    /// Regression coefficient of u on eps in u_t = phi * eps_t + v_t.
    [[nodiscard]] double phi() const noexcept;

    /// Variance of v_t in the decomposition above.
    [[nodiscard]] double sigma_v_sq() const noexcept;

    /// Validates, then returns L with L * L' equal to the covariance. A zero
    /// determinant gives l22 = 0.
    [[nodiscard]] CovFactor factor() const;

    /// Unit-variance pair with the given correlation.
    [[nodiscard]] static InnovCov from_correlation(double corr);

    friend bool operator==(const InnovCov&, const InnovCov&) = default;
};

/// Innovation sequences stored column-wise.
struct InnovationPairs {
    std::vector<double> eps;
    std::vector<double> u;

    [[nodiscard]] std::size_t size() const noexcept { return eps.size(); }
};

/// n correlated Gaussian pairs built as L * (z1, z2)' from independent standard normals.
[[nodiscard]] InnovationPairs draw_gaussian_pairs(RandomStream& stream, std::size_t n,
                                                  const InnovCov& cov);

}  // namespace breaklab
