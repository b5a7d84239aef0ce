#include <doctest.h>

#include <cmath>
#include <vector>

#include "breaklab/errors.hpp"
#include "breaklab/rng.hpp"
#include "support/oracles.hpp"

using namespace breaklab;

namespace {

std::vector<std::uint64_t> first_draws(SeedSpec seed, std::size_t n) {
    RandomStream s = derive_stream(seed);
    std::vector<std::uint64_t> out(n);
    for (auto& v : out) v = s.next_u64();
    return out;
}

}  // namespace

TEST_CASE("stream derivation is deterministic") {
    CHECK(first_draws({42, 0}, 100) == first_draws({42, 0}, 100));

    RandomStream a = derive_stream({42, 0});
    RandomStream b = derive_stream({42, 0});
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("distinct stream ids give distinct sequences") {
    const auto a = first_draws({42, 0}, 100);
    const auto b = first_draws({42, 1}, 100);
    int differ = 0;
    for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
    CHECK(differ >= 99);
}

TEST_CASE("master seed changes the stream") {
    CHECK(first_draws({42, 0}, 100) != first_draws({43, 0}, 100));
}

TEST_CASE("neighbouring streams are uncorrelated") {
    const std::size_t n = 100000;
    for (std::uint64_t id : {0ULL, 1ULL, 1000ULL}) {
        RandomStream a = derive_stream({kDefaultSeed, id});
        RandomStream b = derive_stream({kDefaultSeed, id + 1});
        std::vector<double> x(n);
        std::vector<double> y(n);
        a.fill_normal(x);
        b.fill_normal(y);
        CHECK(std::abs(oracle::correlation(x, y)) < 0.01);
    }
}

TEST_CASE("gaussian pairs match the requested covariance") {
    const std::size_t n = 100000;
    SUBCASE("identity") {
        RandomStream s = derive_stream({7, 0});
        const auto p = draw_gaussian_pairs(s, n, {1.0, 1.0, 0.0});
        const double r = oracle::correlation(p.eps, p.u);
        CHECK(r > -0.01);
        CHECK(r < 0.01);
    }
    SUBCASE("covariance 0.5") {
        RandomStream s = derive_stream({7, 1});
        const auto p = draw_gaussian_pairs(s, n, {1.0, 1.0, 0.5});
        const double c = oracle::covariance(p.eps, p.u);
        CHECK(c > 0.48);
        CHECK(c < 0.52);
    }
    SUBCASE("strong negative endogeneity") {
        RandomStream s = derive_stream({7, 2});
        const auto p = draw_gaussian_pairs(s, n, {1.0, 1.0, -0.95});
        const double r = oracle::correlation(p.eps, p.u);
        CHECK(r > -0.96);
        CHECK(r < -0.94);
    }
}

TEST_CASE("invalid covariance is rejected") {
    RandomStream s = derive_stream({1, 0});
    CHECK_THROWS_AS((void)draw_gaussian_pairs(s, 10, {1.0, 1.0, 1.5}), SpecError);
    CHECK_THROWS_AS((void)draw_gaussian_pairs(s, 10, {-1.0, 1.0, 0.0}), SpecError);
    CHECK_THROWS_AS((void)draw_gaussian_pairs(s, 10, {1.0, -0.1, 0.0}), SpecError);
}

TEST_CASE("perfectly correlated innovations are accepted") {
    const InnovCov cov{1.0, 4.0, 2.0};
    const CovFactor f = cov.factor();
    CHECK(f.l22 == 0.0);
    RandomStream s = derive_stream({3, 0});
    const auto p = draw_gaussian_pairs(s, 50, cov);
    for (std::size_t t = 0; t < p.size(); ++t) CHECK(p.u[t] == doctest::Approx(2.0 * p.eps[t]));
    CHECK(cov.phi() == 2.0);
    CHECK(cov.sigma_v_sq() == 0.0);
}

TEST_CASE("square root reconstructs the covariance (property)") {
    RandomStream gen = derive_stream({2024, 99});
    std::uniform_real_distribution<double> var(0.01, 10.0);
    std::uniform_real_distribution<double> corr(-1.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double a = var(gen.engine());
        const double d = var(gen.engine());
        const double b = corr(gen.engine()) * std::sqrt(a * d);
        const InnovCov cov{a, d, b};
        const CovFactor f = cov.factor();
        CHECK(std::abs(f.l11 * f.l11 - a) <= 1e-12 * a);
        CHECK(std::abs(f.l11 * f.l21 - b) <= 1e-12 * std::max(std::abs(b), 1e-300) + 1e-15);
        CHECK(std::abs(f.l21 * f.l21 + f.l22 * f.l22 - d) <= 1e-12 * d);
    }
}

TEST_CASE("endogeneity decomposition") {
    const InnovCov cov{1.0, 1.0, 0.5};
    CHECK(cov.phi() == doctest::Approx(0.5));
    CHECK(cov.sigma_v_sq() == doctest::Approx(0.75));
    CHECK(cov.correlation() == doctest::Approx(0.5));
}
