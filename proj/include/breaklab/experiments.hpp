#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "breaklab/break_tests.hpp"
#include "breaklab/dgp.hpp"
#include "breaklab/limit_lab.hpp"

namespace breaklab {

/// Inline critical-value tables are simulated with master_seed ^ kTableSeedSalt so they
/// never share streams with the replications.
inline constexpr std::uint64_t kTableSeedSalt = 0x7AB1E5EEDULL;

/// Where the critical values of an experiment come from.
struct TableSource {
    enum class Mode { Precomputed, SimulateInline };
    Mode mode = Mode::SimulateInline;
    /// Precomputed: tables loaded by the caller, or read from `path` when empty.
    std::string path;
    std::vector<CriticalValueTable> tables;
    /// SimulateInline: draws and grid size per table.
    std::size_t n_reps = 10000;
    std::size_t n_steps = kDefaultSteps;
};

struct ExperimentSpec {
    std::vector<DgpSpec> dgp_grid;
    std::vector<StatKind> stat_kinds{StatKind::Cusum};
    /// Trimming for Z and Wald.
    double nu = 0.15;
    /// Trimming for the CUSUM family.
    double nu_cusum = 0.0;
    /// Significance level.
    double level = 0.05;
    std::size_t n_reps = 1000;
    TableSource table_source{};
    std::uint64_t master_seed = kDefaultSeed;
    OnSingular on_singular = OnSingular::Skip;
    SqScale sq_scale = SqScale::SdOfSquares;
    /// Raw statistic paths kept per cell (first K replications).
    std::size_t paths_sample = 0;
    /// Worker threads; 0 picks hardware concurrency. Never changes the results.
    std::size_t workers = 0;

    /// Throws SpecError naming the offending field.
    void validate() const;
    [[nodiscard]] double nu_for(StatKind kind) const;
};

/// One raw path kept for plotting.
struct SamplePath {
    std::size_t replication = 0;
    std::vector<std::size_t> ks;
    std::vector<double> path;
};

/// One (dgp, statistic) cell.
struct McRow {
    DgpSpec dgp;
    StatKind stat = StatKind::Cusum;
    double nu = 0.0;
    double level = 0.05;
    std::size_t p = 1;
    std::size_t n_reps = 0;
    std::size_t failed = 0;
    double critical_value = 0.0;
    double rejection_rate = 0.0;
    /// sqrt(r (1 - r) / n) over the successful replications.
    double mc_stderr = 0.0;
    double mean_sup = 0.0;
    double sup_q50 = 0.0;
    double sup_q95 = 0.0;
    std::uint64_t seed = 0;
    std::vector<SamplePath> paths;
};

struct McReport {
    std::vector<McRow> rows;
    ExperimentSpec provenance;
    /// Critical-value tables actually used.
    std::vector<CriticalValueTable> tables;
};

/// Summary of one cell computed from per-replication sup values.
struct CellResult {
    std::size_t n_reps = 0;
    std::size_t failed = 0;
    std::size_t rejections = 0;
    double rejection_rate = 0.0;
    double mc_stderr = 0.0;
    double mean_sup = 0.0;
    double sup_q50 = 0.0;
    double sup_q95 = 0.0;
};

/// Reduces sup values (NaN marks a failed replication) against a critical value.
/// Order-insensitive except for the floating-point mean, which is summed in index order.
[[nodiscard]] CellResult summarize_cell(const std::vector<double>& sups, double critical_value);

/// Generic harness: draw(stream, r) returns the sup statistic of replication r (stream
/// seeded with (seed, r)); a thrown breaklab::Error counts as a failed replication.
[[nodiscard]] CellResult simulate_rejections(std::size_t n_reps, std::uint64_t seed, std::size_t workers,
                                             const std::function<double(RandomStream&, std::size_t)>& draw,
                                             double critical_value);

/// Statistic path for one sample under the experiment's options.
[[nodiscard]] TestOutcome compute_statistic(StatKind kind, const Sample& sample, const ExperimentSpec& spec);

/// Replication r of every cell uses stream (master_seed, r); all statistics of a DGP
/// cell are computed on the same samples. Deterministic for any worker count.
[[nodiscard]] McReport run_experiment(const ExperimentSpec& spec);

/// Null predictive-regression grid (beta = 0, mu = 0, unit variances, intercept fitted)
/// over persistence c and innovation correlation corr. `base` supplies every other field.
[[nodiscard]] ExperimentSpec size_distortion_spec(const std::vector<double>& c_grid,
                                                  const std::vector<double>& corr_grid, std::size_t T,
                                                  ExperimentSpec base);

/// Rejection rates under stationary critical values; rows ordered c, then corr, then stat.
[[nodiscard]] McReport size_distortion_study(const std::vector<double>& c_grid,
                                             const std::vector<double>& corr_grid, std::size_t T,
                                             const std::vector<StatKind>& stat_kinds, std::size_t n_reps,
                                             std::uint64_t seed, ExperimentSpec base = {});

}  // namespace breaklab
