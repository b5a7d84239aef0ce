#include "breaklab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include <fmt/format.h>

#include "breaklab/errors.hpp"
#include "breaklab/estimators.hpp"
#include "breaklab/io.hpp"
#include "breaklab/parallel.hpp"

namespace breaklab {

namespace {

struct TableKey {
    Functional kind;
    std::size_t p;
    double nu;

    auto operator<=>(const TableKey&) const = default;
};

std::size_t design_dim(const DgpSpec& d) {
    switch (d.family) {
        case Family::LinearRegression: return d.params_pre.size();
        case Family::PredictiveLUR: return d.fit_intercept ? 2 : 1;
        default: return 1;
    }
}

std::size_t table_dim(StatKind kind, const DgpSpec& d) {
    return kind == StatKind::Wald ? design_dim(d) : 1;
}

const CriticalValueTable* find_table(const std::vector<CriticalValueTable>& tables, const TableKey& key) {
    for (const auto& t : tables) {
        if (t.kind == key.kind && t.p == key.p && std::abs(t.nu - key.nu) < 1e-9) return &t;
    }
    return nullptr;
}

}  // namespace

void ExperimentSpec::validate() const {
    if (dgp_grid.empty()) throw SpecError("dgp_grid: at least one DGP is required");
    if (stat_kinds.empty()) throw SpecError("stats: at least one statistic is required");
    if (n_reps < 100) throw SpecError(fmt::format("n_reps: must be at least 100, got {}", n_reps));
    if (!(level > 0.0 && level < 1.0)) throw SpecError(fmt::format("level: must lie in (0, 1), got {}", level));
    if (!(nu > 0.0 && nu < 0.5)) throw SpecError(fmt::format("nu: must lie in (0, 0.5), got {}", nu));
    if (!(nu_cusum >= 0.0 && nu_cusum < 0.5)) {
        throw SpecError(fmt::format("nu_cusum: must lie in [0, 0.5), got {}", nu_cusum));
    }
    for (std::size_t i = 0; i < dgp_grid.size(); ++i) {
        try {
            dgp_grid[i].validate();
        } catch (const SpecError& e) {
            throw SpecError(fmt::format("dgp_grid[{}].{}", i, e.what()));
        }
    }
    if (table_source.mode == TableSource::Mode::SimulateInline && table_source.n_reps < 1000) {
        throw SpecError(fmt::format("table.n_reps: must be at least 1000, got {}", table_source.n_reps));
    }
    if (table_source.mode == TableSource::Mode::Precomputed && table_source.tables.empty() &&
        table_source.path.empty()) {
        throw SpecError("table.path: precomputed critical values need a file");
    }
}

double ExperimentSpec::nu_for(StatKind kind) const {
    return (kind == StatKind::Cusum || kind == StatKind::CusumSq) ? nu_cusum : nu;
}

CellResult summarize_cell(const std::vector<double>& sups, double critical_value) {
    CellResult res;
    res.n_reps = sups.size();
    std::vector<double> ok;
    ok.reserve(sups.size());
    double sum = 0.0;
    for (double v : sups) {
        if (std::isnan(v)) {
            ++res.failed;
            continue;
        }
        ok.push_back(v);
        sum += v;
        if (v > critical_value) ++res.rejections;
    }
    if (ok.empty()) return res;
    const double n = static_cast<double>(ok.size());
    res.rejection_rate = static_cast<double>(res.rejections) / n;
    res.mc_stderr = std::sqrt(res.rejection_rate * (1.0 - res.rejection_rate) / n);
    res.mean_sup = sum / n;
    std::sort(ok.begin(), ok.end());
    res.sup_q50 = empirical_quantile(ok, 0.50);
    res.sup_q95 = empirical_quantile(ok, 0.95);
    return res;
}

CellResult simulate_rejections(std::size_t n_reps, std::uint64_t seed, std::size_t workers,
                               const std::function<double(RandomStream&, std::size_t)>& draw,
                               double critical_value) {
    std::vector<double> sups(n_reps);
    parallel_for(n_reps, workers, [&](std::size_t r) {
        RandomStream stream = derive_stream({seed, r});
        try {
            sups[r] = draw(stream, r);
        } catch (const Error&) {
            sups[r] = std::numeric_limits<double>::quiet_NaN();
        }
    });
    return summarize_cell(sups, critical_value);
}

TestOutcome compute_statistic(StatKind kind, const Sample& sample, const ExperimentSpec& spec) {
    const double nu = spec.nu_for(kind);
    switch (kind) {
        case StatKind::Cusum: return cusum_path(ols_fit(sample), nu);
        case StatKind::CusumSq: return cusum_sq_path(ols_fit(sample), nu, Sided::TwoSidedAbs, spec.sq_scale);
        case StatKind::ZMean: return z_mean_path(sample, nu);
        case StatKind::Wald: return wald_path(sample, nu, spec.on_singular);
    }
    throw SpecError("stat: unhandled statistic");
}

McReport run_experiment(const ExperimentSpec& spec_in) {
    ExperimentSpec spec = spec_in;
    spec.validate();
    if (spec.table_source.mode == TableSource::Mode::Precomputed && spec.table_source.tables.empty()) {
        spec.table_source.tables = io::load_tables(spec.table_source.path);
    }

    McReport report;
    report.provenance = spec;
    report.provenance.table_source.tables.clear();

    // Resolve every critical value before any replication runs.
    std::map<TableKey, double> cvs;
    for (const auto& dgp : spec.dgp_grid) {
        for (StatKind kind : spec.stat_kinds) {
            const TableKey key{null_functional(kind), table_dim(kind, dgp), spec.nu_for(kind)};
            if (cvs.count(key)) continue;
            const CriticalValueTable* table = nullptr;
            CriticalValueTable simulated;
            if (spec.table_source.mode == TableSource::Mode::Precomputed) {
                table = find_table(spec.table_source.tables, key);
                if (table == nullptr) {
                    throw LookupError(fmt::format("critical values: no {} table for p = {}, nu = {} (statistic {})",
                                                  to_string(key.kind), key.p, key.nu, to_string(kind)));
                }
            } else {
                FunctionalSpec fs;
                fs.kind = key.kind;
                fs.p = key.p;
                fs.nu = key.nu;
                const std::vector<double> levels{1.0 - spec.level};
                simulated = tabulate(fs, levels, spec.table_source.n_reps, spec.table_source.n_steps,
                                     spec.master_seed ^ kTableSeedSalt, spec.workers);
                table = &simulated;
            }
            cvs[key] = table->quantile(1.0 - spec.level);
            report.tables.push_back(*table);
        }
    }

    const std::size_t n_stats = spec.stat_kinds.size();
    for (const auto& dgp : spec.dgp_grid) {
        // sups[s][r]
        std::vector<std::vector<double>> sups(n_stats, std::vector<double>(spec.n_reps));
        std::vector<std::vector<SamplePath>> kept(n_stats, std::vector<SamplePath>(std::min(spec.paths_sample, spec.n_reps)));
        parallel_for(spec.n_reps, spec.workers, [&](std::size_t r) {
            RandomStream stream = derive_stream({spec.master_seed, r});
            std::optional<Sample> sample;
            try {
                sample = generate(dgp, stream);
            } catch (const Error&) {
                for (std::size_t s = 0; s < n_stats; ++s) sups[s][r] = std::numeric_limits<double>::quiet_NaN();
                return;
            }
            for (std::size_t s = 0; s < n_stats; ++s) {
                try {
                    TestOutcome out = compute_statistic(spec.stat_kinds[s], *sample, spec);
                    sups[s][r] = out.sup_value;
                    if (r < kept[s].size()) kept[s][r] = SamplePath{r, std::move(out.ks), std::move(out.path)};
                } catch (const Error&) {
                    sups[s][r] = std::numeric_limits<double>::quiet_NaN();
                    if (r < kept[s].size()) kept[s][r] = SamplePath{r, {}, {}};
                }
            }
        });

        for (std::size_t s = 0; s < n_stats; ++s) {
            const StatKind kind = spec.stat_kinds[s];
            const TableKey key{null_functional(kind), table_dim(kind, dgp), spec.nu_for(kind)};
            const double cv = cvs.at(key);
            const CellResult cell = summarize_cell(sups[s], cv);
            McRow row;
            row.dgp = dgp;
            row.stat = kind;
            row.nu = key.nu;
            row.level = spec.level;
            row.p = key.p;
            row.n_reps = spec.n_reps;
            row.failed = cell.failed;
            row.critical_value = cv;
            row.rejection_rate = cell.rejection_rate;
            row.mc_stderr = cell.mc_stderr;
            row.mean_sup = cell.mean_sup;
            row.sup_q50 = cell.sup_q50;
            row.sup_q95 = cell.sup_q95;
            row.seed = spec.master_seed;
            row.paths = std::move(kept[s]);
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

ExperimentSpec size_distortion_spec(const std::vector<double>& c_grid, const std::vector<double>& corr_grid,
                                    std::size_t T, ExperimentSpec base) {
    if (c_grid.empty()) throw SpecError("c_grid: at least one value is required");
    if (corr_grid.empty()) throw SpecError("corr_grid: at least one value is required");
    base.dgp_grid.clear();
    for (double c : c_grid) {
        for (double corr : corr_grid) {
            DgpSpec d;
            d.family = Family::PredictiveLUR;
            d.T = T;
            d.s = 0.0;
            d.params_pre = {0.0};
            d.params_post = {0.0};
            d.cov = InnovCov::from_correlation(corr);
            d.persistence_c = c;
            d.mu = 0.0;
            d.x0 = 0.0;
            d.fit_intercept = true;
            base.dgp_grid.push_back(d);
        }
    }
    return base;
}

McReport size_distortion_study(const std::vector<double>& c_grid, const std::vector<double>& corr_grid,
                               std::size_t T, const std::vector<StatKind>& stat_kinds, std::size_t n_reps,
                               std::uint64_t seed, ExperimentSpec base) {
    base.stat_kinds = stat_kinds;
    base.n_reps = n_reps;
    base.master_seed = seed;
    return run_experiment(size_distortion_spec(c_grid, corr_grid, T, std::move(base)));
}

}  // namespace breaklab
