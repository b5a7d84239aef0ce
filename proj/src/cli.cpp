#include "breaklab/cli.hpp"

#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "breaklab/break_tests.hpp"
#include "breaklab/errors.hpp"
#include "breaklab/estimators.hpp"
#include "breaklab/experiments.hpp"
#include "breaklab/io.hpp"
#include "breaklab/limit_lab.hpp"

namespace breaklab::cli {

namespace {

using io::json;

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw SpecError(fmt::format("{}: '{}' is not a number", flag, item));
        }
    }
    if (out.empty()) throw SpecError(fmt::format("{}: empty list", flag));
    return out;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        io::write_text(path, text);
    }
}

struct GlobalOptions {
    std::uint64_t seed = kDefaultSeed;
    int verbosity = 0;
};

struct SimulateOptions {
    std::string config;
    std::string out;
    std::string family;
    std::size_t T = 0;
    double s = 0.0;
    std::string beta_pre;
    std::string beta_post;
    double sigma_eps_sq = 1.0;
    double sigma_eps = 1.0;
    double sigma_u_sq = 1.0;
    double sigma_eps_u = 0.0;
    double c = 0.0;
    double mu = 0.0;
    double x0 = 0.0;
    bool no_intercept = false;
    std::uint64_t stream = 0;
};

struct TestOptions {
    std::string stat;
    std::string input;
    std::string critvals;
    std::string path_out;
    std::string out;
    std::optional<double> nu;
    double level = 0.05;
    std::string on_singular = "skip";
    bool sigma_scaled = false;
    bool signed_path = false;
};

struct FitOptions {
    std::string input;
    std::string out;
    std::optional<std::size_t> k;
};

struct CritvalsOptions {
    std::string kind;
    std::size_t p = 1;
    std::optional<double> nu;
    double c = 0.0;
    double corr = 0.0;
    std::size_t reps = 100000;
    std::size_t steps = kDefaultSteps;
    std::string levels = "0.90,0.95,0.99";
    std::size_t workers = 0;
    std::string out;
};

struct ExperimentOptions {
    std::string spec;
    std::string out;
    std::string json_out;
    std::string paths_out;
    std::size_t workers = 0;
    std::size_t paths_sample = 0;
    std::optional<std::size_t> reps;
};

int run_simulate(const SimulateOptions& o, const GlobalOptions& g, const CLI::App& cmd, std::ostream& out) {
    DgpSpec d;
    if (!o.config.empty()) {
        try {
            d = io::dgp_from_json(io::read_json(o.config));
        } catch (const SpecError& e) {
            throw SpecError(fmt::format("{}: {}", o.config, e.what()));
        }
    }
    auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
    if (given("--family")) d.family = parse_family(o.family);
    if (given("--T")) d.T = o.T;
    if (given("--s")) d.s = o.s;
    if (given("--beta-pre")) {
        d.params_pre = parse_list(o.beta_pre, "--beta-pre");
        if (!given("--beta-post")) d.params_post = d.params_pre;
    }
    if (given("--beta-post")) d.params_post = parse_list(o.beta_post, "--beta-post");
    if (given("--sigma-eps-sq")) d.cov.sigma_eps_sq = o.sigma_eps_sq;
    if (given("--sigma-eps")) d.cov.sigma_eps_sq = o.sigma_eps * o.sigma_eps;
    if (given("--sigma-u-sq")) d.cov.sigma_u_sq = o.sigma_u_sq;
    if (given("--sigma-eps-u")) d.cov.sigma_eps_u = o.sigma_eps_u;
    if (given("--c")) d.persistence_c = o.c;
    if (given("--mu")) d.mu = o.mu;
    if (given("--x0")) d.x0 = o.x0;
    if (o.no_intercept) d.fit_intercept = false;
    d.validate();

    RandomStream stream = derive_stream({g.seed, o.stream});
    const Sample sample = generate(d, stream);
    emit(io::sample_to_csv(sample), o.out, out);
    if (!o.out.empty() && o.out != "-") {
        json prov{{"schema_version", io::kSchemaVersion},
                  {"provenance", {{"dgp", io::to_json(d)}, {"seed", g.seed}, {"stream", o.stream}}},
                  {"truth", {{"k", sample.truth.k}, {"rho", sample.truth.rho}, {"phi", sample.truth.phi},
                             {"sigma_v_sq", sample.truth.sigma_v_sq}}}};
        io::write_text(o.out + ".json", prov.dump(2) + "\n");
    }
    spdlog::info("simulated {} observations of {} (k = {})", d.T, to_string(d.family), sample.truth.k);
    return kOk;
}

int run_fit(const FitOptions& o, std::ostream& out) {
    const Sample sample = io::sample_from_csv(io::read_text(o.input), o.input);
    json j;
    if (o.k) {
        const SplitFit sf = split_fit(sample, *o.k);
        j = io::fit_to_json(sf.pooled_null_fit, sf.k, true);
        j["beta_pre"] = std::vector<double>(sf.fit_pre.beta_hat.data(),
                                            sf.fit_pre.beta_hat.data() + sf.fit_pre.beta_hat.size());
        j["beta_post"] = std::vector<double>(sf.fit_post.beta_hat.data(),
                                             sf.fit_post.beta_hat.data() + sf.fit_post.beta_hat.size());
        j["wald"] = wald_at(sample, sf.k);
    } else {
        j = io::fit_to_json(ols_fit(sample, o.input), std::nullopt, true);
    }
    j["provenance"] = {{"input", o.input}};
    emit(j.dump(2) + "\n", o.out, out);
    return kOk;
}

int run_test(const TestOptions& o, std::ostream& out) {
    const StatKind kind = parse_stat_kind(o.stat);
    const Sample sample = io::sample_from_csv(io::read_text(o.input), o.input);
    const double nu = o.nu.value_or(default_nu(kind));
    const Sided sided = o.signed_path ? Sided::Signed : Sided::TwoSidedAbs;
    OnSingular on_singular = OnSingular::Skip;
    if (o.on_singular == "fail") on_singular = OnSingular::Fail;
    else if (o.on_singular != "skip") throw SpecError(fmt::format("--on-singular: expected skip or fail, got '{}'", o.on_singular));

    TestOutcome outcome;
    switch (kind) {
        case StatKind::Cusum: outcome = cusum_path(ols_fit(sample, o.input), nu, sided); break;
        case StatKind::CusumSq:
            outcome = cusum_sq_path(ols_fit(sample, o.input), nu, sided,
                                    o.sigma_scaled ? SqScale::SigmaHat : SqScale::SdOfSquares);
            break;
        case StatKind::ZMean: outcome = z_mean_path(sample, nu); break;
        case StatKind::Wald: outcome = wald_path(sample, nu, on_singular); break;
    }
    for (std::size_t k : outcome.skipped) spdlog::warn("wald: singular regime fit at k = {} skipped", k);

    if (!o.critvals.empty()) {
        const auto tables = io::load_tables(o.critvals);
        std::optional<LookupError> last;
        bool decided = false;
        for (const auto& t : tables) {
            try {
                outcome = decide(outcome, t, o.level);
                decided = true;
                break;
            } catch (const LookupError& e) {
                last = e;
            }
        }
        if (!decided) {
            throw LookupError(fmt::format("{}: {}", o.critvals, last ? last->what() : "no tables"));
        }
    }
    json j = io::to_json(outcome);
    j["provenance"] = {{"input", o.input},       {"critvals", o.critvals},
                       {"level", o.level},       {"nu", nu},
                       {"on_singular", o.on_singular}, {"cusumsq_scale", o.sigma_scaled ? "sigma" : "sd"}};
    emit(j.dump(2) + "\n", o.out, out);
    if (!o.path_out.empty()) io::write_text(o.path_out, io::path_to_csv(outcome));
    return kOk;
}

int run_critvals(const CritvalsOptions& o, const GlobalOptions& g, std::ostream& out) {
    FunctionalSpec fs;
    fs.kind = parse_functional(o.kind);
    fs.p = o.p;
    fs.nu = o.nu.value_or(fs.kind == Functional::SupQp ? 0.15 : 0.0);
    fs.c = o.c;
    fs.corr = o.corr;
    const std::vector<double> levels = parse_list(o.levels, "--levels");
    spdlog::info("tabulating {} (p = {}, nu = {}) with {} draws on {} steps", to_string(fs.kind), fs.p, fs.nu,
                 o.reps, o.steps);
    const CriticalValueTable table = tabulate(fs, levels, o.reps, o.steps, g.seed, o.workers);
    emit(io::to_json(table).dump(2) + "\n", o.out, out);
    return kOk;
}

int run_experiment_cmd(const ExperimentOptions& o, const GlobalOptions& g, const CLI::App& cmd,
                       const CLI::App& app, std::ostream& out) {
    ExperimentSpec spec;
    try {
        spec = io::experiment_from_json(io::read_json(o.spec));
    } catch (const SpecError& e) {
        const std::string msg = e.what();
        if (msg.rfind(o.spec, 0) == 0) throw;
        throw SpecError(fmt::format("{}: {}", o.spec, msg));
    }
    if (app.get_option("--seed")->count() > 0) spec.master_seed = g.seed;
    if (cmd.get_option("--workers")->count() > 0) spec.workers = o.workers;
    if (cmd.get_option("--paths-sample")->count() > 0) spec.paths_sample = o.paths_sample;
    if (o.reps) spec.n_reps = *o.reps;
    spdlog::info("experiment: {} cells x {} statistics, {} replications, seed {}", spec.dgp_grid.size(),
                 spec.stat_kinds.size(), spec.n_reps, spec.master_seed);
    const McReport report = run_experiment(spec);
    emit(io::report_to_csv(report), o.out, out);
    if (!o.json_out.empty()) io::write_text(o.json_out, io::to_json(report).dump(2) + "\n");
    if (spec.paths_sample > 0) {
        const std::string paths = o.paths_out.empty() ? (o.out.empty() ? std::string{} : o.out + ".paths.csv") : o.paths_out;
        if (paths.empty()) throw SpecError("--paths-out: required when the report goes to standard output");
        io::write_text(paths, io::report_paths_to_csv(report));
    }
    return kOk;
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err, int verbosity) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
    auto logger = std::make_shared<spdlog::logger>("breaklab", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(verbosity >= 2 ? spdlog::level::debug
                                     : verbosity == 1 ? spdlog::level::info : spdlog::level::warn);
    return logger;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"breaklab: structural-break statistics, limit functionals and Monte Carlo studies"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions g;
    app.add_option("--seed", g.seed, "Master seed (u64)")->capture_default_str();
    app.add_flag("-v,--verbose", g.verbosity, "Increase log verbosity (repeatable)");

    SimulateOptions so;
    auto* sim = app.add_subcommand("simulate", "Generate one sample as CSV (t,y,x1,...,xp)");
    sim->add_option("--config", so.config, "Flat JSON DgpSpec; flags below override it");
    sim->add_option("--family", so.family, "location | linear_regression | cointegration | predictive_lur | ar1");
    sim->add_option("--T", so.T, "Sample size (count, >= 4)");
    sim->add_option("--s", so.s, "Break fraction in [0,1]; 0 or 1 means no break");
    sim->add_option("--beta-pre,--mu-pre", so.beta_pre, "Pre-break coefficients, comma separated");
    sim->add_option("--beta-post,--mu-post", so.beta_post, "Post-break coefficients (default: = pre)");
    sim->add_option("--sigma-eps-sq", so.sigma_eps_sq, "Variance of eps (default 1)");
    sim->add_option("--sigma-eps", so.sigma_eps, "Standard deviation of eps (alternative to --sigma-eps-sq)");
    sim->add_option("--sigma-u-sq", so.sigma_u_sq, "Variance of u (default 1)");
    sim->add_option("--sigma-eps-u", so.sigma_eps_u, "Covariance of eps and u (default 0)");
    sim->add_option("--c", so.c, "Persistence c, root 1 + c/T (c < 0 near-stationary; default 0)");
    sim->add_option("--mu", so.mu, "Intercept of the predictive regression (default 0)");
    sim->add_option("--x0", so.x0, "Initial regressor value (default 0)");
    sim->add_flag("--no-intercept", so.no_intercept, "Predictive regression without intercept column");
    sim->add_option("--stream", so.stream, "Replication index used as stream id (default 0)");
    sim->add_option("--out", so.out, "Output CSV (default stdout); provenance goes to <out>.json");

    FitOptions fo;
    auto* fit = app.add_subcommand("fit", "OLS fit, residual partial sums and their covariance as JSON");
    fit->add_option("--input", fo.input, "Sample CSV")->required();
    fit->add_option("--k", fo.k, "Also fit both regimes split after row k");
    fit->add_option("--out", fo.out, "Output JSON (default stdout)");

    TestOptions to;
    auto* test = app.add_subcommand("test", "Compute a break statistic path, its sup and decision");
    test->add_option("--stat", to.stat, "cusum | cusumsq | zmean | wald")->required();
    test->add_option("--input", to.input, "Sample CSV")->required();
    test->add_option("--nu", to.nu, "Trimming fraction in [0,0.5) (default 0 for cusum/cusumsq, 0.15 otherwise)");
    test->add_option("--level", to.level, "Significance level (default 0.05)");
    test->add_option("--critvals", to.critvals, "Critical value table JSON (one table or an array)");
    test->add_option("--path-out", to.path_out, "Write the path as CSV (k,value)");
    test->add_option("--out", to.out, "Output JSON (default stdout)");
    test->add_option("--on-singular", to.on_singular, "skip | fail for singular regime fits (default skip)");
    test->add_flag("--paper-literal,--sigma-scale", to.sigma_scaled, "CUSUM of squares scaled by sigma_hat instead of sd of squares");
    test->add_flag("--signed", to.signed_path, "Take the sup of the signed path instead of its absolute value");

    CritvalsOptions co;
    auto* crit = app.add_subcommand("critvals", "Tabulate quantiles of a limit functional");
    crit->add_option("--kind", co.kind, "supabsbb | supqp | supabslurcusum | cvmp1trace")->required();
    crit->add_option("--p", co.p, "Dimension (default 1)");
    crit->add_option("--nu", co.nu, "Trimming fraction (default 0.15 for supqp, 0 otherwise)");
    crit->add_option("--c", co.c, "Persistence c for supabslurcusum (default 0)");
    crit->add_option("--corr", co.corr, "corr(B_eps, B_u) for supabslurcusum (default 0)");
    crit->add_option("--reps", co.reps, "Number of draws (>= 1000, default 100000)");
    crit->add_option("--steps", co.steps, "Grid steps per path (default 2000)");
    crit->add_option("--levels", co.levels, "Quantile levels, comma separated (default 0.90,0.95,0.99)");
    crit->add_option("--workers", co.workers, "Worker threads (default: all cores; never changes the table)");
    crit->add_option("--out", co.out, "Output JSON (default stdout)");

    ExperimentOptions eo;
    auto* exp = app.add_subcommand("experiment", "Monte Carlo size/power study from a JSON spec");
    exp->add_option("--spec", eo.spec, "Experiment JSON")->required();
    exp->add_option("--out", eo.out, "Report CSV (default stdout)");
    exp->add_option("--json-out", eo.json_out, "Report with provenance as JSON");
    exp->add_option("--workers", eo.workers, "Worker threads (default: all cores; never changes the report)");
    exp->add_option("--reps", eo.reps, "Override n_reps");
    exp->add_option("--paths-sample", eo.paths_sample, "Dump the first K statistic paths per cell");
    exp->add_option("--paths-out", eo.paths_out, "Path dump CSV (default <out>.paths.csv)");

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    auto logger = make_logger(err, g.verbosity);
    auto previous = spdlog::default_logger();
    spdlog::set_default_logger(logger);
    struct Restore {
        std::shared_ptr<spdlog::logger> prev;
        ~Restore() { spdlog::set_default_logger(prev); }
    } restore{previous};

    try {
        if (*sim) return run_simulate(so, g, *sim, out);
        if (*fit) return run_fit(fo, out);
        if (*test) return run_test(to, out);
        if (*crit) return run_critvals(co, g, out);
        if (*exp) return run_experiment_cmd(eo, g, *exp, app, out);
    } catch (const SingularMatrixError& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kNumerical;
    }
    return kUsage;
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace breaklab::cli
