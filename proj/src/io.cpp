#include "breaklab/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "breaklab/errors.hpp"

namespace breaklab::io {

namespace {

template <class T>
T get_field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SpecError(fmt::format("{}: {}", key, e.what()));
    }
}

template <class T>
void read_optional(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = get_field<T>(j, key);
}

std::vector<double> read_vector(const json& j, const char* key) {
    const json& v = j.at(key);
    if (v.is_number()) return {v.get<double>()};
    return get_field<std::vector<double>>(j, key);
}

void reject_unknown(const json& j, const std::set<std::string>& known, std::string_view where) {
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw SpecError(fmt::format("{}: unknown key '{}'", where, key));
    }
}

std::string level_key(double level) {
    std::string s = fmt::format("{:.2f}", level);
    if (std::stod(s) != level) s = format_number(level);
    return s;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& source, std::size_t line, std::size_t col) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw SpecError(fmt::format("{}: line {}, column {}: '{}' is not a number", source, line, col + 1, s));
    }
    return v;
}

std::string_view on_singular_name(OnSingular o) { return o == OnSingular::Skip ? "skip" : "fail"; }
std::string_view sq_scale_name(SqScale s) { return s == SqScale::SdOfSquares ? "sd" : "sigma"; }

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError(fmt::format("{}: cannot open file", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SpecError(fmt::format("{}: cannot open file for writing", path.string()));
    out << text;
    if (!out) throw SpecError(fmt::format("{}: write failed", path.string()));
}

json read_json(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError(fmt::format("{}: invalid JSON ({})", path.string(), e.what()));
    }
}

json to_json(const DgpSpec& d) {
    return json{{"family", std::string(to_string(d.family))},
                {"T", d.T},
                {"s", d.s},
                {"beta_pre", d.params_pre},
                {"beta_post", d.params_post},
                {"sigma_eps_sq", d.cov.sigma_eps_sq},
                {"sigma_u_sq", d.cov.sigma_u_sq},
                {"sigma_eps_u", d.cov.sigma_eps_u},
                {"c", d.persistence_c},
                {"mu", d.mu},
                {"x0", d.x0},
                {"fit_intercept", d.fit_intercept}};
}

DgpSpec dgp_from_json(const json& j) {
    if (!j.is_object()) throw SpecError("dgp: expected a JSON object");
    reject_unknown(j,
                   {"family", "T", "s", "beta_pre", "beta_post", "sigma_eps_sq", "sigma_u_sq", "sigma_eps_u", "c",
                    "mu", "x0", "fit_intercept"},
                   "dgp");
    DgpSpec d;
    if (j.contains("family")) d.family = parse_family(get_field<std::string>(j, "family"));
    read_optional(j, "T", d.T);
    read_optional(j, "s", d.s);
    if (j.contains("beta_pre")) d.params_pre = read_vector(j, "beta_pre");
    d.params_post = j.contains("beta_post") ? read_vector(j, "beta_post") : d.params_pre;
    read_optional(j, "sigma_eps_sq", d.cov.sigma_eps_sq);
    read_optional(j, "sigma_u_sq", d.cov.sigma_u_sq);
    read_optional(j, "sigma_eps_u", d.cov.sigma_eps_u);
    read_optional(j, "c", d.persistence_c);
    read_optional(j, "mu", d.mu);
    read_optional(j, "x0", d.x0);
    read_optional(j, "fit_intercept", d.fit_intercept);
    d.validate();
    return d;
}

json to_json(const CriticalValueTable& t) {
    json levels = json::object();
    for (const auto& [lv, v] : t.quantiles) levels[level_key(lv)] = v;
    json j{{"schema_version", kSchemaVersion},
           {"kind", std::string(to_string(t.kind))},
           {"p", t.p},
           {"nu", t.nu},
           {"c", t.c ? json(*t.c) : json(nullptr)},
           {"levels", levels},
           {"meta", {{"n_steps", t.meta.n_steps}, {"n_reps", t.meta.n_reps}, {"seed", t.meta.seed}}}};
    if (t.corr) j["corr"] = *t.corr;
    return j;
}

CriticalValueTable table_from_json(const json& j) {
    if (!j.is_object()) throw SpecError("critical values: expected a JSON object");
    CriticalValueTable t;
    t.kind = parse_functional(get_field<std::string>(j, "kind"));
    t.p = get_field<std::size_t>(j, "p");
    t.nu = get_field<double>(j, "nu");
    if (j.contains("c") && !j.at("c").is_null()) t.c = get_field<double>(j, "c");
    if (j.contains("corr") && !j.at("corr").is_null()) t.corr = get_field<double>(j, "corr");
    const json& levels = j.at("levels");
    for (const auto& [key, value] : levels.items()) {
        double lv = 0.0;
        try {
            lv = std::stod(key);
        } catch (const std::exception&) {
            throw SpecError(fmt::format("levels: key '{}' is not a number", key));
        }
        t.quantiles[lv] = value.get<double>();
    }
    if (j.contains("meta")) {
        const json& m = j.at("meta");
        read_optional(m, "n_steps", t.meta.n_steps);
        read_optional(m, "n_reps", t.meta.n_reps);
        read_optional(m, "seed", t.meta.seed);
    }
    return t;
}

std::vector<CriticalValueTable> load_tables(const std::filesystem::path& path) {
    const json j = read_json(path);
    std::vector<CriticalValueTable> out;
    try {
        if (j.is_array()) {
            for (const auto& e : j) out.push_back(table_from_json(e));
        } else {
            out.push_back(table_from_json(j));
        }
    } catch (const SpecError& e) {
        throw SpecError(fmt::format("{}: {}", path.string(), e.what()));
    } catch (const json::exception& e) {
        throw SpecError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return out;
}

json to_json(const TestOutcome& o) {
    json j{{"schema_version", kSchemaVersion},
           {"stat", std::string(to_string(o.statistic_kind))},
           {"sup", o.sup_value},
           {"k_hat", o.argmax_k},
           {"cv", o.critical_value ? json(*o.critical_value) : json(nullptr)},
           {"reject", o.reject ? json(*o.reject) : json(nullptr)},
           {"level", o.level ? json(*o.level) : json(nullptr)},
           {"nu", o.nu},
           {"T", o.T},
           {"p", o.p},
           {"sided", o.sided == Sided::TwoSidedAbs ? "two_sided_abs" : "signed"},
           {"k_min", o.ks.empty() ? 0 : o.ks.front()},
           {"k_max", o.ks.empty() ? 0 : o.ks.back()},
           {"skipped", o.skipped}};
    return j;
}

json fit_to_json(const OlsFit& fit, std::optional<std::size_t> k, bool with_partial_sums) {
    json j{{"schema_version", kSchemaVersion},
           {"beta_hat", std::vector<double>(fit.beta_hat.data(), fit.beta_hat.data() + fit.beta_hat.size())},
           {"sigma_hat_sq", fit.sigma_hat_sq},
           {"k", k ? json(*k) : json(nullptr)},
           {"T", fit.size()}};
    if (with_partial_sums) {
        const Eigen::MatrixXd S = residual_partial_sums(fit);
        json rows = json::array();
        for (Eigen::Index t = 0; t < S.rows(); ++t) {
            if (S.cols() == 1) {
                rows.push_back(S(t, 0));
                continue;
            }
            json r = json::array();
            for (Eigen::Index c = 0; c < S.cols(); ++c) r.push_back(S(t, c));
            rows.push_back(r);
        }
        const Eigen::MatrixXd C = partial_sum_covariance(fit);
        json cm = json::array();
        for (Eigen::Index a = 0; a < C.rows(); ++a) {
            json r = json::array();
            for (Eigen::Index b = 0; b < C.cols(); ++b) r.push_back(C(a, b));
            cm.push_back(r);
        }
        j["partial_sums"] = rows;
        j["c_hat"] = cm;
    }
    return j;
}

json to_json(const ExperimentSpec& s) {
    json grid = json::array();
    for (const auto& d : s.dgp_grid) grid.push_back(to_json(d));
    json stats = json::array();
    for (StatKind k : s.stat_kinds) stats.push_back(std::string(to_string(k)));
    json table;
    if (s.table_source.mode == TableSource::Mode::Precomputed) {
        table = {{"source", "precomputed"}, {"path", s.table_source.path}};
    } else {
        table = {{"source", "simulate"}, {"n_reps", s.table_source.n_reps}, {"n_steps", s.table_source.n_steps}};
    }
    return json{{"schema_version", kSchemaVersion},
                {"dgp_grid", grid},
                {"stats", stats},
                {"nu", s.nu},
                {"nu_cusum", s.nu_cusum},
                {"level", s.level},
                {"n_reps", s.n_reps},
                {"seed", s.master_seed},
                {"table", table},
                {"on_singular", std::string(on_singular_name(s.on_singular))},
                {"cusumsq_scale", std::string(sq_scale_name(s.sq_scale))},
                {"paths_sample", s.paths_sample}};
}

ExperimentSpec experiment_from_json(const json& j) {
    if (!j.is_object()) throw SpecError("experiment: expected a JSON object");
    reject_unknown(j,
                   {"schema_version", "dgp_grid", "stats", "nu", "nu_cusum", "level", "n_reps", "seed", "table",
                    "on_singular", "cusumsq_scale", "paths_sample", "workers", "study", "c_grid", "corr_grid", "T"},
                   "experiment");
    ExperimentSpec s;
    if (j.contains("stats")) {
        s.stat_kinds.clear();
        for (const auto& name : get_field<std::vector<std::string>>(j, "stats")) {
            s.stat_kinds.push_back(parse_stat_kind(name));
        }
    }
    read_optional(j, "nu", s.nu);
    read_optional(j, "nu_cusum", s.nu_cusum);
    read_optional(j, "level", s.level);
    read_optional(j, "n_reps", s.n_reps);
    read_optional(j, "seed", s.master_seed);
    read_optional(j, "paths_sample", s.paths_sample);
    read_optional(j, "workers", s.workers);
    if (j.contains("on_singular")) {
        const auto v = get_field<std::string>(j, "on_singular");
        if (v == "skip") s.on_singular = OnSingular::Skip;
        else if (v == "fail") s.on_singular = OnSingular::Fail;
        else throw SpecError(fmt::format("on_singular: expected skip or fail, got '{}'", v));
    }
    if (j.contains("cusumsq_scale")) {
        const auto v = get_field<std::string>(j, "cusumsq_scale");
        if (v == "sd") s.sq_scale = SqScale::SdOfSquares;
        else if (v == "sigma") s.sq_scale = SqScale::SigmaHat;
        else throw SpecError(fmt::format("cusumsq_scale: expected sd or sigma, got '{}'", v));
    }
    if (j.contains("table")) {
        const json& t = j.at("table");
        const auto source = get_field<std::string>(t, "source");
        if (source == "precomputed") {
            s.table_source.mode = TableSource::Mode::Precomputed;
            s.table_source.path = get_field<std::string>(t, "path");
        } else if (source == "simulate") {
            s.table_source.mode = TableSource::Mode::SimulateInline;
            read_optional(t, "n_reps", s.table_source.n_reps);
            read_optional(t, "n_steps", s.table_source.n_steps);
        } else {
            throw SpecError(fmt::format("table.source: expected precomputed or simulate, got '{}'", source));
        }
    }
    if (j.contains("study")) {
        const auto study = get_field<std::string>(j, "study");
        if (study != "size_distortion") throw SpecError(fmt::format("study: unknown study '{}'", study));
        if (j.contains("dgp_grid")) throw SpecError("dgp_grid: not allowed together with study");
        s = size_distortion_spec(get_field<std::vector<double>>(j, "c_grid"),
                                 get_field<std::vector<double>>(j, "corr_grid"), get_field<std::size_t>(j, "T"),
                                 std::move(s));
    } else if (j.contains("dgp_grid")) {
        const json& grid = j.at("dgp_grid");
        if (!grid.is_array()) throw SpecError("dgp_grid: expected an array");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            try {
                s.dgp_grid.push_back(dgp_from_json(grid[i]));
            } catch (const SpecError& e) {
                throw SpecError(fmt::format("dgp_grid[{}].{}", i, e.what()));
            }
        }
    }
    s.validate();
    return s;
}

std::string sample_to_csv(const Sample& sample) {
    std::string out = "t,y";
    for (std::size_t c = 1; c <= sample.dim(); ++c) out += fmt::format(",x{}", c);
    out += '\n';
    for (Eigen::Index t = 0; t < sample.y.size(); ++t) {
        out += fmt::format("{},{}", t + 1, format_number(sample.y[t]));
        for (Eigen::Index c = 0; c < sample.X.cols(); ++c) out += "," + format_number(sample.X(t, c));
        out += '\n';
    }
    return out;
}

Sample sample_from_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SpecError(fmt::format("{}: empty file", source));
    const auto header = split_line(line);
    long ycol = -1;
    std::vector<std::pair<int, std::size_t>> xcols;  // (index in name, column)
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& h = header[c];
        if (h == "y") {
            ycol = static_cast<long>(c);
        } else if (h.size() > 1 && h[0] == 'x') {
            int idx = 0;
            const auto [p, ec] = std::from_chars(h.data() + 1, h.data() + h.size(), idx);
            if (ec != std::errc{} || p != h.data() + h.size()) {
                throw SpecError(fmt::format("{}: unrecognized column '{}'", source, h));
            }
            xcols.emplace_back(idx, c);
        } else if (h != "t") {
            throw SpecError(fmt::format("{}: unrecognized column '{}'", source, h));
        }
    }
    if (ycol < 0) throw SpecError(fmt::format("{}: header has no 'y' column", source));
    std::sort(xcols.begin(), xcols.end());

    std::vector<double> ys;
    std::vector<std::vector<double>> xs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw SpecError(fmt::format("{}: line {} has {} fields, header has {}", source, lineno, cells.size(),
                                        header.size()));
        }
        ys.push_back(parse_double(cells[static_cast<std::size_t>(ycol)], source, lineno, static_cast<std::size_t>(ycol)));
        std::vector<double> row;
        for (const auto& [_, c] : xcols) row.push_back(parse_double(cells[c], source, lineno, c));
        xs.push_back(std::move(row));
    }
    if (ys.empty()) throw SpecError(fmt::format("{}: no data rows", source));
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    Eigen::MatrixXd X;
    if (!xcols.empty()) {
        X.resize(static_cast<Eigen::Index>(ys.size()), static_cast<Eigen::Index>(xcols.size()));
        for (std::size_t t = 0; t < xs.size(); ++t) {
            for (std::size_t c = 0; c < xcols.size(); ++c) {
                X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = xs[t][c];
            }
        }
    }
    return make_sample(std::move(y), std::move(X));
}

std::string path_to_csv(const TestOutcome& o) {
    std::string out = "k,value\n";
    for (std::size_t i = 0; i < o.ks.size(); ++i) out += fmt::format("{},{}\n", o.ks[i], format_number(o.path[i]));
    return out;
}

std::string report_to_csv(const McReport& report) {
    std::string out = "family,T,s,c,corr,stat,nu,level,n_reps,failed,reject_rate,mc_se,sup_q50,sup_q95\n";
    for (const auto& r : report.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.dgp.family), r.dgp.T,
                           format_number(r.dgp.s), format_number(r.dgp.persistence_c),
                           format_number(r.dgp.cov.correlation()), to_string(r.stat), format_number(r.nu),
                           format_number(r.level), r.n_reps, r.failed, format_number(r.rejection_rate),
                           format_number(r.mc_stderr), format_number(r.sup_q50), format_number(r.sup_q95));
    }
    return out;
}

std::string report_paths_to_csv(const McReport& report) {
    std::string out = "family,T,c,corr,stat,rep,k,value\n";
    for (const auto& r : report.rows) {
        for (const auto& sp : r.paths) {
            for (std::size_t i = 0; i < sp.ks.size(); ++i) {
                out += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(r.dgp.family), r.dgp.T,
                                   format_number(r.dgp.persistence_c), format_number(r.dgp.cov.correlation()),
                                   to_string(r.stat), sp.replication, sp.ks[i], format_number(sp.path[i]));
            }
        }
    }
    return out;
}

json to_json(const McReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"dgp", to_json(r.dgp)},
                        {"stat", std::string(to_string(r.stat))},
                        {"nu", r.nu},
                        {"level", r.level},
                        {"p", r.p},
                        {"n_reps", r.n_reps},
                        {"failed", r.failed},
                        {"critical_value", r.critical_value},
                        {"reject_rate", r.rejection_rate},
                        {"mc_se", r.mc_stderr},
                        {"mean_sup", r.mean_sup},
                        {"sup_q50", r.sup_q50},
                        {"sup_q95", r.sup_q95},
                        {"seed", r.seed}});
    }
    json tables = json::array();
    for (const auto& t : report.tables) tables.push_back(to_json(t));
    return json{{"schema_version", kSchemaVersion},
                {"rows", rows},
                {"tables", tables},
                {"provenance", to_json(report.provenance)}};
}

}  // namespace breaklab::io
