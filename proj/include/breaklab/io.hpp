#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "breaklab/break_tests.hpp"
#include "breaklab/dgp.hpp"
#include "breaklab/estimators.hpp"
#include "breaklab/experiments.hpp"
#include "breaklab/limit_lab.hpp"

namespace breaklab::io {

using nlohmann::json;

/// Bumped whenever a CSV header or JSON layout changes.
inline constexpr int kSchemaVersion = 1;

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_number(double v);

// Files. Errors are SpecError naming the path.
[[nodiscard]] std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] json read_json(const std::filesystem::path& path);

// DgpSpec as a flat object with keys family, T, s, beta_pre, beta_post, sigma_eps_sq,
// sigma_u_sq, sigma_eps_u, c, mu, x0, fit_intercept. Missing keys keep their defaults;
// unknown keys are rejected.
[[nodiscard]] json to_json(const DgpSpec& spec);
[[nodiscard]] DgpSpec dgp_from_json(const json& j);

[[nodiscard]] json to_json(const CriticalValueTable& table);
[[nodiscard]] CriticalValueTable table_from_json(const json& j);
/// A file holding one table object or an array of them.
[[nodiscard]] std::vector<CriticalValueTable> load_tables(const std::filesystem::path& path);

[[nodiscard]] json to_json(const TestOutcome& outcome);

/// beta_hat, sigma_hat_sq, k; partial sums and their covariance when requested.
[[nodiscard]] json fit_to_json(const OlsFit& fit, std::optional<std::size_t> k = std::nullopt,
                               bool with_partial_sums = false);

/// ExperimentSpec object; `"study": "size_distortion"` with c_grid, corr_grid and T
/// replaces an explicit dgp_grid.
[[nodiscard]] json to_json(const ExperimentSpec& spec);
[[nodiscard]] ExperimentSpec experiment_from_json(const json& j);

/// CSV with header t,y,x1,...,xp.
[[nodiscard]] std::string sample_to_csv(const Sample& sample);
/// Reads a column named y plus any x1..xp columns (intercept only when none); a leading
/// t column is ignored.
[[nodiscard]] Sample sample_from_csv(const std::string& text, const std::string& source = "input");

/// CSV with header k,value.
[[nodiscard]] std::string path_to_csv(const TestOutcome& outcome);

/// Report CSV: family,T,s,c,corr,stat,nu,level,n_reps,failed,reject_rate,mc_se,sup_q50,sup_q95.
[[nodiscard]] std::string report_to_csv(const McReport& report);
/// Raw paths of every cell: family,T,c,corr,stat,rep,k,value.
[[nodiscard]] std::string report_paths_to_csv(const McReport& report);
/// Report rows plus provenance as JSON.
[[nodiscard]] json to_json(const McReport& report);

}  // namespace breaklab::io
