#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "breaklab/cli.hpp"
#include "breaklab/errors.hpp"
#include "breaklab/io.hpp"

using namespace breaklab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "breaklab");
    std::ostringstream out, err;
    const int code = cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("breaklab_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    [[nodiscard]] std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("numbers round trip through text") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0}) CHECK(std::stod(io::format_number(v)) == v);
}

TEST_CASE("dgp spec json round trip") {
    DgpSpec d;
    d.family = Family::PredictiveLUR;
    d.T = 321;
    d.s = 0.4;
    d.params_pre = {0.0};
    d.params_post = {0.7};
    d.cov = InnovCov{1.0, 2.0, -0.5};
    d.persistence_c = -7.5;
    d.mu = 0.3;
    d.x0 = 1.25;
    d.fit_intercept = false;
    CHECK(io::dgp_from_json(io::to_json(d)) == d);

    auto j = io::to_json(d);
    j["bogus"] = 1;
    CHECK_THROWS_AS((void)io::dgp_from_json(j), SpecError);
}

TEST_CASE("table json round trip") {
    CriticalValueTable t;
    t.kind = Functional::SupAbsLurCusum;
    t.p = 1;
    t.nu = 0.05;
    t.c = -5.0;
    t.corr = -0.5;
    t.quantiles = {{0.9, 1.1}, {0.95, 1.25}, {0.99, 1.6}};
    t.meta = {2000, 10000, 42};
    const auto j = io::to_json(t);
    CHECK(j.at("schema_version") == io::kSchemaVersion);
    CHECK(j.at("levels").contains("0.95"));
    CHECK(io::table_from_json(j) == t);
}

TEST_CASE("experiment json round trip") {
    ExperimentSpec e;
    DgpSpec d;
    d.T = 50;
    e.dgp_grid = {d, d};
    e.stat_kinds = {StatKind::Wald, StatKind::CusumSq};
    e.nu = 0.2;
    e.n_reps = 250;
    e.master_seed = 9;
    e.sq_scale = SqScale::SigmaHat;
    const ExperimentSpec back = io::experiment_from_json(io::to_json(e));
    CHECK(back.dgp_grid == e.dgp_grid);
    CHECK(back.stat_kinds == e.stat_kinds);
    CHECK(back.nu == e.nu);
    CHECK(back.n_reps == e.n_reps);
    CHECK(back.master_seed == e.master_seed);
    CHECK(back.sq_scale == e.sq_scale);

    const auto study = io::experiment_from_json(io::json::parse(
        R"({"study": "size_distortion", "c_grid": [0, -5], "corr_grid": [0, -0.5, -0.95], "T": 100, "n_reps": 100})"));
    CHECK(study.dgp_grid.size() == 6);
}

TEST_CASE("sample csv round trip") {
    Eigen::VectorXd y(3);
    y << 1.5, -2.0, 0.25;
    Eigen::MatrixXd X(3, 2);
    X << 1, 0.1, 1, 0.2, 1, 0.3;
    const Sample s = make_sample(y, X);
    const std::string csv = io::sample_to_csv(s);
    CHECK(csv.rfind("t,y,x1,x2\n", 0) == 0);
    const Sample back = io::sample_from_csv(csv);
    CHECK(back.y == s.y);
    CHECK(back.X == s.X);

    const Sample bare = io::sample_from_csv("y\n1\n2\n3\n");
    CHECK(bare.dim() == 1);
    CHECK(bare.X(1, 0) == 1.0);
    CHECK_THROWS_AS((void)io::sample_from_csv("t,x1\n1,2\n"), SpecError);
    CHECK_THROWS_AS((void)io::sample_from_csv("y\n1\nabc\n"), SpecError);
}

TEST_CASE("cli: usage errors exit 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"nosuchcommand"}).code == 1);
    CHECK(run({"test", "--input", "x.csv"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("cli: missing input exits 2 and names the file") {
    const Run r = run({"test", "--stat", "wald", "--input", "missing.csv"});
    CHECK(r.code == 2);
    CHECK(r.err.find("missing.csv") != std::string::npos);
}

TEST_CASE("cli: bad spec values exit 2") {
    CHECK(run({"simulate", "--family", "location", "--T", "2"}).code == 2);
    CHECK(run({"critvals", "--kind", "supfoo", "--reps", "1000"}).code == 2);
    CHECK(run({"critvals", "--kind", "supabsbb", "--reps", "10"}).code == 2);
}

TEST_CASE("cli: singular design exits 3") {
    TempDir dir;
    io::write_text(dir / "s.csv", "y,x1,x2\n1,1,2\n2,1,2\n3,1,2\n4,1,2\n");
    const Run r = run({"fit", "--input", dir / "s.csv"});
    CHECK(r.code == 3);
    CHECK(r.err.find("column") != std::string::npos);
}

TEST_CASE("cli: critvals is deterministic") {
    TempDir dir;
    const std::vector<std::string> args{"critvals", "--kind", "supabsbb", "--reps", "1000", "--steps", "200",
                                        "--seed", "7", "--out"};
    auto a = args;
    a.push_back(dir / "t1.json");
    auto b = args;
    b.push_back(dir / "t2.json");
    REQUIRE(run(a).code == 0);
    REQUIRE(run(b).code == 0);
    CHECK(io::read_text(dir / "t1.json") == io::read_text(dir / "t2.json"));
    const auto tables = io::load_tables(dir / "t1.json");
    REQUIRE(tables.size() == 1);
    CHECK(tables[0].meta.seed == 7);
    CHECK(tables[0].quantiles.size() == 3);
}

TEST_CASE("cli: noiseless simulate, fit and test") {
    TempDir dir;
    const std::string data = dir / "d.csv";
    REQUIRE(run({"simulate", "--family", "location", "--T", "4", "--s", "0.5", "--mu-pre", "0", "--mu-post", "2",
                 "--sigma-eps", "0", "--out", data})
                .code == 0);
    const Sample s = io::sample_from_csv(io::read_text(data));
    CHECK(std::vector<double>(s.y.data(), s.y.data() + 4) == std::vector<double>{0, 0, 2, 2});
    CHECK(fs::exists(data + ".json"));

    const Run fit = run({"fit", "--input", data});
    REQUIRE(fit.code == 0);
    const auto fj = io::json::parse(fit.out);
    CHECK(fj.at("partial_sums") == io::json::parse("[-1,-2,-1,0]"));
    CHECK(fj.at("c_hat")[0][0] == 0.375);

    const Run cusum = run({"test", "--stat", "cusum", "--input", data});
    REQUIRE(cusum.code == 0);
    const auto cj = io::json::parse(cusum.out);
    CHECK(cj.at("sup") == 1.0);
    CHECK(cj.at("k_hat") == 2);

    for (const char* stat : {"wald", "zmean"}) {
        const Run r = run({"test", "--stat", stat, "--input", data, "--nu", "0.25"});
        REQUIRE(r.code == 0);
        const auto j = io::json::parse(r.out);
        CHECK(j.at("sup") == 4.0);
        CHECK(j.at("k_hat") == 2);
    }
}

TEST_CASE("cli: test against a table decides and writes the path") {
    TempDir dir;
    const std::string data = dir / "d.csv";
    const std::string table = dir / "t.json";
    REQUIRE(run({"simulate", "--family", "location", "--T", "200", "--s", "0.5", "--mu-post", "1.5", "--out", data})
                .code == 0);
    REQUIRE(run({"critvals", "--kind", "supabsbb", "--reps", "2000", "--steps", "200", "--out", table}).code == 0);
    const Run r = run({"test", "--stat", "cusum", "--input", data, "--critvals", table, "--path-out", dir / "p.csv"});
    REQUIRE(r.code == 0);
    const auto j = io::json::parse(r.out);
    CHECK(j.at("reject") == true);
    CHECK(j.at("cv").get<double>() > 1.0);
    const std::string path = io::read_text(dir / "p.csv");
    CHECK(path.rfind("k,value\n", 0) == 0);

    const Run z = run({"test", "--stat", "zmean", "--input", data, "--critvals", table});
    CHECK(z.code == 2);
}

TEST_CASE("cli: experiment report is independent of workers") {
    TempDir dir;
    const std::string spec = dir / "e.json";
    io::write_text(spec, R"({"dgp_grid": [{"family": "location", "T": 100}], "stats": ["cusum", "wald"],
                            "n_reps": 200, "seed": 5, "table": {"source": "simulate", "n_reps": 1000, "n_steps": 200}})");
    REQUIRE(run({"experiment", "--spec", spec, "--out", dir / "a.csv", "--workers", "1"}).code == 0);
    REQUIRE(run({"experiment", "--spec", spec, "--out", dir / "b.csv", "--workers", "3", "--paths-sample", "2"}).code == 0);
    const std::string a = io::read_text(dir / "a.csv");
    CHECK(a == io::read_text(dir / "b.csv"));
    CHECK(a.rfind("family,T,s,c,corr,stat,nu,level,n_reps,failed,reject_rate,mc_se,sup_q50,sup_q95\n", 0) == 0);
    CHECK(fs::exists(dir / "b.csv.paths.csv"));
}
