#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return LESPECTRA_CLI_PATH; }

int run_cli(const std::string& args, const fs::path& stderr_file = {}) {
    std::string cmd = std::string(cli_path()) + " " + args;
    if (!stderr_file.empty()) cmd += " 2>" + stderr_file.string();
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::path("cli_tmp") / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const json& cfg) {
    fs::path p = dir / "config.json";
    std::ofstream os(p);
    os << cfg.dump(2);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json eigen_config() {
    return json{{"task", "eigen"},
                {"grid", {{"extents", {{0.0, 1.0}}}, {"n", {99}}}},
                {"operators", {{"f1", {{"kind", "laplacian"}}}}}};
}

}  // namespace

TEST_CASE("eigen task produces a converged result") {
    fs::path dir = fresh_dir("eigen");
    fs::path cfg = write_config(dir, eigen_config());
    int rc = run_cli("eigen --config " + cfg.string() + " --out " + (dir / "out").string());
    CHECK(rc == 0);

    json r = json::parse(slurp(dir / "out" / "result.json"));
    CHECK(r.at("task") == "eigen");
    CHECK(r.at("converged") == true);
    double h = 1.0 / 100.0;
    double expected = (2.0 - 2.0 * std::cos(M_PI * h)) / (h * h);
    CHECK(std::abs(r.at("lambda1").get<double>() - expected) <= 1e-6);

    // The eigenfunction lands next to it.
    std::string field = slurp(dir / "out" / "field_u.csv");
    CHECK(field.rfind("x,u", 0) == 0);
}

TEST_CASE("verify-fucik reports exact square-root ratios at q = 1") {
    fs::path dir = fresh_dir("fucik");
    json cfg = {{"task", "verify-fucik"},
                {"grid", {{"extents", {{0.0, 1.0}}}, {"n", {99}}}},
                {"exponents", {{"p", 1.0}, {"q", 1.0}}},
                {"parameters", {{"kappa", 4.0}}}};
    fs::path cfgp = write_config(dir, cfg);
    int rc = run_cli("verify-fucik --config " + cfgp.string() + " --out " +
                     (dir / "out").string());
    CHECK(rc == 0);
    json r = json::parse(slurp(dir / "out" / "result.json"));
    CHECK(std::abs(r.at("ratio_plus").get<double>() - 2.0) <= 1e-8);
    CHECK(std::abs(r.at("ratio_minus").get<double>() - 2.0) <= 1e-8);
    CHECK(r.at("predicted_plus").get<double>() == 2.0);
    CHECK(r.at("ordering") == "coincide");
}

TEST_CASE("missing operator block is a config error") {
    fs::path dir = fresh_dir("missing_op");
    json cfg = {{"task", "eigen"}, {"grid", {{"extents", {{0.0, 1.0}}}, {"n", {9}}}}};
    fs::path cfgp = write_config(dir, cfg);
    fs::path err = dir / "stderr.txt";
    int rc = run_cli("eigen --config " + cfgp.string() + " --out " +
                         (dir / "out").string(),
                     err);
    CHECK(rc == 1);
    CHECK(slurp(err).find("operators") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected") {
    fs::path dir = fresh_dir("unknown_key");
    json cfg = eigen_config();
    cfg["operatorz"] = json::object();
    fs::path cfgp = write_config(dir, cfg);
    fs::path err = dir / "stderr.txt";
    int rc = run_cli("eigen --config " + cfgp.string() + " --out " +
                         (dir / "out").string(),
                     err);
    CHECK(rc == 1);
    CHECK(slurp(err).find("operatorz") != std::string::npos);

    json cfg2 = eigen_config();
    cfg2["operators"]["f1"]["alpa"] = 1.0;
    fs::path cfgp2 = write_config(dir, cfg2);
    CHECK(run_cli("eigen --config " + cfgp2.string() + " --out " +
                  (dir / "out").string(), err) == 1);
}

TEST_CASE("config task must match the requested task") {
    fs::path dir = fresh_dir("mismatch");
    fs::path cfgp = write_config(dir, eigen_config());
    fs::path err = dir / "stderr.txt";
    int rc = run_cli("curve --config " + cfgp.string() + " --out " +
                         (dir / "out").string(),
                     err);
    CHECK(rc == 1);
    CHECK(slurp(err).find("does not match") != std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical results") {
    fs::path dir = fresh_dir("determinism");
    json cfg = {{"task", "mp-check"},
                {"grid", {{"extents", {{0.0, 1.0}}}, {"n", {49}}}},
                {"operators",
                 {{"f1", {{"kind", "laplacian"}}}, {"f2", {{"kind", "laplacian"}}}}},
                {"parameters",
                 {{"lambda_min", 4.0},
                  {"lambda_max", 14.0},
                  {"mu_min", 4.0},
                  {"mu_max", 14.0},
                  {"samples", 3}}}};
    fs::path cfgp = write_config(dir, cfg);
    for (const char* out : {"out_a", "out_b"}) {
        int rc = run_cli("mp-check --config " + cfgp.string() + " --seed 42 --out " +
                         (dir / out).string());
        REQUIRE(rc == 0);
    }
    CHECK(slurp(dir / "out_a" / "result.json") == slurp(dir / "out_b" / "result.json"));
    CHECK(slurp(dir / "out_a" / "scan.csv") == slurp(dir / "out_b" / "scan.csv"));
    CHECK(!slurp(dir / "out_a" / "result.json").empty());
}

TEST_CASE("unreachable tolerance reports non-convergence with artifacts") {
    fs::path dir = fresh_dir("nonconv");
    json cfg = eigen_config();
    cfg["grid"]["n"] = {19};
    cfg["tolerances"] = {{"eigen_residual", 1e-18}};
    fs::path cfgp = write_config(dir, cfg);
    int rc = run_cli("eigen --config " + cfgp.string() + " --out " +
                     (dir / "out").string());
    CHECK(rc == 2);
    json r = json::parse(slurp(dir / "out" / "result.json"));
    CHECK(r.at("converged") == false);
}
