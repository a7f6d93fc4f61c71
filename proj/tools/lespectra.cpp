// lespectra command-line front end: config-driven eigenvalue runs, curve
// sampling, Dirichlet solves, and principle scans with CSV/JSON artifacts.
//
//   lespectra <task> --config <file> [--out <dir>] [--seed <u64>]
//
// Exit codes: 0 converged success, 2 solver non-convergence (artifacts still
// written), 1 config or I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lespectra/lespectra.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lespectra;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object block");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
}

const json& need(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) fail(where, "missing required block '" + key + "'");
    return j.at(key);
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

double num_or(const json& j, const std::string& key, double dflt,
              const std::string& where) {
    return j.contains(key) ? num(j.at(key), where + "." + key) : dflt;
}

int axis_of(const json& j, const std::string& where) {
    int a = j.contains("axis") ? j.at("axis").get<int>() : 0;
    if (a != 0 && a != 1) fail(where, "axis must be 0 or 1");
    return a;
}

Profile parse_profile(const json& j, const std::string& where) {
    if (j.is_number()) return Profile::constant(j.get<double>());
    if (!j.is_object()) fail(where, "profile must be a number or an object");
    std::string kind = need(j, "kind", where).get<std::string>();
    if (kind == "zero") {
        expect_keys(j, {"kind"}, where);
        return Profile::zero();
    }
    if (kind == "constant") {
        expect_keys(j, {"kind", "value"}, where);
        return Profile::constant(num(need(j, "value", where), where + ".value"));
    }
    if (kind == "poly") {
        expect_keys(j, {"kind", "coeffs", "axis"}, where);
        std::vector<double> c = need(j, "coeffs", where).get<std::vector<double>>();
        return Profile::poly(std::move(c), axis_of(j, where));
    }
    if (kind == "sine" || kind == "cosine") {
        expect_keys(j, {"kind", "amplitude", "frequency", "axis"}, where);
        double a = num_or(j, "amplitude", 1.0, where);
        double f = num(need(j, "frequency", where), where + ".frequency");
        int ax = axis_of(j, where);
        return kind == "sine" ? Profile::sine(a, f, ax) : Profile::cosine(a, f, ax);
    }
    if (kind == "inv_dist") {
        expect_keys(j, {"kind", "scale", "eps", "cap", "origin", "axis"}, where);
        return Profile::inv_dist(num_or(j, "scale", 1.0, where),
                                 num(need(j, "eps", where), where + ".eps"),
                                 num_or(j, "cap", 1e6, where),
                                 num_or(j, "origin", 0.0, where), axis_of(j, where));
    }
    fail(where, "unknown profile kind '" + kind + "'");
}

LinearOpSpec parse_member(const json& j, const std::string& where) {
    expect_keys(j, {"diffusion", "scale", "drift_x", "drift_y", "zero_order"}, where);
    LinearOpSpec m;
    if (j.contains("diffusion")) {
        const json& d = j.at("diffusion");
        if (d.is_number()) {
            double s = d.get<double>();
            m.diffusion = {s, 0.0, s};
        } else if (d.is_array() && d.size() == 3) {
            m.diffusion = {d[0].get<double>(), d[1].get<double>(), d[2].get<double>()};
        } else {
            fail(where + ".diffusion", "expected a scalar or [axx, axy, ayy]");
        }
    }
    if (j.contains("scale"))
        m.diffusion_scale = parse_profile(j.at("scale"), where + ".scale");
    if (j.contains("drift_x"))
        m.drift_x = parse_profile(j.at("drift_x"), where + ".drift_x");
    if (j.contains("drift_y"))
        m.drift_y = parse_profile(j.at("drift_y"), where + ".drift_y");
    if (j.contains("zero_order"))
        m.zero_order = parse_profile(j.at("zero_order"), where + ".zero_order");
    return m;
}

OperatorSpec parse_operator(const json& j, const std::string& where) {
    expect_keys(j,
                {"kind", "member", "members", "alpha", "beta", "rows", "cols",
                 "gradient", "zero_abs", "zero_linear"},
                where);
    std::string kind = need(j, "kind", where).get<std::string>();
    OperatorSpec s;
    auto members_of = [&]() {
        const json& ms = need(j, "members", where);
        if (!ms.is_array() || ms.empty()) fail(where + ".members", "expected a nonempty array");
        std::vector<LinearOpSpec> out;
        for (std::size_t k = 0; k < ms.size(); ++k)
            out.push_back(parse_member(ms[k], where + ".members[" + std::to_string(k) + "]"));
        return out;
    };
    if (kind == "laplacian") {
        s = OperatorSpec::laplacian();
    } else if (kind == "linear") {
        s = OperatorSpec::linear(parse_member(need(j, "member", where), where + ".member"));
    } else if (kind == "pucci_plus" || kind == "pucci_minus") {
        EllipticityPair e(num(need(j, "alpha", where), where + ".alpha"),
                          num(need(j, "beta", where), where + ".beta"));
        s = kind == "pucci_plus" ? OperatorSpec::pucci_plus(e) : OperatorSpec::pucci_minus(e);
    } else if (kind == "max_of") {
        s = OperatorSpec::max_of(members_of());
    } else if (kind == "min_of") {
        s = OperatorSpec::min_of(members_of());
    } else if (kind == "inf_sup" || kind == "sup_inf") {
        auto rows = need(j, "rows", where).get<std::size_t>();
        auto cols = need(j, "cols", where).get<std::size_t>();
        s = kind == "inf_sup" ? OperatorSpec::inf_sup(members_of(), rows, cols)
                              : OperatorSpec::sup_inf(members_of(), rows, cols);
    } else {
        fail(where, "unknown operator kind '" + kind + "'");
    }
    if (j.contains("gradient")) {
        const json& gr = j.at("gradient");
        expect_keys(gr, {"magnitude", "sign"}, where + ".gradient");
        s.gradient_magnitude =
            parse_profile(need(gr, "magnitude", where), where + ".gradient.magnitude");
        s.gradient_sign = gr.contains("sign") ? gr.at("sign").get<int>() : +1;
        if (s.gradient_sign != 1 && s.gradient_sign != -1)
            fail(where + ".gradient.sign", "must be +1 or -1");
    }
    if (j.contains("zero_abs")) {
        const json& za = j.at("zero_abs");
        expect_keys(za, {"magnitude", "sign"}, where + ".zero_abs");
        s.zero_abs = parse_profile(need(za, "magnitude", where), where + ".zero_abs.magnitude");
        s.zero_abs_sign = za.contains("sign") ? za.at("sign").get<int>() : +1;
        if (s.zero_abs_sign != 1 && s.zero_abs_sign != -1)
            fail(where + ".zero_abs.sign", "must be +1 or -1");
    }
    if (j.contains("zero_linear"))
        s.zero_linear = parse_profile(j.at("zero_linear"), where + ".zero_linear");
    return s;
}

Grid parse_grid(const json& j, const std::string& where) {
    expect_keys(j, {"extents", "n"}, where);
    const json& ex = need(j, "extents", where);
    const json& nn = need(j, "n", where);
    if (!ex.is_array() || !nn.is_array() || ex.size() != nn.size() || ex.empty() ||
        ex.size() > 2)
        fail(where, "extents and n must be matching arrays of 1 or 2 axes");
    std::vector<std::array<double, 2>> extents;
    std::vector<int> n;
    for (std::size_t a = 0; a < ex.size(); ++a) {
        if (!ex[a].is_array() || ex[a].size() != 2)
            fail(where + ".extents", "each axis needs [lo, hi]");
        extents.push_back({ex[a][0].get<double>(), ex[a][1].get<double>()});
        n.push_back(nn[a].get<int>());
    }
    return make_uniform_grid(extents, n);
}

struct Run {
    std::string task;
    json cfg;
    fs::path out;
    std::uint64_t seed = 0;
    Grid grid;

    const json& params() const {
        static const json empty = json::object();
        return cfg.contains("parameters") ? cfg.at("parameters") : empty;
    }

    OperatorSpec op(const std::string& name) const {
        return parse_operator(need(need(cfg, "operators", "config"), name, "operators"),
                              "operators." + name);
    }
    bool has_op(const std::string& name) const {
        return cfg.contains("operators") && cfg.at("operators").contains(name);
    }
    Field weight(const std::string& name) const {
        if (cfg.contains("weights") && cfg.at("weights").contains(name))
            return parse_profile(cfg.at("weights").at(name), "weights." + name).sample(grid);
        return Field(grid, 1.0);  // default unit weight
    }
    Field data(const std::string& name) const {
        Field f(grid);
        if (cfg.contains("data") && cfg.at("data").contains(name))
            f = parse_profile(cfg.at("data").at(name), "data." + name).sample(grid);
        grid.for_boundary([&](NodeIndex nd) { f.at(nd) = 0.0; });
        return f;
    }
    ExponentPair exponents() const {
        if (!cfg.contains("exponents")) return ExponentPair(1.0, 1.0);
        const json& e = cfg.at("exponents");
        expect_keys(e, {"p", "q"}, "exponents");
        return ExponentPair(num(need(e, "p", "exponents"), "exponents.p"),
                            num(need(e, "q", "exponents"), "exponents.q"));
    }
    int sign() const {
        std::string s = params().contains("sign") ? params().at("sign").get<std::string>() : "+";
        if (s != "+" && s != "-") fail("parameters.sign", "must be \"+\" or \"-\"");
        return s == "+" ? +1 : -1;
    }
    double tol(const std::string& key, double dflt) const {
        if (!cfg.contains("tolerances")) return dflt;
        return num_or(cfg.at("tolerances"), key, dflt, "tolerances");
    }
};

JsonValue report_common(const Run& run) {
    JsonValue j = JsonValue::object();
    j.set("task", run.task);
    j.set("seed", JsonValue(static_cast<double>(run.seed)));
    return j;
}

std::vector<double> lambda_samples(const json& p, const std::string& where) {
    if (p.contains("lambdas")) return p.at("lambdas").get<std::vector<double>>();
    double lo = num(need(p, "lambda_min", where), where + ".lambda_min");
    double hi = num(need(p, "lambda_max", where), where + ".lambda_max");
    int n = p.contains("samples") ? p.at("samples").get<int>() : 16;
    if (!(lo < hi) || n < 2) fail(where, "need lambda_min < lambda_max and samples >= 2");
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(lo + (hi - lo) * k / (n - 1));
    return out;
}

EigenOptions eigen_opts(const Run& run) {
    EigenOptions o;
    o.residual_tol = run.tol("eigen_residual", 1e-8);
    return o;
}

int task_eigen(Run& run) {
    EigenPair pr;
    ExponentPair exps = run.exponents();
    bool system = run.has_op("f2");
    if (system) {
        pr = system_principal_eigen(run.op("f1"), run.op("f2"), run.weight("tau1"),
                                    run.weight("tau2"), exps, run.sign(), eigen_opts(run));
        write_field_csv((run.out / "field_v.csv").string(), *pr.v, "v");
    } else {
        pr = scalar_principal_eigen(run.op("f1"), run.weight("tau1"), run.sign(),
                                    eigen_opts(run));
    }
    write_field_csv((run.out / "field_u.csv").string(), pr.u, "u");
    JsonValue j = report_common(run);
    j.set("lambda1", pr.lambda1);
    j.set("sign", pr.sign > 0 ? "+" : "-");
    j.set("residual", pr.residual);
    j.set("iterations", pr.iterations);
    j.set("lambda_raw",
          JsonValue::array().push(pr.lambda_raw[0]).push(pr.lambda_raw[1]));
    bool ok = pr.residual <= eigen_opts(run).residual_tol;
    j.set("converged", ok);
    write_json((run.out / "result.json").string(), j);
    return ok ? 0 : 2;
}

int task_curve(Run& run) {
    ExponentPair exps = run.exponents();
    EigenOptions eo = eigen_opts(run);
    EigenPair plus = system_principal_eigen(run.op("f1"), run.op("f2"), run.weight("tau1"),
                                            run.weight("tau2"), exps, +1, eo);
    EigenPair minus = system_principal_eigen(run.op("f1"), run.op("f2"), run.weight("tau1"),
                                             run.weight("tau2"), exps, -1, eo);
    const json& p = run.params();
    double lo = num_or(p, "lambda_min", plus.lambda1 / 4, "parameters");
    double hi = num_or(p, "lambda_max", minus.lambda1 * 4, "parameters");
    int n = p.contains("samples") ? p.at("samples").get<int>() : 64;
    std::vector<std::vector<double>> rows;
    std::ofstream os((run.out / "curve.csv").string());
    if (!os) fail("output", "cannot open curve.csv");
    os << "lambda,mu,label\n";
    for (const SpectralCurve& c : {SpectralCurve(plus.lambda1, exps.p, CurveLabel::Plus),
                                   SpectralCurve(minus.lambda1, exps.p, CurveLabel::Minus)})
        for (const CurveSample& s : sample_curve(c, lo, hi, n))
            os << fmt_double(s.lambda) << ',' << fmt_double(s.mu) << ','
               << to_string(s.label) << "\n";
    JsonValue j = report_common(run);
    j.set("lambda1_plus", plus.lambda1);
    j.set("lambda1_minus", minus.lambda1);
    j.set("residual_plus", plus.residual);
    j.set("residual_minus", minus.residual);
    bool ok = std::max(plus.residual, minus.residual) <= eo.residual_tol;
    j.set("converged", ok);
    write_json((run.out / "result.json").string(), j);
    return ok ? 0 : 2;
}

int task_solve(Run& run) {
    const json& p = run.params();
    SystemProblem prob{run.op("f1"),
                       run.op("f2"),
                       run.weight("tau1"),
                       run.weight("tau2"),
                       run.exponents(),
                       num(need(p, "lambda", "parameters"), "parameters.lambda"),
                       num(need(p, "mu", "parameters"), "parameters.mu"),
                       run.data("f1"),
                       run.data("f2")};
    SystemSolveOptions so;
    so.tol = run.tol("residual", 1e-8);
    std::string method =
        p.contains("method") ? p.at("method").get<std::string>() : "auto";
    SystemSolution sol;
    if (method == "sublinear" || (method == "auto" && prob.exps.sublinear() &&
                                  interior_max(prob.f1) <= 0 && interior_max(prob.f2) <= 0))
        sol = solve_sublinear(prob, so);
    else if (method == "monotone")
        sol = solve_system_monotone_signed(prob, so);
    else
        sol = solve_system_picard(prob, so);
    write_field_csv((run.out / "field_u.csv").string(), sol.u, "u");
    write_field_csv((run.out / "field_v.csv").string(), sol.v, "v");
    JsonValue j = report_common(run);
    j.set("lambda", prob.lambda);
    j.set("mu", prob.mu);
    j.set("method", sol.report.method);
    j.set("iterations", sol.report.iterations);
    j.set("residual", sol.report.residual);
    j.set("converged", sol.report.converged);
    j.set("max_u", interior_max(sol.u));
    j.set("max_v", interior_max(sol.v));
    write_json((run.out / "result.json").string(), j);
    return sol.report.converged ? 0 : 2;
}

int task_mp_check(Run& run) {
    ExponentPair exps = run.exponents();
    OperatorSpec f1 = run.op("f1"), f2 = run.op("f2");
    Field tau1 = run.weight("tau1"), tau2 = run.weight("tau2");
    EigenPair plus = system_principal_eigen(f1, f2, tau1, tau2, exps, +1, eigen_opts(run));
    const json& p = run.params();
    double llo = num(need(p, "lambda_min", "parameters"), "parameters.lambda_min");
    double lhi = num(need(p, "lambda_max", "parameters"), "parameters.lambda_max");
    double mlo = num(need(p, "mu_min", "parameters"), "parameters.mu_min");
    double mhi = num(need(p, "mu_max", "parameters"), "parameters.mu_max");
    int n = p.contains("samples") ? p.at("samples").get<int>() : 5;
    std::vector<std::pair<double, double>> pts;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            pts.emplace_back(llo + (lhi - llo) * a / (n - 1),
                             mlo + (mhi - mlo) * b / (n - 1));
    MpGridResult res = mp_grid_experiment(f1, f2, tau1, tau2, exps, pts, plus, 3, run.seed);
    std::vector<std::vector<double>> rows;
    for (const ScanRow& r : res.rows) {
        double a = anchor_recovery(r.lambda, r.value, exps.p);
        rows.push_back({r.lambda, r.value, r.flag ? 1.0 : 0.0,
                        a < plus.lambda1 ? 1.0 : 0.0});
    }
    write_table_csv((run.out / "scan.csv").string(),
                    {"lambda", "mu", "mp_empirical", "mp_predicted"}, rows);
    JsonValue j = report_common(run);
    j.set("anchor_plus", plus.lambda1);
    j.set("agreements", res.agreements);
    j.set("total", res.total);
    j.set("converged", true);
    write_json((run.out / "result.json").string(), j);
    return 0;
}

int task_amp_scan(Run& run) {
    ExponentPair exps = run.exponents();
    OperatorSpec f1 = run.op("f1"), f2 = run.op("f2");
    Field tau1 = run.weight("tau1"), tau2 = run.weight("tau2");
    EigenOptions eo = eigen_opts(run);
    EigenPair plus = system_principal_eigen(f1, f2, tau1, tau2, exps, +1, eo);
    EigenPair minus = system_principal_eigen(f1, f2, tau1, tau2, exps, -1, eo);
    Field df1 = run.data("f1"), df2 = run.data("f2");
    if (sup_norm(df1) == 0 && sup_norm(df2) == 0) {
        df1 = Field(run.grid, -1.0);
        df2 = Field(run.grid, -1.0);
        run.grid.for_boundary([&](NodeIndex nd) { df1.at(nd) = df2.at(nd) = 0.0; });
    }
    PrincipleReport rep =
        amp_scan(f1, f2, tau1, tau2, exps, df1, df2,
                 lambda_samples(run.params(), "parameters"), plus, minus);
    std::vector<std::vector<double>> rows;
    for (const ScanRow& r : rep.table)
        rows.push_back({r.lambda, r.value, r.flag ? 1.0 : 0.0, r.converged ? 1.0 : 0.0});
    write_table_csv((run.out / "scan.csv").string(),
                    {"lambda", "max_interior", "strictly_negative", "converged"}, rows);
    JsonValue j = report_common(run);
    j.set("anchor_minus", minus.lambda1);
    j.set("delta", rep.threshold);
    j.set("verdict", rep.verdict);
    j.set("notes", rep.notes);
    j.set("converged", true);
    write_json((run.out / "result.json").string(), j);
    return 0;
}

Profile weight_profile(const Run& run, const std::string& name) {
    if (run.cfg.contains("weights") && run.cfg.at("weights").contains(name))
        return parse_profile(run.cfg.at("weights").at(name), "weights." + name);
    return Profile::constant(1.0);
}

int task_small_domain(Run& run) {
    const json& p = run.params();
    Profile t1 = weight_profile(run, "tau1"), t2 = weight_profile(run, "tau2");
    SmallDomainOptions so;
    so.seed = run.seed ? run.seed : so.seed;
    PrincipleReport rep = small_domain_threshold(
        run.op("f1"), run.op("f2"), t1, t2, run.exponents(),
        num(need(p, "lambda", "parameters"), "parameters.lambda"),
        num(need(p, "mu", "parameters"), "parameters.mu"),
        num_or(p, "l_lo", 0.1, "parameters"), num_or(p, "l_hi", 2.0, "parameters"), so);
    JsonValue j = report_common(run);
    j.set("threshold_length", rep.threshold);
    j.set("threshold_weight_multiplier", rep.threshold2);
    j.set("notes", rep.notes);
    j.set("converged", true);
    write_json((run.out / "result.json").string(), j);
    return 0;
}

int task_isolation(Run& run) {
    IsolationOptions io;
    io.seed = run.seed ? run.seed : io.seed;
    PrincipleReport rep = isolation_scan(run.op("f1"), run.op("f2"), run.weight("tau1"),
                                         run.weight("tau2"), run.exponents(),
                                         lambda_samples(run.params(), "parameters"), io);
    std::vector<std::vector<double>> rows;
    for (const ScanRow& r : rep.table) rows.push_back({r.lambda, r.value});
    write_table_csv((run.out / "scan.csv").string(), {"lambda", "best_residual"}, rows);
    JsonValue j = report_common(run);
    j.set("converged", true);
    write_json((run.out / "result.json").string(), j);
    return 0;
}

struct FucikReport {
    double sigma, lambda_plus, lambda_minus;
    double ratio_plus, ratio_minus, predicted_plus, predicted_minus;
    bool plus_below_minus;
};

FucikReport verify_fucik(double kappa, const ExponentPair& exps, const Grid& g,
                         const EigenOptions& eo) {
    if (!(kappa > 1)) throw std::invalid_argument("verify_fucik: kappa must exceed 1");
    if (!exps.pq_equal_1()) throw std::invalid_argument("verify_fucik: needs pq = 1");
    Field one(g, 1.0);
    OperatorSpec L = OperatorSpec::laplacian();
    OperatorSpec kL = OperatorSpec::linear(LinearOpSpec::scaled_laplacian(kappa));
    OperatorSpec F1 = OperatorSpec::max_of({L.members[0], kL.members[0]});
    OperatorSpec F2 = OperatorSpec::min_of({L.members[0], kL.members[0]});
    FucikReport r{};
    r.sigma = system_principal_eigen(L, L, one, one, exps, +1, eo).lambda1;
    r.lambda_plus = system_principal_eigen(F1, F2, one, one, exps, +1, eo).lambda1;
    r.lambda_minus = system_principal_eigen(F1, F2, one, one, exps, -1, eo).lambda1;
    r.ratio_plus = r.lambda_plus / r.sigma;
    r.ratio_minus = r.lambda_minus / r.sigma;
    r.predicted_plus = std::pow(kappa, exps.q / (exps.q + 1.0));
    r.predicted_minus = std::pow(kappa, 1.0 / (exps.q + 1.0));
    r.plus_below_minus = r.lambda_plus < r.lambda_minus * (1 - 1e-9);
    return r;
}

int task_verify_fucik(Run& run) {
    const json& p = run.params();
    double kappa = num(need(p, "kappa", "parameters"), "parameters.kappa");
    FucikReport r = verify_fucik(kappa, run.exponents(), run.grid, eigen_opts(run));
    JsonValue j = report_common(run);
    j.set("kappa", kappa);
    j.set("sigma", r.sigma);
    j.set("lambda1_plus", r.lambda_plus);
    j.set("lambda1_minus", r.lambda_minus);
    j.set("ratio_plus", r.ratio_plus);
    j.set("ratio_minus", r.ratio_minus);
    j.set("predicted_plus", r.predicted_plus);
    j.set("predicted_minus", r.predicted_minus);
    j.set("ordering",
          r.plus_below_minus ? "plus_below_minus"
                             : (run.exponents().q == 1.0 ? "coincide" : "minus_below_plus"));
    j.set("converged", true);
    write_json((run.out / "result.json").string(), j);
    return 0;
}

int task_verify_scalar(Run& run) {
    OperatorSpec f1 = run.op("f1");
    Field theta = run.weight("tau1");
    EigenOptions eo = eigen_opts(run);
    EigenPair plus = scalar_principal_eigen(f1, theta, +1, eo);
    EigenPair minus = scalar_principal_eigen(f1, theta, -1, eo);
    write_field_csv((run.out / "field_u.csv").string(), plus.u, "u_plus");
    JsonValue j = report_common(run);
    j.set("lambda1_plus", plus.lambda1);
    j.set("lambda1_minus", minus.lambda1);
    j.set("residual_plus", plus.residual);
    j.set("residual_minus", minus.residual);
    bool ok = std::max(plus.residual, minus.residual) <= eo.residual_tol;
    j.set("converged", ok);
    write_json((run.out / "result.json").string(), j);
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"principal half-eigenvalues and Dirichlet solvers for coupled "
                 "fully nonlinear elliptic systems"};
    std::string task, config, out = "results";
    std::uint64_t seed = 0;
    app.add_option("task", task,
                   "one of: eigen curve solve mp-check amp-scan small-domain "
                   "isolation verify-fucik verify-scalar")
        ->required();
    app.add_option("--config", config, "run configuration file (JSON)")->required();
    app.add_option("--out", out, "output directory (overrides config)");
    app.add_option("--seed", seed, "RNG seed for randomized experiments");
    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream is(config);
        if (!is) {
            std::cerr << config << ": cannot open config file\n";
            return 1;
        }
        json cfg;
        try {
            cfg = json::parse(is);
        } catch (const json::parse_error& e) {
            std::cerr << config << ": " << e.what() << "\n";
            return 1;
        }
        expect_keys(cfg,
                    {"task", "grid", "operators", "weights", "exponents", "parameters",
                     "data", "tolerances", "output"},
                    "config");
        if (cfg.contains("task") && cfg.at("task").get<std::string>() != task) {
            std::cerr << config << ": config task '" << cfg.at("task").get<std::string>()
                      << "' does not match requested task '" << task << "'\n";
            return 1;
        }
        Run run;
        run.task = task;
        run.cfg = cfg;
        run.seed = seed;
        run.grid = parse_grid(need(cfg, "grid", "config"), "grid");
        fs::path outdir = out;
        if (out == "results" && cfg.contains("output"))
            outdir = cfg.at("output").get<std::string>();
        fs::create_directories(outdir);
        run.out = outdir;

        if (task == "eigen") return task_eigen(run);
        if (task == "curve") return task_curve(run);
        if (task == "solve") return task_solve(run);
        if (task == "mp-check") return task_mp_check(run);
        if (task == "amp-scan") return task_amp_scan(run);
        if (task == "small-domain") return task_small_domain(run);
        if (task == "isolation") return task_isolation(run);
        if (task == "verify-fucik") return task_verify_fucik(run);
        if (task == "verify-scalar") return task_verify_scalar(run);
        std::cerr << "unknown task '" << task << "'\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << config << ": " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << config << ": " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << config << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 2;
    }
}
