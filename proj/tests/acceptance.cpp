// One PASS/FAIL line per acceptance criterion. Tolerances and runtime budgets are pinned here.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "manufactured.hpp"
#include "mbwave/cli.hpp"
#include "mbwave/estimates.hpp"
#include "mbwave/gtc.hpp"
#include "mbwave/hum.hpp"
#include "mbwave/solver.hpp"
#include "mbwave/warped.hpp"

using namespace mbwave;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

bool run(int id, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && s < budget_s;
    std::printf("criterion %d: %s %s [%.1f s, budget %.0f s]\n", id, pass ? "PASS" : "FAIL", o.detail.c_str(), s,
                budget_s);
    std::fflush(stdout);
    return pass;
}

bool suite_pass(const std::vector<CheckResult>& rs, std::string& worst) {
    bool ok = !rs.empty();
    for (const auto& r : rs)
        if (!r.pass) {
            ok = false;
            worst += " " + r.name + "(n=" + std::to_string(r.n) + ")";
        }
    return ok;
}

Outcome optimal_times() {
    struct Case {
        double h1, h2, tm;
    };
    double worst = 0;
    for (Case c : {Case{0, 0.5, 1}, Case{-0.25, 0.25, 2}, Case{0, -0.5, -1}}) {
        OptimalTimes cf = optimal_times_lines(c.h1, c.h2, c.tm);
        GTC1D dom(Curve::linear(c.h1, 0), Curve::linear(c.h2, 0), c.tm, c.tm + 1.2 * cf.T_onesided + 0.1 * std::abs(c.tm));
        OptimalTimes o = optimal_times_1d(dom, c.tm);
        for (double d : {o.T_onesided - cf.T_onesided, o.T_minus - cf.T_minus, o.T_plus - cf.T_plus})
            worst = std::max(worst, std::abs(d));
    }
    return {worst <= 1e-10, fmt("max |bisection - closed form| = %.2e (tol 1e-10)", worst)};
}

Outcome identity_suite() {
    SuiteOptions o;  // 1000 points, n in {1,2,3}, eps in {0, 0.02, 0.05}, closed 1e-12, fd 1e-6
    auto rs = run_identity_suite(o);
    std::string bad;
    const bool ok = suite_pass(rs, bad);
    return {ok, std::to_string(rs.size()) + " checks" + (ok ? "" : ", failing:" + bad)};
}

Outcome carleman_suite() {
    CarlemanSuiteOptions o;  // a in {n^2, 4n^2}, identity 1e-6 with 4x decay, margin >= -1e-8
    auto rs = run_carleman_suite(o);
    std::string bad;
    const bool ok = suite_pass(rs, bad);
    double margin = INFINITY, resid = 0;
    for (const auto& r : rs) {
        if (r.kind == "margin") margin = std::min(margin, r.min_margin);
        else resid = std::max(resid, r.max_residual);
    }
    return {ok, std::to_string(rs.size()) + " checks, max identity residual " + fmt("%.2e", resid) +
                    ", min margin " + fmt("%.2e", margin) + (ok ? "" : ", failing:" + bad)};
}

Outcome solver_convergence() {
    testing::Manufactured m;
    const double e1 = m.error(100), e2 = m.error(200), e3 = m.error(400);
    const double r1 = e1 / e2, r2 = e2 / e3;
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0, 1), 0, 2);
    Scheme s(dom, {}, 0, 2, {400, 1200});
    Field f = solve_forward(s, sample_cauchy(s, [](double x) { return std::sin(M_PI * x); }, nullptr));
    const double e0 = energy(f, 0);
    double drift = 0;
    for (int n = 0; n <= f.nt; ++n) drift = std::max(drift, std::abs(energy(f, n) - e0) / e0);
    const bool ok = r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5 && drift <= 1e-4;
    return {ok, "MMS ratios " + fmt("%.3f", r1) + ", " + fmt("%.3f", r2) + " (in [3.5, 4.5]), eigenmode drift " +
                    fmt("%.2e", drift) + " (tol 1e-4)"};
}

Outcome multiplier() {
    std::string detail;
    bool ok = true;
    struct Case {
        const char* name;
        double slope, px;
    };
    for (Case c : {Case{"static", 0.0, 0.5}, Case{"moving", 0.3, 0.6}}) {
        GTC1D dom(Curve::linear(0, 0), Curve::linear(c.slope, 1), 0, 2);
        const double sl = c.slope;
        // comoving velocity keeps the corner compatible, otherwise the rate drops to 1
        auto res = multiplier_refinement(dom, 0, 2, SpacetimePoint(1.0, {c.px}),
                                         [](double x) { return std::sin(M_PI * x); },
                                         [sl](double x) { return -sl * M_PI * x * std::cos(M_PI * x); }, {100, 300}, 3);
        const double r1 = std::abs(res[0] / res[1]), r2 = std::abs(res[1] / res[2]);
        ok = ok && r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5 && std::abs(res[2]) <= 1e-3;
        detail += std::string(detail.empty() ? "" : "; ") + c.name + " ratios " + fmt("%.3f", r1) + ", " +
                  fmt("%.3f", r2) + ", residual at 400x1200 " + fmt("%.2e", res[2]);
    }
    return {ok, detail + " (ratios in [3.5, 4.5], tol 1e-3)"};
}

Outcome threshold() {
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0.5, 0), 1, 4);
    ScanOptions o;
    o.windows = {1.6, 2.4};
    o.optimal_T = 2.0;
    o.beam_grid = {800, 2400};
    auto rows = timespan_scan(dom, {}, 1.0, o);
    const double sep = rows[1].min_ratio / rows[0].beam_ratio;
    Scheme sb(dom, {}, 1.0, 2.6, o.beam_grid);
    BeamSpec half = default_beam(dom, 1.0, 2.6, 0.5);
    const double narrow = observability_ratio(solve_forward(sb, gaussian_beam(sb, half.xc, half.sigma, half.k, half.direction)), {});
    const double drop = rows[0].beam_ratio / narrow;
    return {sep >= 10 && drop >= 10, "min ratio at 2.4 " + fmt("%.3e", rows[1].min_ratio) + ", beam at 1.6 " +
                                         fmt("%.3e", rows[0].beam_ratio) + " (x" + fmt("%.1f", sep) +
                                         ", need 10), beam drop at sigma/2 x" + fmt("%.1f", drop) + " (need 10)"};
}

Outcome hum() {
    HUMProblem st{GTC1D(Curve::linear(0, 0), Curve::linear(0, 1), 0, 2.2), {}, 0, 2.2};
    st.gamma.right = {{0.0, 2.2}};
    st.phi0_minus = [](double x) { return std::sin(M_PI * x); };
    st.grid = {400, 1200};
    HUMOperator op(st);
    HUMSolution s1 = solve_null_control(op);
    const double sym = gram_symmetry(op, s1.rho, 2, 3);
    MinimalityReport mr = minimality_check(op, s1, 10, 11, 1e-6);

    HUMProblem mv{GTC1D(Curve::linear(0, 0), Curve::linear(0.5, 0), 1, 3.2), {}, 1, 3.2};
    mv.gamma.right = {{1.0, 3.2}};
    mv.phi0_minus = [](double x) { return std::sin(M_PI * x / 0.5); };  // first mode of [0, 0.5]
    mv.grid = {400, 1200};
    HUMSolution s2 = solve_null_control(mv);

    const bool ok = s1.final_energy_rel <= 1e-2 && s2.final_energy_rel <= 5e-2 && sym <= 1e-10 && mr.pass;
    return {ok, "static " + fmt("%.2e", s1.final_energy_rel) + " (tol 1e-2), moving " +
                    fmt("%.2e", s2.final_energy_rel) + " (tol 5e-2), symmetry " + fmt("%.2e", sym) +
                    " (tol 1e-10), minimality deficit " + fmt("%.2e", mr.worst_relative_deficit) + " (tol 1e-6)"};
}

std::vector<std::pair<std::string, std::string>> csvs(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".csv") {
            std::ifstream in(e.path(), std::ios::binary);
            std::ostringstream s;
            s << in.rdbuf();
            out.emplace_back(e.path().filename().string(), s.str());
        }
    std::sort(out.begin(), out.end());
    return out;
}

Outcome determinism() {
    // Every subcommand on its shipped config, shrunk to desk size, run twice.
    const fs::path src = fs::path(MBWAVE_SOURCE_DIR) / "configs";
    const fs::path work = fs::temp_directory_path() / "mbwave_acceptance_det";
    fs::remove_all(work);
    fs::create_directories(work);
    struct Case {
        const char* sub;
        const char* config;
    };
    const Case cases[] = {{"simulate", "simulate.json"},        {"region", "region.json"},
                          {"identity-check", "identity.json"},  {"carleman-check", "carleman.json"},
                          {"observability-scan", "scan.json"},  {"hum", "hum_static.json"},
                          {"optimal-times", "optimal_times.json"}};
    int files = 0;
    for (const Case& c : cases) {
        std::ifstream in(src / c.config);
        json j = json::parse(in);
        if (j.contains("identity")) j["identity"]["points"] = 50;
        if (j.contains("carleman")) j["carleman"]["points"] = 20, j["carleman"]["random_trig"] = 5;
        if (j.contains("scan")) j["scan"]["beam_nx"] = 100, j["scan"]["members"] = 4;
        if (j.contains("hum")) j["hum"]["minimality_count"] = 0;
        const fs::path cfg = work / c.config;
        std::ofstream(cfg) << j.dump(2);
        std::vector<std::vector<std::pair<std::string, std::string>>> runs;
        for (const char* tag : {"a", "b"}) {
            RunOptions opt;
            opt.out = (work / c.sub / tag).string();
            opt.grid = GridSpec{50, 150};
            std::ostringstream out, err;
            const int rc = dispatch(c.sub, cfg.string(), opt, out, err);
            if (rc == 2) return {false, std::string(c.sub) + " rejected its config: " + err.str()};
            runs.push_back(csvs(*opt.out));
        }
        if (runs[0] != runs[1]) return {false, std::string(c.sub) + " CSVs differ between runs"};
        files += static_cast<int>(runs[0].size());
    }
    return {files > 0, std::to_string(files) + " CSVs across 7 subcommands byte-identical"};
}

}  // namespace

int main() {
    bool ok = true;
    ok &= run(1, 1, optimal_times);
    ok &= run(2, 30, identity_suite);
    ok &= run(3, 60, carleman_suite);
    ok &= run(4, 30, solver_convergence);
    ok &= run(5, 30, multiplier);
    ok &= run(6, 300, threshold);
    ok &= run(7, 300, hum);
    ok &= run(8, 120, determinism);
    std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
    return ok ? 0 : 1;
}
