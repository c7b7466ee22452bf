#include "mbwave/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mbwave/config.hpp"
#include "mbwave/estimates.hpp"
#include "mbwave/gtc.hpp"
#include "mbwave/hum.hpp"
#include "mbwave/io.hpp"
#include "mbwave/warped.hpp"

namespace mbwave {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

// Thrown for precondition failures that the config could not catch statically.
struct Precondition : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Context {
    const ExperimentConfig& cfg;
    fs::path dir;
    std::ostream& out;
    json summary = json::object();
};

void put_csv(const Context& c, const std::string& name, const std::string& text) {
    write_file((c.dir / name).string(), text);
}

std::string csv_bool(bool b) { return b ? "1" : "0"; }

SpacetimePoint require_center_1d(const ExperimentConfig& cfg, const char* sub) {
    if (!cfg.center) throw Precondition(std::string(sub) + " needs center");
    if (cfg.center->dim() != 1) throw Precondition("center.x: " + std::string(sub) + " is 1+1 dimensional");
    return *cfg.center;
}

std::string checks_csv(const std::vector<CheckResult>& rs) {
    std::string s = "name,n,eps,kind,max_residual,min_ratio,max_ratio,min_margin,points,pass\n";
    for (const auto& r : rs)
        s += r.name + "," + std::to_string(r.n) + "," + fmt17(r.eps) + "," + r.kind + "," + fmt17(r.max_residual) +
             "," + fmt17(r.min_ratio) + "," + fmt17(r.max_ratio) + "," + fmt17(r.min_margin) + "," +
             std::to_string(r.points) + "," + csv_bool(r.pass) + "\n";
    return s;
}

json checks_json(const std::vector<CheckResult>& rs) {
    json a = json::array();
    for (const auto& r : rs)
        a.push_back({{"name", r.name}, {"n", r.n}, {"eps", r.eps}, {"kind", r.kind}, {"max_residual", r.max_residual},
                     {"min_ratio", r.min_ratio}, {"max_ratio", r.max_ratio}, {"min_margin", r.min_margin},
                     {"points", r.points}, {"pass", r.pass}});
    return a;
}

bool all_pass(const std::vector<CheckResult>& rs) {
    for (const auto& r : rs)
        if (!r.pass) return false;
    return true;
}

bool run_region(Context& c) {
    const auto& cfg = c.cfg;
    SpacetimePoint P = require_center_1d(cfg, "region");
    RegionScan scan = region_scan(cfg.domain(), P, cfg.delta, cfg.ta, cfg.tb, cfg.region.samples_per_side);
    std::string s = region_csv_header() + "\n";
    std::size_t plus = 0, pdelta = 0, dagger = 0;
    for (const auto& r : scan.samples) {
        s += fmt17(r.tau) + "," + fmt17(r.point.t) + "," + fmt17(r.point.x[0]) + "," + fmt17(r.fP) + "," +
             fmt17(r.NfP) + "," + fmt17(r.NrP) + "," + fmt17(r.S) + "," + fmt17(r.costheta) + "," +
             csv_bool(r.in_gamma_plus) + "," + csv_bool(r.in_gamma_Pdelta) + "," + csv_bool(r.in_gamma_dagger) + "\n";
        plus += r.in_gamma_plus;
        pdelta += r.in_gamma_Pdelta;
        dagger += r.in_gamma_dagger;
    }
    put_csv(c, "region.csv", s);
    c.summary = {{"Rplus", scan.Rplus},
                 {"samples", scan.samples.size()},
                 {"in_gamma_plus", plus},
                 {"in_gamma_Pdelta", pdelta},
                 {"in_gamma_dagger", dagger}};
    c.out << "region: " << scan.samples.size() << " samples, R+ = " << fmt17(scan.Rplus) << ", " << pdelta
          << " in Gamma_{P,delta}\n";
    return true;
}

bool run_identity(Context& c) {
    SuiteOptions o;
    o.dims = c.cfg.identity.dims;
    o.eps_values = c.cfg.identity.eps_values;
    o.points = c.cfg.identity.points;
    o.R = c.cfg.identity.R;
    o.seed = c.cfg.seed;
    auto rs = run_identity_suite(o);
    put_csv(c, "identity.csv", checks_csv(rs));
    const bool pass = all_pass(rs);
    c.summary = {{"checks", checks_json(rs)}, {"closed_tol", o.closed_tol}, {"fd_tol", o.fd_tol}, {"pass", pass}};
    for (const auto& r : rs)
        if (!r.pass) c.out << "FAIL " << r.name << " n=" << r.n << " eps=" << r.eps << " residual=" << fmt17(r.max_residual) << "\n";
    c.out << "identity-check: " << rs.size() << " checks, " << (pass ? "all pass" : "failures") << "\n";
    return pass;
}

bool run_carleman(Context& c) {
    CarlemanSuiteOptions o;
    o.dims = c.cfg.carleman.dims;
    o.a_factors = c.cfg.carleman.a_factors;
    o.points = c.cfg.carleman.points;
    o.random_trig = c.cfg.carleman.random_trig;
    o.R = c.cfg.carleman.R;
    o.seed = c.cfg.seed;
    auto rs = run_carleman_suite(o);
    put_csv(c, "carleman_check.csv", checks_csv(rs));
    json params = json::array();
    for (int n : o.dims)
        for (double af : o.a_factors) {
            auto cp = CarlemanParams::standard(o.R, n, af * n * n);
            params.push_back({{"n", n}, {"a", cp.a}, {"b", cp.b}, {"eps", cp.eps}, {"R", cp.R}});
        }
    const bool pass = all_pass(rs);
    c.summary = {{"checks", checks_json(rs)},
                 {"params", params},
                 {"identity_tol", o.identity_tol},
                 {"margin_tol", o.margin_tol},
                 {"pass", pass}};
    for (const auto& r : rs)
        if (!r.pass) c.out << "FAIL " << r.name << " n=" << r.n << " residual=" << fmt17(r.max_residual) << "\n";
    c.out << "carleman-check: " << rs.size() << " checks, " << (pass ? "all pass" : "failures") << "\n";
    return pass;
}

bool run_simulate(Context& c) {
    const auto& cfg = c.cfg;
    const GTC1D dom = cfg.domain();
    Scheme s(dom, cfg.coeffs, cfg.ta, cfg.tb, cfg.grid);
    CauchyData d = sample_cauchy(s, make_profile(cfg.simulate.phi0, dom, cfg.ta),
                                 make_velocity(cfg.simulate.phi1, cfg.simulate.phi0, dom, cfg.ta));
    Field f = solve_forward(s, d);
    const int st = cfg.simulate.stride_t > 0 ? cfg.simulate.stride_t : std::max(1, f.nt / 200);
    const int sx = cfg.simulate.stride_x > 0 ? cfg.simulate.stride_x : std::max(1, f.nx / 100);
    std::ostringstream fcsv;
    write_field_csv(fcsv, f, st, sx);
    put_csv(c, "field.csv", fcsv.str());
    {
        std::ofstream bin(c.dir / "field.bin", std::ios::binary);
        write_field_binary(bin, f);
        if (!bin) throw std::runtime_error("cannot write field.bin");
    }
    std::string e = "t,energy\n";
    for (int n = 0; n <= f.nt; n += st) e += fmt17(f.t(n)) + "," + fmt17(energy(f, n)) + "\n";
    put_csv(c, "energy.csv", e);
    const double e0 = energy(f, 0), e1 = energy(f, f.nt);
    c.summary = {{"nx", f.nx},
                 {"nt", f.nt},
                 {"cfl_raised", s.cfl().raised},
                 {"dt_max", s.cfl().dt_max},
                 {"energy_start", e0},
                 {"energy_end", e1},
                 {"energy_drift", e0 > 0 ? std::abs(e1 - e0) / e0 : std::abs(e1 - e0)}};
    bool pass = std::isfinite(e1);
    if (cfg.center && cfg.center->dim() == 1 && cfg.coefficients == "zero") {
        MultiplierTerms m = multiplier_identity(f, dom, *cfg.center);
        c.summary["multiplier"] = {{"slice_minus", m.slice_minus},
                                   {"slice_plus", m.slice_plus},
                                   {"boundary", m.boundary},
                                   {"residual", m.residual},
                                   {"tolerance", cfg.simulate.multiplier_tol}};
        pass = pass && std::abs(m.residual) <= cfg.simulate.multiplier_tol;
        c.out << "multiplier residual " << fmt17(m.residual) << "\n";
    }
    c.out << "simulate: " << f.nx << "x" << f.nt << (s.cfl().raised ? " (nt raised for CFL)" : "")
          << ", E(tau-) = " << fmt17(e0) << ", E(tau+) = " << fmt17(e1) << "\n";
    return pass;
}

bool run_scan(Context& c) {
    const auto& cfg = c.cfg;
    const GTC1D dom = cfg.domain();
    ScanOptions o;
    o.windows = cfg.scan.windows;
    o.grid = cfg.grid;
    o.beam_grid = {cfg.scan.beam_nx, 3 * cfg.scan.beam_nx};
    o.members = cfg.scan.members;
    o.modes = cfg.scan.modes;
    o.seed = cfg.seed;
    o.sides = {cfg.scan.observe_left, cfg.scan.observe_right};
    bool have_T = true;
    try {
        o.optimal_T = optimal_times_1d(dom, cfg.ta).T_onesided;
    } catch (const std::exception&) {
        have_T = false;
        o.optimal_T = 0.0;
    }
    auto rows = timespan_scan(dom, cfg.coeffs, cfg.ta, o);
    std::string s = scan_csv_header() + "\n";
    for (const auto& r : rows) s += scan_csv_row(r) + "\n";
    put_csv(c, "scan.csv", s);

    bool pass = true;
    for (const auto& r : rows) pass = pass && std::isfinite(r.min_ratio) && r.min_ratio >= 0;
    // Threshold separation: first window above T against the beam of the last window below it.
    const ScanRow *above = nullptr, *below = nullptr;
    for (const auto& r : rows) {
        if (r.window > o.optimal_T && (!above || r.window < above->window)) above = &r;
        if (r.window < o.optimal_T && (!below || r.window > below->window)) below = &r;
    }
    json sep = nullptr;
    if (have_T && above && below) {
        const double ratio = below->beam_ratio > 0 ? above->min_ratio / below->beam_ratio : INFINITY;
        sep = {{"window_above", above->window}, {"window_below", below->window}, {"separation", ratio}, {"required", 10.0}};
        pass = pass && ratio >= 10.0;
        c.out << "threshold separation " << fmt17(ratio) << " (windows " << above->window << " vs " << below->window << ")\n";
    }

    json carl = nullptr;
    if (cfg.center && cfg.center->dim() == 1) {
        const SpacetimePoint P = *cfg.center;
        const double R = carleman_radius(dom, P, cfg.ta, cfg.tb);
        std::vector<double> as = cfg.carleman_a ? std::vector<double>{*cfg.carleman_a} : std::vector<double>{1.0, 4.0};
        CarlemanQuadOptions qo;
        qo.nx = cfg.scan.quad_nx;
        qo.nt = cfg.scan.quad_nt;
        std::string cs = carleman_csv_header() + "\n";
        const auto cat = carleman_catalog();
        for (double a : as) {
            CarlemanParams cp = CarlemanParams::standard(R, 1, a);
            for (const auto& q : cat) {
                CarlemanTerms t = carleman_quadrature(vanishing_on(dom, q.q), dom, P, cp, cfg.ta, cfg.tb, qo);
                cs += carleman_csv_row(q.name, a, t) + "\n";
                pass = pass && std::isfinite(t.C_emp);
            }
        }
        put_csv(c, "carleman.csv", cs);
        carl = {{"R", R}, {"a_values", as}, {"nx", qo.nx}, {"nt", qo.nt}};
    }
    json jr = json::array();
    for (const auto& r : rows)
        jr.push_back({{"window", r.window}, {"min_ratio", r.min_ratio}, {"median_ratio", r.median_ratio}, {"beam_ratio", r.beam_ratio}});
    c.summary = {{"grid", {{"nx", o.grid.nx}, {"nt", o.grid.nt}}},
                 {"beam_grid", {{"nx", o.beam_grid.nx}, {"nt", o.beam_grid.nt}}},
                 {"members", o.members},
                 {"modes", o.modes},
                 {"seed", o.seed},
                 {"optimal_T", have_T ? json(o.optimal_T) : json(nullptr)},
                 {"rows", jr},
                 {"separation", sep},
                 {"carleman", carl}};
    c.out << "observability-scan: " << rows.size() << " windows\n";
    return pass;
}

std::string control_csv(const HUMOperator& op, const BoundaryData& g, Side side) {
    const Scheme& s = op.scheme();
    std::string out = "tau,control_value\n";
    const auto& v = side == Side::left ? g.left : g.right;
    for (int n = 0; n <= s.nt(); ++n) out += fmt17(s.t(n)) + "," + fmt17(v[n]) + "\n";
    return out;
}

bool run_hum(Context& c) {
    const auto& cfg = c.cfg;
    const GTC1D dom = cfg.domain();
    HUMProblem p{dom, cfg.coeffs, cfg.ta, cfg.tb};
    p.gamma = cfg.hum.gamma;
    auto prof = [&](const ProfileSpec& s, double t) { return s.is_zero() ? Profile{} : make_profile(s, dom, t); };
    p.phi0_minus = prof(cfg.hum.phi0_minus, cfg.ta);
    p.phi1_minus = cfg.hum.phi1_minus.is_zero() ? Profile{} : make_velocity(cfg.hum.phi1_minus, cfg.hum.phi0_minus, dom, cfg.ta);
    p.phi0_plus = prof(cfg.hum.phi0_plus, cfg.tb);
    p.phi1_plus = prof(cfg.hum.phi1_plus, cfg.tb);
    p.rho_reg = cfg.hum.rho_reg;
    p.cg_tol = cfg.hum.cg_tol;
    p.cg_max_iter = cfg.hum.cg_max_iter;
    p.grid = cfg.grid;
    p.pairing = cfg.hum.pairing;

    json warn = nullptr;
    try {
        const double T = optimal_times_1d(dom, cfg.ta).T_onesided;
        if (cfg.tb - cfg.ta <= T) warn = "window does not exceed the one-sided optimal time " + fmt17(T);
    } catch (const std::exception&) {
    }
    if (!warn.is_null()) c.out << "warning: " << warn.get<std::string>() << "\n";

    HUMOperator op(p);
    const bool exact = !cfg.hum.phi0_plus.is_zero() || !cfg.hum.phi1_plus.is_zero();
    HUMSolution sol = exact ? solve_exact_control(op) : solve_null_control(op);
    if (!p.gamma.left.empty()) put_csv(c, "control_left.csv", control_csv(op, sol.control, Side::left));
    if (!p.gamma.right.empty()) put_csv(c, "control_right.csv", control_csv(op, sol.control, Side::right));

    bool pass = sol.final_energy_rel <= cfg.hum.tolerance;
    json mini = nullptr;
    if (cfg.hum.minimality_count > 0) {
        MinimalityReport m = minimality_check(op, sol, cfg.hum.minimality_count, cfg.seed);
        mini = {{"count", cfg.hum.minimality_count},
                {"hum_norm2", m.hum_norm2},
                {"perturbed_norm2", m.perturbed_norm2},
                {"scaled_gap_ratio", m.scaled_gap_ratio},
                {"worst_relative_deficit", m.worst_relative_deficit},
                {"max_cross", m.max_cross},
                {"pass", m.pass}};
        pass = pass && m.pass;
    }
    c.summary = {{"mode", exact ? "exact" : "null"},
                 {"pairing", p.pairing == Pairing::h1 ? "h1" : "l2"},
                 {"nx", op.scheme().nx()},
                 {"nt", op.scheme().nt()},
                 {"cfl_raised", sol.cfl.raised},
                 {"iterations", sol.iterations},
                 {"converged", sol.converged},
                 {"rho", sol.rho},
                 {"rho_reg", p.rho_reg},
                 {"gram_norm", sol.gram_norm},
                 {"J", sol.J},
                 {"control_norm", sol.control_norm},
                 {"final_energy_rel", sol.final_energy_rel},
                 {"tolerance", cfg.hum.tolerance},
                 {"J_history", sol.J_history},
                 {"residual_history", sol.residual_history},
                 {"minimality", mini},
                 {"warning", warn}};
    c.out << "hum: " << (exact ? "exact" : "null") << " control, " << sol.iterations << " CG iterations"
          << (sol.converged ? "" : " (not converged)") << ", relative final energy " << fmt17(sol.final_energy_rel)
          << "\n";
    return pass;
}

bool run_optimal(Context& c) {
    const auto& cfg = c.cfg;
    OptimalTimes o = optimal_times_1d(cfg.domain(), cfg.ta);
    c.summary = {{"tau_minus", cfg.ta}, {"T", o.T_onesided}, {"T_minus", o.T_minus}, {"T_plus", o.T_plus}, {"T1", o.T1}, {"T2", o.T2}};
    bool pass = true;
    if (cfg.left.is_linear() && cfg.right.is_linear() && cfg.left.intercept() == 0.0 && cfg.right.intercept() == 0.0) {
        OptimalTimes cf = optimal_times_lines(cfg.left.slope(), cfg.right.slope(), cfg.ta);
        const double err = std::max({std::abs(cf.T_onesided - o.T_onesided), std::abs(cf.T_minus - o.T_minus),
                                     std::abs(cf.T_plus - o.T_plus), std::abs(cf.T2 - o.T2)});
        c.summary["closed_form"] = {{"T", cf.T_onesided}, {"T_minus", cf.T_minus}, {"T_plus", cf.T_plus}, {"T2", cf.T2}, {"max_error", err}};
        pass = err <= 1e-10;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "T=%.12g T_-=%.12g T_+=%.12g\n", o.T_onesided, o.T_minus, o.T_plus);
    c.out << buf;
    return pass;
}

const std::map<std::string, std::function<bool(Context&)>>& table() {
    static const std::map<std::string, std::function<bool(Context&)>> t = {
        {"region", run_region},      {"identity-check", run_identity}, {"carleman-check", run_carleman},
        {"simulate", run_simulate},  {"observability-scan", run_scan}, {"hum", run_hum},
        {"optimal-times", run_optimal}};
    return t;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s = {"region", "identity-check", "carleman-check", "simulate",
                                               "observability-scan", "hum", "optimal-times"};
    return s;
}

GridSpec parse_grid(const std::string& s) {
    const auto x = s.find('x');
    std::size_t a = 0, b = 0;
    try {
        if (x == std::string::npos) throw std::invalid_argument("");
        const std::string l = s.substr(0, x), r = s.substr(x + 1);
        GridSpec g{std::stoi(l, &a), std::stoi(r, &b)};
        if (a != l.size() || b != r.size() || g.nx < 4 || g.nt < 2) throw std::invalid_argument("");
        return g;
    } catch (const std::exception&) {
        throw std::invalid_argument("--grid expects NXxNT with NX >= 4 and NT >= 2, got '" + s + "'");
    }
}

int dispatch(const std::string& sub, const std::string& config_path, const RunOptions& opt, std::ostream& out,
             std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    auto it = table().find(sub);
    if (it == table().end()) {
        err << "unknown subcommand '" << sub << "'\n";
        return 2;
    }
    std::string text;
    ExperimentConfig cfg;
    try {
        text = read_file(config_path);
        cfg = parse_config(text);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }
    if (opt.out) cfg.out_dir = *opt.out;
    if (opt.grid) cfg.grid = *opt.grid;
    if (opt.seed) cfg.seed = *opt.seed;

    Context c{cfg, fs::path(cfg.out_dir), out};
    bool pass = false;
    try {
        fs::create_directories(c.dir);
        pass = it->second(c);
    } catch (const Precondition& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "precondition failed: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "precondition failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    json sj = c.summary;
    sj["pass"] = pass;
    write_file((c.dir / (sub + ".json")).string(), sj.dump(2) + "\n");
    json manifest = {{"subcommand", sub},
                     {"config_sha256", sha256_hex(text)},
                     {"seed", cfg.seed},
                     {"grid", {{"nx", cfg.grid.nx}, {"nt", cfg.grid.nt}}},
                     {"wall_ms", ms},
                     {"pass", pass},
                     {"version", kVersion}};
    write_file((c.dir / "manifest.json").string(), manifest.dump(2) + "\n");
    out << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

}  // namespace mbwave
