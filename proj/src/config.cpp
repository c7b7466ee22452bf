#include "mbwave/config.hpp"

#include <cmath>
#include <initializer_list>
#include <set>

#include "json.hpp"
#include "mbwave/io.hpp"

namespace mbwave {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) fail(path.empty() ? "config" : path, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown field");
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
}

double number_or(const json& obj, const std::string& path, const char* key, double def) {
    return obj.contains(key) ? number(obj.at(key), join(path, key)) : def;
}

long long integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
}

int int_or(const json& obj, const std::string& path, const char* key, int def, int lo) {
    if (!obj.contains(key)) return def;
    long long x = integer(obj.at(key), join(path, key));
    if (x < lo || x > 1000000000LL) fail(join(path, key), "must be >= " + std::to_string(lo));
    return static_cast<int>(x);
}

bool bool_or(const json& obj, const std::string& path, const char* key, bool def) {
    if (!obj.contains(key)) return def;
    if (!obj.at(key).is_boolean()) fail(join(path, key), "expected true or false");
    return obj.at(key).get<bool>();
}

std::string string_or(const json& obj, const std::string& path, const char* key, const std::string& def) {
    if (!obj.contains(key)) return def;
    if (!obj.at(key).is_string()) fail(join(path, key), "expected a string");
    return obj.at(key).get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<int> ints(const json& v, const std::string& path, int lo, int hi) {
    if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        long long x = integer(v[i], path + "[" + std::to_string(i) + "]");
        if (x < lo || x > hi)
            fail(path + "[" + std::to_string(i) + "]", "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

Curve curve(const json& v, const std::string& path) {
    if (v.contains("knots")) {
        only_keys(v, path, {"knots", "values"});
        if (!v.contains("values")) fail(join(path, "values"), "required with knots");
        auto k = numbers(v.at("knots"), join(path, "knots"));
        auto x = numbers(v.at("values"), join(path, "values"));
        if (k.size() != x.size()) fail(join(path, "values"), "must match knots in length");
        if (k.size() < 2) fail(join(path, "knots"), "need at least two knots");
        for (std::size_t i = 1; i < k.size(); ++i)
            if (!(k[i] > k[i - 1])) fail(join(path, "knots"), "must be strictly increasing");
        return Curve::sampled(k, x);
    }
    only_keys(v, path, {"slope", "intercept"});
    return Curve::linear(number_or(v, path, "slope", 0.0), number_or(v, path, "intercept", 0.0));
}

Fn2 closed_form(const json& v, const std::string& path) {
    if (v.is_number()) {
        double c = number(v, path);
        return [c](double, double) { return c; };
    }
    only_keys(v, path, {"kind", "amp", "kx", "kt", "phase"});
    std::string kind = string_or(v, path, "kind", "");
    if (kind != "sin") fail(join(path, "kind"), "expected \"sin\" (or give a plain number)");
    double amp = number_or(v, path, "amp", 1.0), kx = number_or(v, path, "kx", 0.0);
    double kt = number_or(v, path, "kt", 0.0), ph = number_or(v, path, "phase", 0.0);
    return [=](double t, double x) { return amp * std::sin(kx * x + kt * t + ph); };
}

ProfileSpec profile(const json& v, const std::string& path, bool velocity = false) {
    ProfileSpec p;
    if (v.is_string()) {
        const std::string k = v.get<std::string>();
        if (velocity && k == "comoving") {
            p.kind = k;
            return p;
        }
        if (k != "zero") fail(path, velocity ? "bare profiles are \"zero\" or \"comoving\"" : "the only bare profile is \"zero\"");
        return p;
    }
    only_keys(v, path, {"kind", "mode", "amp", "center", "sigma", "k"});
    p.kind = string_or(v, path, "kind", "");
    if (p.kind != "zero" && p.kind != "sine" && p.kind != "gaussian")
        fail(join(path, "kind"), "expected zero, sine or gaussian");
    p.mode = int_or(v, path, "mode", 1, 1);
    p.amp = number_or(v, path, "amp", 1.0);
    p.center = number_or(v, path, "center", 0.0);
    p.sigma = number_or(v, path, "sigma", 0.1);
    p.k = number_or(v, path, "k", 0.0);
    if (p.kind == "gaussian" && !(p.sigma > 0)) fail(join(path, "sigma"), "must be positive");
    return p;
}

std::vector<std::pair<double, double>> intervals(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of [start, end] pairs");
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        auto ab = numbers(v[i], p);
        if (ab.size() != 2 || !(ab[1] > ab[0])) fail(p, "expected [start, end] with end > start");
        out.emplace_back(ab[0], ab[1]);
    }
    return out;
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

void read_sections(const json& j, ExperimentConfig& c) {
    if (j.contains("simulate")) {
        const json& s = j.at("simulate");
        const std::string p = "simulate";
        only_keys(s, p, {"phi0", "phi1", "stride_t", "stride_x", "multiplier_tol"});
        if (s.contains("phi0")) c.simulate.phi0 = profile(s.at("phi0"), join(p, "phi0"));
        if (s.contains("phi1")) c.simulate.phi1 = profile(s.at("phi1"), join(p, "phi1"), true);
        c.simulate.stride_t = int_or(s, p, "stride_t", 0, 0);
        c.simulate.stride_x = int_or(s, p, "stride_x", 0, 0);
        c.simulate.multiplier_tol = number_or(s, p, "multiplier_tol", c.simulate.multiplier_tol);
    }
    if (j.contains("identity")) {
        const json& s = j.at("identity");
        const std::string p = "identity";
        only_keys(s, p, {"dims", "eps", "points", "R"});
        if (s.contains("dims")) c.identity.dims = ints(s.at("dims"), join(p, "dims"), 1, 8);
        if (s.contains("eps")) c.identity.eps_values = numbers(s.at("eps"), join(p, "eps"));
        c.identity.points = int_or(s, p, "points", c.identity.points, 1);
        c.identity.R = number_or(s, p, "R", c.identity.R);
        if (!(c.identity.R > 0)) fail(join(p, "R"), "must be positive");
    }
    if (j.contains("carleman")) {
        const json& s = j.at("carleman");
        const std::string p = "carleman";
        only_keys(s, p, {"dims", "a_factors", "points", "random_trig", "R", "a"});
        if (s.contains("dims")) c.carleman.dims = ints(s.at("dims"), join(p, "dims"), 1, 8);
        if (s.contains("a_factors")) c.carleman.a_factors = numbers(s.at("a_factors"), join(p, "a_factors"));
        c.carleman.points = int_or(s, p, "points", c.carleman.points, 1);
        c.carleman.random_trig = int_or(s, p, "random_trig", c.carleman.random_trig, 0);
        c.carleman.R = number_or(s, p, "R", c.carleman.R);
        if (!(c.carleman.R > 0)) fail(join(p, "R"), "must be positive");
        if (s.contains("a")) c.carleman_a = number(s.at("a"), join(p, "a"));
    }
    if (j.contains("scan")) {
        const json& s = j.at("scan");
        const std::string p = "scan";
        only_keys(s, p, {"windows", "members", "modes", "beam_nx", "observe_left", "observe_right", "quad_nx", "quad_nt"});
        if (s.contains("windows")) {
            c.scan.windows = numbers(s.at("windows"), join(p, "windows"));
            for (double w : c.scan.windows)
                if (!(w > 0) || c.ta + w > c.t1 + 1e-12) fail(join(p, "windows"), "each window must fit in (tau_-, t1]");
        }
        c.scan.members = int_or(s, p, "members", c.scan.members, 1);
        c.scan.modes = int_or(s, p, "modes", c.scan.modes, 1);
        c.scan.beam_nx = int_or(s, p, "beam_nx", c.scan.beam_nx, 4);
        c.scan.observe_left = bool_or(s, p, "observe_left", c.scan.observe_left);
        c.scan.observe_right = bool_or(s, p, "observe_right", c.scan.observe_right);
        if (!c.scan.observe_left && !c.scan.observe_right) fail(p, "observe at least one side");
        c.scan.quad_nx = int_or(s, p, "quad_nx", c.scan.quad_nx, 4);
        c.scan.quad_nt = int_or(s, p, "quad_nt", c.scan.quad_nt, 4);
    }
    if (j.contains("hum")) {
        const json& s = j.at("hum");
        const std::string p = "hum";
        only_keys(s, p, {"gamma", "phi0_minus", "phi1_minus", "phi0_plus", "phi1_plus", "rho_reg", "cg_tol",
                         "cg_max_iter", "pairing", "tolerance", "minimality_count"});
        if (s.contains("gamma")) {
            const json& g = s.at("gamma");
            only_keys(g, join(p, "gamma"), {"left", "right"});
            if (g.contains("left")) c.hum.gamma.left = intervals(g.at("left"), "hum.gamma.left");
            if (g.contains("right")) c.hum.gamma.right = intervals(g.at("right"), "hum.gamma.right");
        } else {
            c.hum.gamma.right = {{c.ta, c.tb}};
        }
        if (c.hum.gamma.empty()) fail("hum.gamma", "observed region is empty");
        for (const auto* side : {&c.hum.gamma.left, &c.hum.gamma.right})
            for (auto [a, b] : *side)
                if (a < c.ta - 1e-12 || b > c.tb + 1e-12) fail("hum.gamma", "intervals must lie in the window");
        if (s.contains("phi0_minus")) c.hum.phi0_minus = profile(s.at("phi0_minus"), join(p, "phi0_minus"));
        if (s.contains("phi1_minus")) c.hum.phi1_minus = profile(s.at("phi1_minus"), join(p, "phi1_minus"), true);
        if (s.contains("phi0_plus")) c.hum.phi0_plus = profile(s.at("phi0_plus"), join(p, "phi0_plus"));
        if (s.contains("phi1_plus")) c.hum.phi1_plus = profile(s.at("phi1_plus"), join(p, "phi1_plus"));
        c.hum.rho_reg = number_or(s, p, "rho_reg", c.hum.rho_reg);
        if (c.hum.rho_reg < 0) fail(join(p, "rho_reg"), "must be nonnegative");
        c.hum.cg_tol = number_or(s, p, "cg_tol", c.hum.cg_tol);
        if (!(c.hum.cg_tol > 0)) fail(join(p, "cg_tol"), "must be positive");
        c.hum.cg_max_iter = int_or(s, p, "cg_max_iter", c.hum.cg_max_iter, 1);
        std::string pr = string_or(s, p, "pairing", "h1");
        if (pr == "h1") c.hum.pairing = Pairing::h1;
        else if (pr == "l2") c.hum.pairing = Pairing::l2;
        else fail(join(p, "pairing"), "expected \"l2\" or \"h1\"");
        c.hum.tolerance = number_or(s, p, "tolerance", c.hum.tolerance);
        c.hum.minimality_count = int_or(s, p, "minimality_count", c.hum.minimality_count, 0);
    } else {
        c.hum.gamma.right = {{c.ta, c.tb}};
    }
    if (j.contains("region")) {
        const json& s = j.at("region");
        only_keys(s, "region", {"samples_per_side"});
        c.region.samples_per_side = int_or(s, "region", "samples_per_side", c.region.samples_per_side, 1);
    }
}

}  // namespace

Profile make_profile(const ProfileSpec& s, const GTC1D& dom, double t) {
    if (s.kind == "zero") return [](double) { return 0.0; };
    if (s.kind == "comoving") throw std::invalid_argument("a comoving profile needs its position profile");
    if (s.kind == "sine") {
        const double a = dom.lambda1(t), L = dom.width(t), k = s.mode * M_PI, amp = s.amp;
        return [=](double x) { return amp * std::sin(k * (x - a) / L); };
    }
    const double c = s.center, sg = s.sigma, k = s.k, amp = s.amp;
    return [=](double x) {
        const double z = (x - c) / sg;
        return amp * std::exp(-z * z) * std::cos(k * (x - c));
    };
}

Profile make_velocity(const ProfileSpec& v, const ProfileSpec& phi0, const GTC1D& dom, double t) {
    if (v.kind != "comoving") return make_profile(v, dom, t);
    const double a = dom.lambda1(t), L = dom.width(t);
    const double da = dom.curve(Side::left).d1(t), dL = dom.curve(Side::right).d1(t) - da;
    const double amp = phi0.amp;
    std::function<double(double)> dx;
    if (phi0.kind == "zero") {
        dx = [](double) { return 0.0; };
    } else if (phi0.kind == "sine") {
        const double k = phi0.mode * M_PI;
        dx = [=](double x) { return amp * k / L * std::cos(k * (x - a) / L); };
    } else {
        const double c = phi0.center, sg = phi0.sigma, k = phi0.k;
        dx = [=](double x) {
            const double z = (x - c) / sg;
            return amp * std::exp(-z * z) * (-2 * z / sg * std::cos(k * (x - c)) - k * std::sin(k * (x - c)));
        };
    }
    // frozen in the moving frame: phi_t + (lambda_1' + y L') phi_x = 0
    return [=](double x) { return -(da + (x - a) / L * dL) * dx(x); };
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_col(text, e.byte);
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
    }
    only_keys(j, "", {"domain", "coefficients", "window", "center", "delta", "grid", "seed", "output", "simulate",
                      "identity", "carleman", "scan", "hum", "region"});
    ExperimentConfig c;

    if (!j.contains("domain")) fail("domain", "required");
    const json& d = j.at("domain");
    only_keys(d, "domain", {"left", "right", "t0", "t1"});
    if (!d.contains("left") || !d.contains("right")) fail("domain", "needs left and right curves");
    c.left = curve(d.at("left"), "domain.left");
    c.right = curve(d.at("right"), "domain.right");
    c.t0 = number_or(d, "domain", "t0", 0.0);
    c.t1 = number_or(d, "domain", "t1", 1.0);
    if (!(c.t1 > c.t0)) fail("domain.t1", "must exceed t0");
    try {
        (void)c.domain();
    } catch (const std::exception& e) {
        fail("domain", e.what());
    }

    if (j.contains("coefficients")) {
        const json& v = j.at("coefficients");
        if (v.is_string()) {
            if (v.get<std::string>() != "zero") fail("coefficients", "the only named set is \"zero\"");
        } else {
            only_keys(v, "coefficients", {"Xt", "Xx", "V"});
            c.coefficients = "closed_form";
            if (v.contains("Xt")) c.coeffs.Xt = closed_form(v.at("Xt"), "coefficients.Xt");
            if (v.contains("Xx")) c.coeffs.Xx = closed_form(v.at("Xx"), "coefficients.Xx");
            if (v.contains("V")) c.coeffs.V = closed_form(v.at("V"), "coefficients.V");
        }
    }

    c.ta = c.t0;
    c.tb = c.t1;
    if (j.contains("window")) {
        auto w = numbers(j.at("window"), "window");
        if (w.size() != 2) fail("window", "expected [tau_minus, tau_plus]");
        c.ta = w[0];
        c.tb = w[1];
    }
    if (!(c.tb > c.ta)) fail("window", "tau_plus must exceed tau_minus");
    if (c.ta < c.t0 - 1e-12 || c.tb > c.t1 + 1e-12) fail("window", "must lie inside [domain.t0, domain.t1]");

    if (j.contains("center")) {
        const json& p = j.at("center");
        only_keys(p, "center", {"t", "x"});
        if (!p.contains("t") || !p.contains("x")) fail("center", "needs t and x");
        double t = number(p.at("t"), "center.t");
        std::vector<double> x = p.at("x").is_number() ? std::vector<double>{number(p.at("x"), "center.x")}
                                                       : numbers(p.at("x"), "center.x");
        c.center = SpacetimePoint(t, x);
    }
    c.delta = number_or(j, "", "delta", c.delta);
    if (!(c.delta > 0)) fail("delta", "must be positive");

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        only_keys(g, "grid", {"nx", "nt"});
        c.grid.nx = int_or(g, "grid", "nx", c.grid.nx, 4);
        c.grid.nt = int_or(g, "grid", "nt", c.grid.nt, 2);
    }
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            fail("seed", "expected a nonnegative integer");
        c.seed = s.get<std::uint64_t>();
    }
    c.out_dir = string_or(j, "", "output", c.out_dir);

    read_sections(j, c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(text);
}

}  // namespace mbwave
