#include "rcert/config.hpp"

#include <cmath>
#include <set>

#include "rcert/errors.hpp"

namespace rcert {

using nlohmann::json;

namespace {

std::string type_name(const json& j) { return j.type_name(); }

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number, got " + type_name(j));
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

std::size_t as_count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

// Object view that records which keys were read and rejects the rest.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) fail(path_, "expected an object, got " + type_name(j));
    }

    std::string at(const std::string& key) const { return path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    const json& get(const std::string& key) {
        if (!j_.contains(key)) fail(at(key), "required field is missing");
        seen_.insert(key);
        return j_.at(key);
    }
    const json* find(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }
    double num(const std::string& key) { return as_number(get(key), at(key)); }
    double num(const std::string& key, double fallback) {
        const auto* v = find(key);
        return v ? as_number(*v, at(key)) : fallback;
    }
    std::size_t count(const std::string& key, std::size_t fallback) {
        const auto* v = find(key);
        return v ? as_count(*v, at(key)) : fallback;
    }
    bool boolean(const std::string& key, bool fallback) {
        const auto* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) fail(at(key), "expected a boolean");
        return v->get<bool>();
    }
    std::string str(const std::string& key) {
        const auto& v = get(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::optional<std::string> opt_str(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return str(key);
    }

    void done() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) fail(at(key), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Tag parse_tag(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a tag name");
    const auto s = j.get<std::string>();
    for (Tag t : {Tag::Positive, Tag::Nonnegative, Tag::Nonpositive, Tag::MonotoneInWEven}) {
        if (to_string(t) == s) return t;
    }
    fail(path, "unknown tag '" + s + "'");
}

std::vector<FieldSpec> parse_field_list(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of fields");
    std::vector<FieldSpec> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(parse_field(j[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

}  // namespace

FieldSpec parse_field(const json& j, const std::string& path) {
    if (j.is_number()) {
        const double c = as_number(j, path);
        return {ScalarField::constant(c), false};
    }
    Obj o(j, path);
    const auto kind = o.str("kind");
    std::vector<Tag> tags;
    if (const auto* t = o.find("tags")) {
        if (!t->is_array()) fail(o.at("tags"), "expected an array");
        for (std::size_t k = 0; k < t->size(); ++k) tags.push_back(parse_tag((*t)[k], o.at("tags") + "[" + std::to_string(k) + "]"));
    }
    auto name = o.opt_str("name");
    FieldSpec out;
    ScalarField::Fn fn;
    std::vector<double> singular;
    if (kind == "constant") {
        const double c = o.num("value");
        fn = [c](double, double) { return c; };
        if (!name) name = std::to_string(c);
    } else if (kind == "power") {
        const double a = o.num("coef", 1.0), te = o.num("t_exp", 0.0), we = o.num("w_exp", 0.0);
        const bool abs_w = o.boolean("abs_w", true);
        out.depends_on_w = we != 0.0;
        if (we < 1.0 && we != 0.0) singular.push_back(0.0);
        if (abs_w) {
            fn = [a, te, we](double t, double w) { return a * std::pow(t, te) * std::pow(std::abs(w), we); };
        } else {
            fn = [a, te, we](double t, double w) { return a * std::pow(t, te) * std::pow(w, we); };
        }
        if (!name) name = "power";
    } else if (kind == "polynomial") {
        const auto& c = o.get("coeffs");
        const auto cp = o.at("coeffs");
        if (!c.is_array() || c.empty()) fail(cp, "expected a nonempty array of rows");
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto rp = cp + "[" + std::to_string(i) + "]";
            if (!c[i].is_array()) fail(rp, "expected an array of coefficients");
            std::vector<double> row;
            for (std::size_t k = 0; k < c[i].size(); ++k) {
                row.push_back(as_number(c[i][k], rp + "[" + std::to_string(k) + "]"));
                if (k > 0 && row.back() != 0.0) out.depends_on_w = true;
            }
            rows.push_back(std::move(row));
        }
        fn = [rows](double t, double w) {
            double acc = 0.0;
            for (std::size_t i = rows.size(); i-- > 0;) {
                double inner = 0.0;
                for (std::size_t k = rows[i].size(); k-- > 0;) inner = inner * w + rows[i][k];
                acc = acc * t + inner;
            }
            return acc;
        };
        if (!name) name = "polynomial";
    } else if (kind == "exponential") {
        const double a = o.num("coef", 1.0), k = o.num("rate");
        fn = [a, k](double t, double) { return a * std::exp(k * t); };
        if (!name) name = "exponential";
    } else if (kind == "sum" || kind == "product") {
        const auto parts = parse_field_list(o.get(kind == "sum" ? "terms" : "factors"),
                                            o.at(kind == "sum" ? "terms" : "factors"));
        for (const auto& p : parts) {
            out.depends_on_w = out.depends_on_w || p.depends_on_w;
            singular.insert(singular.end(), p.field.singular_w().begin(), p.field.singular_w().end());
        }
        std::vector<ScalarField> fs;
        for (const auto& p : parts) fs.push_back(p.field);
        if (kind == "sum") {
            fn = [fs](double t, double w) {
                double acc = 0.0;
                for (const auto& f : fs) acc += f(t, w);
                return acc;
            };
        } else {
            fn = [fs](double t, double w) {
                double acc = 1.0;
                for (const auto& f : fs) acc *= f(t, w);
                return acc;
            };
        }
        if (!name) name = kind;
    } else {
        fail(o.at("kind"), "unknown field kind '" + kind + "'");
    }
    o.done();
    out.field = ScalarField(*name, std::move(fn), std::move(tags), std::move(singular));
    return out;
}

TimeFunction parse_time_function(const json& j, const std::string& path) {
    auto spec = parse_field(j, path);
    if (spec.depends_on_w) fail(path, "must not depend on w");
    return [f = std::move(spec.field)](double t) { return f(t, 0.0); };
}

namespace {

InitialData parse_initial(const json& j, const std::string& path) {
    Obj o(j, path);
    InitialData ic{o.num("t1"), o.num("phi0"), o.num("phi1")};
    o.done();
    return ic;
}

std::vector<InitialData> parse_initial_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of initial data");
    std::vector<InitialData> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(parse_initial(j[k], path + "[" + std::to_string(k) + "]"));
    return out;
}

}  // namespace

ParsedEquation parse_equation(const json& j, const std::string& path) {
    Obj o(j, path);
    ParsedEquation out;
    const double t0 = o.num("t0", 0.0);
    if (o.has("emden_fowler")) {
        out.kind = EquationKind::EmdenFowler;
        Obj e(o.get("emden_fowler"), o.at("emden_fowler"));
        out.ef.rho = e.num("rho");
        out.ef.sigma = e.num("sigma");
        out.ef.n = e.num("n");
        const auto variant = e.has("variant") ? e.str("variant") : std::string("absolute");
        if (variant == "absolute") {
            out.ef.variant = EFVariant::Absolute;
        } else if (variant == "signed") {
            out.ef.variant = EFVariant::Signed;
        } else {
            fail(e.at("variant"), "expected 'absolute' or 'signed'");
        }
        e.done();
        if (!(out.ef.n > 1.0)) fail(e.at("n"), "must exceed 1");
        if (!(t0 > 0.0)) fail(o.at("t0"), "Emden-Fowler equations need t0 > 0");
        out.eq = ef_equation(out.ef, t0);
    } else if (o.has("van_der_pol")) {
        out.kind = EquationKind::VanDerPol;
        Obj v(o.get("van_der_pol"), o.at("van_der_pol"));
        out.vdp.lambda = parse_time_function(v.get("lambda"), v.at("lambda"));
        out.vdp.mu = parse_time_function(v.get("mu"), v.at("mu"));
        out.vdp.nu = parse_time_function(v.get("nu"), v.at("nu"));
        const double t_check = v.num("t_check", t0 + 100.0);
        v.done();
        try {
            out.eq = vdp_equation(out.vdp, t0, t_check);
        } catch (const DomainError& e) {
            fail(o.at("van_der_pol"), e.what());
        }
    } else {
        out.eq.p0 = parse_field(o.get("p0"), o.at("p0")).field;
        out.eq.q0 = parse_field(o.get("q0"), o.at("q0")).field;
        out.eq.r0 = parse_field(o.get("r0"), o.at("r0")).field;
        out.eq.t0 = t0;
    }
    o.done();
    return out;
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    c.source = j;
    Obj o(j, "$");
    const auto schema = o.str("schema");
    if (schema != kConfigSchema) fail(o.at("schema"), "unsupported schema '" + schema + "', expected " + kConfigSchema);
    c.theorem = o.opt_str("theorem");
    if (const auto* e = o.find("equation")) c.equation = parse_equation(*e, o.at("equation"));
    if (const auto* e = o.find("initial")) c.initial = parse_initial(*e, o.at("initial"));
    if (const auto* e = o.find("bounds")) {
        Obj b(*e, o.at("bounds"));
        BoundTriple t;
        t.P = parse_time_function(b.get("P"), b.at("P"));
        t.Q = b.has("Q") ? parse_time_function(b.get("Q"), b.at("Q")) : TimeFunction([](double) { return 0.0; });
        t.R = b.has("R") ? parse_time_function(b.get("R"), b.at("R")) : TimeFunction([](double) { return 0.0; });
        b.done();
        c.bounds = t;
    }
    if (const auto* e = o.find("qtilde")) c.qtilde = parse_time_function(*e, o.at("qtilde"));
    if (const auto* e = o.find("region")) {
        Obj r(*e, o.at("region"));
        Region reg{r.num("t_lo"), r.num("t_hi"), r.num("w_lo", -1.0), r.num("w_hi", 1.0)};
        r.done();
        if (!(reg.t_hi > reg.t_lo)) fail(o.at("region"), "t_hi must exceed t_lo");
        if (!(reg.w_hi >= reg.w_lo)) fail(o.at("region"), "w_hi must not be below w_lo");
        c.region = reg;
    }
    if (const auto* e = o.find("grid")) {
        Obj g(*e, o.at("grid"));
        c.grid.nt = g.count("nt", c.grid.nt);
        c.grid.nw = g.count("nw", c.grid.nw);
        g.done();
        if (c.grid.nt < 2 || c.grid.nw < 2) fail(o.at("grid"), "resolution must be at least 2");
    }
    if (const auto* e = o.find("epsilon")) c.epsilon = as_number(*e, o.at("epsilon"));
    if (const auto* e = o.find("comparison")) {
        Obj cmp(*e, o.at("comparison"));
        c.comparison_equation = parse_equation(cmp.get("equation"), cmp.at("equation"));
        Obj m(cmp.get("majorant"), cmp.at("majorant"));
        MajorantSpec ms;
        const auto kind = m.str("kind");
        if (kind == "kneser") {
            ms.kind = MajorantSpec::Kind::Kneser;
        } else if (kind == "trajectory") {
            ms.kind = MajorantSpec::Kind::Trajectory;
            ms.initial = parse_initial(m.get("initial"), m.at("initial"));
        } else {
            fail(m.at("kind"), "expected 'kneser' or 'trajectory'");
        }
        m.done();
        cmp.done();
        c.majorant = ms;
    }
    if (const auto* e = o.find("family")) {
        Obj f(*e, o.at("family"));
        c.family = ComparisonFamily{parse_field(f.get("p"), f.at("p")).field, parse_field(f.get("q"), f.at("q")).field,
                                    parse_field(f.get("r"), f.at("r")).field};
        f.done();
    }
    c.N = o.num("N", c.N);
    c.eps0 = o.num("eps0", c.eps0);
    if (const auto* e = o.find("integration")) {
        Obj g(*e, o.at("integration"));
        auto& io = c.integration;
        io.rel_tol = g.num("rel_tol", io.rel_tol);
        io.abs_tol = g.num("abs_tol", io.abs_tol);
        io.horizon = g.num("horizon", io.horizon);
        io.escape_threshold = g.num("escape_threshold", io.escape_threshold);
        io.zero_tol = g.num("zero_tol", io.zero_tol);
        io.max_zeros = g.count("max_zeros", io.max_zeros);
        g.done();
        if (!(io.rel_tol > 0.0) || !(io.abs_tol > 0.0)) fail(o.at("integration"), "tolerances must be positive");
    }
    if (const auto* e = o.find("classify")) {
        Obj g(*e, o.at("classify"));
        auto& p = c.policy;
        p.min_zeros = g.count("min_zeros", p.min_zeros);
        p.window = g.num("window", p.window);
        p.gap_ratio = g.num("gap_ratio", p.gap_ratio);
        p.k = g.count("k", p.k);
        g.done();
    }
    if (const auto* e = o.find("sweep")) {
        Obj g(*e, o.at("sweep"));
        auto& s = c.sweep;
        s.rect = {g.num("phi_lo"), g.num("phi_hi"), g.num("dphi_lo"), g.num("dphi_hi")};
        s.n_phi = g.count("n_phi", s.n_phi);
        s.n_dphi = g.count("n_dphi", s.n_dphi);
        g.done();
        if (s.n_phi < 2 || s.n_dphi < 2) fail(o.at("sweep"), "resolution must be at least 2 x 2");
    }
    if (const auto* e = o.find("emden")) {
        Obj g(*e, o.at("emden"));
        if (const auto* ics = g.find("initial_conditions")) {
            c.emden.initial_conditions = parse_initial_list(*ics, g.at("initial_conditions"));
        }
        if (const auto* st = g.find("stability")) {
            Obj s(*st, g.at("stability"));
            c.emden.stability = true;
            c.emden.stability_eps = s.num("eps", c.emden.stability_eps);
            c.emden.stability_count = s.count("count", c.emden.stability_count);
            c.emden.stability_horizon = s.num("horizon", c.emden.stability_horizon);
            s.done();
        }
        g.done();
    }
    if (const auto* e = o.find("vdp")) {
        Obj g(*e, o.at("vdp"));
        c.vdp.eps0 = g.num("eps0", c.vdp.eps0);
        if (const auto* ics = g.find("initial_conditions")) {
            c.vdp.initial_conditions = parse_initial_list(*ics, g.at("initial_conditions"));
        }
        if (const auto* rnd = g.find("random_ics")) {
            Obj r(*rnd, g.at("random_ics"));
            c.vdp.random_count = r.count("count", 10);
            c.vdp.random_seed = r.count("seed", 1);
            c.vdp.random_lo = r.num("lo", c.vdp.random_lo);
            c.vdp.random_hi = r.num("hi", c.vdp.random_hi);
            r.done();
        }
        g.done();
    }
    o.done();
    return c;
}

}  // namespace rcert
