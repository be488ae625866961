#include "rcert/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>

#include "CLI11.hpp"
#include "rcert/errors.hpp"

namespace rcert {

using J = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

const std::map<std::string, Theorem> kTheorems = {
    {"t3_1", Theorem::T3_1}, {"t3_2", Theorem::T3_2}, {"t3_3", Theorem::T3_3}, {"t3_4", Theorem::T3_4},
    {"t3_5", Theorem::T3_5}, {"t3_6", Theorem::T3_6}, {"t4_2", Theorem::T4_2},
};

J ic_json(const InitialData& ic) { return {{"t1", ic.t1}, {"phi0", ic.phi0}, {"phi1", ic.phi1}}; }

J classification_json(const Classification& c) {
    J j;
    j["kind"] = std::string(to_string(c.kind));
    j["zero_count"] = c.zero_count;
    j["gap_ratios"] = c.gap_ratios;
    j["terminal"] = std::string(to_string(c.terminal));
    j["terminal_time"] = c.terminal_time;
    j["monotone"] = c.monotone;
    j["dead_band_from"] = c.dead_band_from ? J(*c.dead_band_from) : J(nullptr);
    j["note"] = c.note;
    return j;
}

J terminal_json(const TerminalStatus& t) {
    return {{"kind", std::string(to_string(t.kind))}, {"t", t.t}, {"bracket", t.bracket}, {"reason", t.reason}};
}

std::string summary_line(const Certificate& c) {
    std::string line = std::string(to_string(c.theorem)) + " " + std::string(to_string(c.status));
    if (c.status == Status::Verified) {
        line += " " + c.conclusion;
        if (c.uniform_bound) line += " bound=" + J(*c.uniform_bound).dump();
    } else if (c.witness) {
        line += " witness: " + c.witness->hypothesis + " at t=" + J(c.witness->t).dump() +
                " w=" + J(c.witness->w).dump();
    } else {
        line += " " + c.reason;
    }
    return line;
}

class Runner {
public:
    Runner(const RunConfig& c, fs::path out) : c_(c), out_(std::move(out)) {}

    Outcome certify(const std::string& name) {
        const auto it = kTheorems.find(name);
        if (it == kTheorems.end()) throw ConfigError("$.theorem: unknown theorem '" + name + "'");
        const auto& pe = equation();
        const auto region = default_region(pe.eq.t0, -1.0, 1.0);
        Certificate cert;
        switch (it->second) {
            case Theorem::T3_1: {
                const auto ic = initial();
                EnvelopeOptions opt;
                opt.epsilon = c_.epsilon;
                if (pe.kind == EquationKind::EmdenFowler && !c_.bounds) {
                    cert = ef_check_T3_1(pe.ef, pe.eq.t0, ic, region, c_.grid, opt);
                } else {
                    cert = check_T3_1(pe.eq, ic, bounds(pe), region, c_.grid, opt);
                }
                break;
            }
            case Theorem::T3_2: {
                if (!c_.qtilde) throw ConfigError("$.qtilde: required field is missing");
                EnvelopeOptions opt;
                opt.epsilon = c_.epsilon;
                cert = check_T3_2(pe.eq, initial(), bounds(pe), *c_.qtilde, region, c_.grid, opt);
                break;
            }
            case Theorem::T3_3: {
                if (!c_.comparison_equation || !c_.majorant) {
                    throw ConfigError("$.comparison: required field is missing");
                }
                const auto& eq1 = *c_.comparison_equation;
                Majorant m;
                if (c_.majorant->kind == MajorantSpec::Kind::Kneser) {
                    if (eq1.kind != EquationKind::EmdenFowler) {
                        throw ConfigError("$.comparison.majorant: a Kneser majorant needs an emden_fowler equation");
                    }
                    const auto k = kneser_solution(eq1.ef);
                    m = Majorant::closed_form([k](double t) { return k.phi(t); }, [k](double t) { return k.dphi(t); },
                                              "kneser");
                } else {
                    auto o = c_.integration;
                    o.horizon = region.t_hi;
                    m = Majorant::from_trajectory(
                        std::make_shared<const Trajectory>(integrate(eq1.eq, c_.majorant->initial, o)));
                }
                cert = check_T3_3(pe.eq, eq1.eq, m, initial(), region, c_.grid);
                break;
            }
            case Theorem::T3_4: cert = check_T3_4(pe.eq, bounds(pe), region, c_.grid); break;
            case Theorem::T3_5: {
                ComparisonFamily fam;
                if (c_.family) {
                    fam = *c_.family;
                } else if (pe.kind == EquationKind::VanDerPol) {
                    fam = vdp_family(pe.vdp);
                } else {
                    throw ConfigError("$.family: required field is missing");
                }
                cert = check_T3_5(pe.eq, bounds(pe), fam, c_.N, c_.eps0, region, c_.grid);
                break;
            }
            case Theorem::T3_6: cert = check_T3_6(pe.eq, region, c_.grid); break;
            case Theorem::T4_2: {
                if (pe.kind != EquationKind::VanDerPol) {
                    throw ConfigError("$.equation: t4_2 needs a van_der_pol equation");
                }
                cert = check_T4_2(pe.vdp, c_.eps0, region, c_.grid);
                break;
            }
        }
        add(cert);
        return finish();
    }

    Outcome integrate_only() {
        const auto traj = run_trajectory(equation().eq, initial(), "trajectory");
        results_["terminal"] = terminal_json(traj.terminal());
        results_["zero_count"] = traj.zeros().size();
        results_["zeros"] = traj.zeros();
        const auto rc = refine_check(equation().eq, initial(), c_.integration);
        results_["refine"] = {{"tol_coarse", rc.tol_coarse}, {"tol_fine", rc.tol_fine}, {"max_dphi", rc.max_dphi},
                              {"max_dpsi", rc.max_dpsi}, {"t_common", rc.t_common}};
        return finish();
    }

    Outcome classify_one() {
        const auto traj = run_trajectory(equation().eq, initial(), "trajectory");
        results_["classification"] = classification_json(classify(traj, c_.policy));
        return finish();
    }

    Outcome sweep_raster() {
        const auto& pe = equation();
        const double t1 = c_.initial ? c_.initial->t1 : pe.eq.t0;
        const auto raster = sweep(pe.eq, t1, c_.sweep.rect, c_.sweep.n_phi, c_.sweep.n_dphi, c_.integration, c_.policy);
        write_raster_csv(raster, out_ / "raster.csv");
        artifacts_.push_back("raster.csv");
        std::map<std::string, std::size_t> counts;
        std::size_t errors = 0, escapes = 0;
        for (const auto& cell : raster) {
            ++counts[std::string(to_string(cell.kind))];
            errors += cell.error.empty() ? 0 : 1;
            escapes += cell.escape_time ? 1 : 0;
        }
        J k = J::object();
        for (const auto& [name, n] : counts) k[name] = n;
        results_["t1"] = t1;
        results_["cells"] = raster.size();
        results_["kinds"] = k;
        results_["finite_escapes"] = escapes;
        results_["cell_errors"] = errors;
        return finish();
    }

    Outcome emden() {
        const auto& pe = equation();
        if (pe.kind != EquationKind::EmdenFowler) throw ConfigError("$.equation: emden needs an emden_fowler equation");
        const auto& p = pe.ef;
        const double t0 = pe.eq.t0;
        results_["params"] = {{"rho", p.rho},
                              {"sigma", p.sigma},
                              {"n", p.n},
                              {"variant", p.variant == EFVariant::Absolute ? "absolute" : "signed"},
                              {"t0", t0}};
        results_["region_III"] = ef_region_III(p);
        results_["region_IV"] = ef_region_IV(p);
        if (p.rho != 1.0) {
            const auto tr = ef_transform(p);
            results_["transform"] = {{"sigma1", tr.sigma1}, {"K", tr.K}};
        } else {
            results_["transform"] = nullptr;
        }
        if (p.rho == 0.0 && p.sigma + p.n + 1.0 < 0.0) {
            const auto k = kneser_solution(p);
            results_["kneser"] = {{"C", k.C}, {"k", k.k}};
        } else {
            results_["kneser"] = nullptr;
        }
        const auto region = default_region(t0, -1.0, 1.0);
        J runs = J::array();
        for (std::size_t i = 0; i < c_.emden.initial_conditions.size(); ++i) {
            const auto& ic = c_.emden.initial_conditions[i];
            J r;
            r["ic"] = ic_json(ic);
            if (p.rho > 1.0 && ic.phi0 != 0.0) {
                const auto f = ef_bounds_A_B(p, ic.t1, ic.phi0, std::pow(ic.t1, p.rho) * ic.phi1 / ic.phi0);
                r["A"] = f.A ? J(*f.A) : J(nullptr);
                r["B"] = f.B ? J(*f.B) : J(nullptr);
                r["case"] = std::string(to_string(f.which));
            }
            add(ef_check_T3_1(p, t0, ic, {ic.t1, region.t_hi, -1.0, 1.0}, c_.grid));
            r["certificate_index"] = certs_.size() - 1;
            const auto traj = run_trajectory(pe.eq, ic, "ic_" + std::to_string(i));
            r["classification"] = classification_json(classify(traj, c_.policy));
            runs.push_back(r);
        }
        results_["runs"] = runs;
        if (c_.emden.stability) {
            if (!ef_region_IV(p)) throw ConfigError("$.emden.stability: needs rho > 1 and sigma < -1");
            const auto& s = c_.emden;
            J st;
            st["eps"] = s.stability_eps;
            st["delta"] = conditional_stability_delta(p, t0, s.stability_eps);
            st["manifold_limit"] = stability_manifold_limit(p, t0);
            const auto runs_s = conditional_stability_experiment(p, t0, s.stability_eps, s.stability_count,
                                                                  s.stability_horizon, c_.integration);
            J arr = J::array();
            bool all = true;
            for (const auto& r : runs_s) {
                arr.push_back({{"phi0", r.phi0},
                               {"sup", r.sup},
                               {"terminal", std::string(to_string(r.terminal))},
                               {"within", r.within}});
                all = all && r.within;
            }
            st["runs"] = arr;
            st["all_within"] = all;
            results_["stability"] = st;
        }
        return finish();
    }

    Outcome vdp() {
        const auto& pe = equation();
        if (pe.kind != EquationKind::VanDerPol) throw ConfigError("$.equation: vdp needs a van_der_pol equation");
        const auto region = default_region(pe.eq.t0, -5.0, 5.0);
        add(check_T4_2(pe.vdp, c_.vdp.eps0, region, c_.grid));
        auto ics = c_.vdp.initial_conditions;
        std::mt19937_64 gen(c_.vdp.random_seed);
        const double lo = c_.vdp.random_lo, hi = c_.vdp.random_hi;
        // Portable uniform draw: 53 random bits from the engine.
        auto draw = [&] { return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
        for (std::size_t k = 0; k < c_.vdp.random_count; ++k) {
            const double a = draw();
            const double b = draw();
            ics.push_back({pe.eq.t0, a, b});
        }
        J runs = J::array();
        for (std::size_t i = 0; i < ics.size(); ++i) {
            const auto traj = run_trajectory(pe.eq, ics[i], "ic_" + std::to_string(i));
            runs.push_back({{"ic", ic_json(ics[i])}, {"classification", classification_json(classify(traj, c_.policy))}});
        }
        results_["runs"] = runs;
        return finish();
    }

private:
    const ParsedEquation& equation() const {
        if (!c_.equation) throw ConfigError("$.equation: required field is missing");
        return *c_.equation;
    }
    InitialData initial() const {
        if (!c_.initial) throw ConfigError("$.initial: required field is missing");
        return *c_.initial;
    }
    BoundTriple bounds(const ParsedEquation& pe) const {
        if (c_.bounds) return *c_.bounds;
        if (pe.kind == EquationKind::EmdenFowler) return ef_bounds(pe.ef);
        if (pe.kind == EquationKind::VanDerPol) return {pe.vdp.lambda, [](double) { return 0.0; }, pe.vdp.nu};
        throw ConfigError("$.bounds: required field is missing");
    }
    Region default_region(double t0, double w_lo, double w_hi) const {
        if (c_.region) return *c_.region;
        return {t0, t0 + c_.integration.horizon, w_lo, w_hi};
    }

    Trajectory run_trajectory(const EquationSpec& eq, const InitialData& ic, const std::string& stem) {
        auto traj = integrate(eq, ic, c_.integration);
        write_trajectory_csv(traj, out_ / (stem + ".csv"));
        write_trajectory_sidecar(traj, out_ / (stem + ".json"));
        artifacts_.push_back(stem + ".csv");
        artifacts_.push_back(stem + ".json");
        return traj;
    }

    void add(Certificate c) {
        summary_.push_back(summary_line(c));
        certs_.push_back(std::move(c));
    }

    Outcome finish() {
        Outcome o;
        for (const auto& c : certs_) {
            if (c.status != Status::Verified) o.exit_status = kExitNotVerified;
        }
        J certs = J::array();
        for (const auto& c : certs_) certs.push_back(to_json(c));
        o.report["certificates"] = certs;
        o.report["results"] = results_;
        o.report["artifacts"] = artifacts_;
        o.summary = summary_;
        return o;
    }

    const RunConfig& c_;
    fs::path out_;
    std::vector<Certificate> certs_;
    std::vector<std::string> summary_;
    std::vector<std::string> artifacts_;
    J results_ = J::object();
};

}  // namespace

Outcome execute(const std::string& command, const std::optional<std::string>& theorem, const RunConfig& config,
                const fs::path& out) {
    fs::create_directories(out);
    Runner r(config, out);
    Outcome o;
    std::optional<std::string> th = theorem ? theorem : config.theorem;
    if (command == "certify") {
        if (!th) throw ConfigError("$.theorem: certify needs a theorem (t3_1 ... t3_6, t4_2)");
        o = r.certify(*th);
    } else if (command == "integrate") {
        o = r.integrate_only();
    } else if (command == "classify") {
        o = r.classify_one();
    } else if (command == "sweep") {
        o = r.sweep_raster();
    } else if (command == "emden") {
        o = r.emden();
    } else if (command == "vdp") {
        o = r.vdp();
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    J report;
    report["schema"] = kReportSchema;
    report["command"] = command;
    report["theorem"] = command == "certify" ? J(*th) : J(nullptr);
    report["exit_status"] = o.exit_status;
    for (auto& [k, v] : o.report.items()) report[k] = v;
    o.report = std::move(report);
    std::ofstream f(out / "report.json");
    if (!f) throw Error("cannot open " + (out / "report.json").string() + " for writing");
    f << o.report.dump(2) << '\n';
    return o;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"rcert: Riccati-method certificates for second-order nonlinear equations"};
    std::string command;
    std::optional<std::string> theorem;
    std::string config_path;
    std::string out_dir;
    std::optional<double> horizon;
    std::optional<double> tol;
    app.add_option("command", command, "certify | integrate | classify | sweep | emden | vdp")
        ->required()
        ->check(CLI::IsMember({"certify", "integrate", "classify", "sweep", "emden", "vdp"}));
    app.add_option("theorem", theorem, "theorem for certify: t3_1 ... t3_6, t4_2");
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--horizon", horizon, "integration horizon (overrides the config)");
    app.add_option("--tol", tol, "relative integration tolerance (overrides the config)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }
    try {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file " + config_path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(config_path + ": " + e.what());
        }
        auto cfg = parse_config(j);
        if (horizon) {
            if (!(*horizon > 0.0)) throw ConfigError("--horizon must be positive");
            cfg.integration.horizon = *horizon;
        }
        if (tol) {
            if (!(*tol > 0.0)) throw ConfigError("--tol must be positive");
            cfg.integration.rel_tol = *tol;
            cfg.integration.abs_tol = *tol * 1e-2;
        }
        const auto o = execute(command, theorem, cfg, out_dir);
        for (const auto& line : o.summary) std::cout << line << '\n';
        return o.exit_status;
    } catch (const std::exception& e) {
        std::cerr << "rcert: error: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace rcert
