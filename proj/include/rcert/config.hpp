#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcert/apps.hpp"
#include "rcert/cert.hpp"
#include "rcert/classify.hpp"
#include "rcert/dyn.hpp"

namespace rcert {

inline constexpr const char* kConfigSchema = "rcert/1";

/// A field spec parsed from JSON, kept next to the compiled field so that
/// reports can echo it.
struct FieldSpec {
    ScalarField field;
    bool depends_on_w = false;
};

/// Field JSON: a number, or an object with "kind" one of
///   constant    {value}
///   power       {coef, t_exp, w_exp = 0, abs_w = true}      coef t^t_exp |w|^w_exp
///   polynomial  {coeffs: [[c00, c01, ...], [c10, ...], ...]} sum c_ij t^i w^j
///   exponential {coef, rate}                                 coef exp(rate t)
///   sum         {terms: [field, ...]}
///   product     {factors: [field, ...]}
/// plus optional "tags" and "name".
FieldSpec parse_field(const nlohmann::json& j, const std::string& path);
/// As parse_field, rejecting fields that depend on w.
TimeFunction parse_time_function(const nlohmann::json& j, const std::string& path);

enum class EquationKind { General, EmdenFowler, VanDerPol };

struct ParsedEquation {
    EquationKind kind = EquationKind::General;
    EquationSpec eq;
    EFParams ef;
    VdPParams vdp;
};

ParsedEquation parse_equation(const nlohmann::json& j, const std::string& path);

struct MajorantSpec {
    enum class Kind { Kneser, Trajectory } kind = Kind::Trajectory;
    InitialData initial;
};

struct EmdenOptions {
    std::vector<InitialData> initial_conditions;
    bool stability = false;
    double stability_eps = 1.0;
    std::size_t stability_count = 20;
    double stability_horizon = 50.0;
};

struct VdPOptions {
    double eps0 = 1.0;
    std::vector<InitialData> initial_conditions;
    std::size_t random_count = 0;
    std::uint64_t random_seed = 1;
    double random_lo = -5.0;
    double random_hi = 5.0;
};

struct SweepOptions {
    IcRectangle rect;
    std::size_t n_phi = 8;
    std::size_t n_dphi = 8;
};

struct RunConfig {
    nlohmann::json source;
    std::optional<std::string> theorem;
    std::optional<ParsedEquation> equation;
    std::optional<InitialData> initial;
    std::optional<BoundTriple> bounds;
    std::optional<TimeFunction> qtilde;
    std::optional<Region> region;
    Grid grid;
    std::optional<double> epsilon;
    std::optional<ParsedEquation> comparison_equation;
    std::optional<MajorantSpec> majorant;
    std::optional<ComparisonFamily> family;
    double N = 1.0;
    double eps0 = 1.0;
    IntegrationOptions integration;
    ClassifyPolicy policy;
    SweepOptions sweep;
    EmdenOptions emden;
    VdPOptions vdp;
};

/// Validates and compiles a config document. Unknown keys and type errors
/// raise ConfigError with the JSON path of the offending field.
RunConfig parse_config(const nlohmann::json& j);

}  // namespace rcert
