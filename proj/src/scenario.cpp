#include "vne/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vne/errors.hpp"
#include "vne/symmetry_transforms.hpp"

namespace vne {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- complex text

Complex parse_complex(const std::string& text) {
    static const std::string num = R"((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)";
    static const std::regex real_only("^\\s*([+-]?" + num + ")\\s*$");
    static const std::regex imag_only("^\\s*([+-]?)(" + num + ")?\\s*\\*?\\s*[ij]\\s*$");
    static const std::regex both("^\\s*([+-]?" + num + ")\\s*([+-])\\s*(" + num +
                                 ")?\\s*\\*?\\s*[ij]\\s*$");
    std::smatch m;
    if (std::regex_match(text, m, real_only)) return {std::stod(m[1].str()), 0.0};
    if (std::regex_match(text, m, imag_only)) {
        const double mag = m[2].matched ? std::stod(m[2].str()) : 1.0;
        return {0.0, m[1].str() == "-" ? -mag : mag};
    }
    if (std::regex_match(text, m, both)) {
        const double mag = m[3].matched ? std::stod(m[3].str()) : 1.0;
        return {std::stod(m[1].str()), m[2].str() == "-" ? -mag : mag};
    }
    throw InvalidInput("cannot parse complex number '" + text + "'");
}

// ---------------------------------------------------------------- tolerance names

namespace {

const std::map<std::string, double Tolerances::*>& tolerance_fields() {
    static const std::map<std::string, double Tolerances::*> fields = {
        {"hermitian_input", &Tolerances::hermitian_input},
        {"jacobi_offdiag", &Tolerances::jacobi_offdiag},
        {"eigpair_residual", &Tolerances::eigpair_residual},
        {"root_tie", &Tolerances::root_tie},
        {"root_pin", &Tolerances::root_pin},
        {"model_hermitian", &Tolerances::model_hermitian},
        {"rhs_forms", &Tolerances::rhs_forms},
        {"seed_structure", &Tolerances::seed_structure},
        {"pure_state_norm", &Tolerances::pure_state_norm},
        {"residual_floor", &Tolerances::residual_floor},
        {"residual_stencil_constant", &Tolerances::residual_stencil_constant},
        {"lax_initial", &Tolerances::lax_initial},
        {"lax_persistence", &Tolerances::lax_persistence},
        {"overlap", &Tolerances::overlap},
        {"idempotency", &Tolerances::idempotency},
        {"trace_P", &Tolerances::trace_P},
        {"form_gap", &Tolerances::form_gap},
        {"bridge", &Tolerances::bridge},
        {"exp_identity", &Tolerances::exp_identity},
        {"unitarity", &Tolerances::unitarity},
        {"singular_F", &Tolerances::singular_F},
        {"spectrum", &Tolerances::spectrum},
        {"moments", &Tolerances::moments},
        {"hermiticity", &Tolerances::hermiticity},
        {"trace", &Tolerances::trace},
        {"positivity", &Tolerances::positivity},
        {"covariance_eigen", &Tolerances::covariance_eigen},
        {"covariance_time", &Tolerances::covariance_time},
        {"explicit_vs_general", &Tolerances::explicit_vs_general},
        {"state_consistency", &Tolerances::state_consistency},
        {"mode_consistency", &Tolerances::mode_consistency},
        {"rk4_norm_limit", &Tolerances::rk4_norm_limit},
    };
    return fields;
}

const std::map<std::string, bool SuiteOptions::*>& check_fields() {
    static const std::map<std::string, bool SuiteOptions::*> fields = {
        {"residual", &SuiteOptions::residual},
        {"state_consistency", &SuiteOptions::state_consistency},
        {"spectrum", &SuiteOptions::spectrum},
        {"hermiticity", &SuiteOptions::hermiticity},
        {"trace", &SuiteOptions::trace},
        {"positivity", &SuiteOptions::positivity},
        {"idempotency", &SuiteOptions::idempotency},
        {"form_gap", &SuiteOptions::form_gap},
        {"bridge", &SuiteOptions::bridge},
        {"unitarity", &SuiteOptions::unitarity},
        {"mode_consistency", &SuiteOptions::mode_consistency},
        {"lax_relation", &SuiteOptions::lax_relation},
        {"covariance", &SuiteOptions::covariance},
        {"explicit_eavn", &SuiteOptions::explicit_eavn},
    };
    return fields;
}

// ---------------------------------------------------------------- schema helpers

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) {
    return path + "/" + std::to_string(index);
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
        const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; });
        if (!known) throw SchemaError(child(path, k), "unknown field");
    }
}

const json& required(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) throw SchemaError(child(path, key), "required field is missing");
    return obj.at(key);
}

double get_real(const json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw SchemaError(path, "expected a finite number");
    return x;
}

int get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
    return v.get<int>();
}

bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw SchemaError(path, "expected true or false");
    return v.get<bool>();
}

Complex get_complex(const json& v, const std::string& path) {
    if (v.is_number()) return {get_real(v, path), 0.0};
    if (v.is_string()) {
        try {
            return parse_complex(v.get<std::string>());
        } catch (const InvalidInput& e) {
            throw SchemaError(path, e.what());
        }
    }
    if (v.is_array() && v.size() == 2) {
        return {get_real(v[0], child(path, 0)), get_real(v[1], child(path, 1))};
    }
    throw SchemaError(path, "expected a complex number [re, im]");
}

std::vector<double> get_real_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw SchemaError(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_real(v[i], child(path, i)));
    return out;
}

StateVector get_vector(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw SchemaError(path, "expected a non-empty array");
    StateVector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = get_complex(v[i], child(path, i));
    }
    return out;
}

OperatorMatrix get_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw SchemaError(path, "expected an array of rows");
    const std::size_t n = v.size();
    OperatorMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const std::string rp = child(path, r);
        if (!v[r].is_array() || v[r].size() != n) {
            throw SchemaError(rp, "expected a row of " + std::to_string(n) + " entries");
        }
        for (std::size_t c = 0; c < n; ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                get_complex(v[r][c], child(rp, c));
        }
    }
    return out;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const OperatorMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const StateVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
    return out;
}

json number_json(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

std::string order_name(SymmetryOrder order) {
    return order == SymmetryOrder::ShiftThenDress ? "shift_then_dress" : "dress_then_shift";
}

// ---------------------------------------------------------------- section parsers

ModelConfig parse_model(const json& j, const std::string& path, SeedFamily family) {
    only_keys(j, path, {"n", "A"});
    ModelConfig m;
    m.n = get_int(required(j, path, "n"), child(path, "n"));
    if (m.n < 1) throw SchemaError(child(path, "n"), "n must be at least 1");
    if (family == SeedFamily::DeltaCommuting) {
        if (m.n != 1) throw SchemaError(child(path, "n"), "delta_commuting seeds require n = 1");
        if (j.contains("A")) {
            throw SchemaError(child(path, "A"),
                              "delta_commuting seeds build H from seed/blocks; omit A");
        }
        return m;
    }
    const std::string ap = child(path, "A");
    const json& a = required(j, path, "A");
    only_keys(a, ap, {"pairs", "diag", "matrix"});
    if (a.size() != 1) throw SchemaError(ap, "give exactly one of pairs, diag, matrix");
    if (a.contains("pairs")) {
        m.kind = ASpecKind::Pairs;
        m.pairs = get_real_list(a["pairs"], child(ap, "pairs"));
    } else if (a.contains("diag")) {
        m.kind = ASpecKind::Diag;
        const std::vector<double> d = get_real_list(a["diag"], child(ap, "diag"));
        m.matrix = diag(std::vector<Complex>(d.begin(), d.end()));
    } else {
        m.kind = ASpecKind::Matrix;
        m.matrix = get_matrix(a["matrix"], child(ap, "matrix"));
    }
    if (family == SeedFamily::Anticommuting && m.kind != ASpecKind::Pairs) {
        throw SchemaError(ap, "anticommuting seeds require A given as pairs");
    }
    return m;
}

SeedConfig parse_seed(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    SeedConfig s;
    const std::string fp = child(path, "family");
    const json& fam = required(j, path, "family");
    if (!fam.is_string()) throw SchemaError(fp, "expected a string");
    try {
        s.family = seed_family_from_string(fam.get<std::string>());
    } catch (const VneError& e) {
        throw SchemaError(fp, e.what());
    }
    switch (s.family) {
        case SeedFamily::Anticommuting:
            only_keys(j, path, {"family", "couplings"});
            s.couplings = get_real_list(required(j, path, "couplings"), child(path, "couplings"));
            break;
        case SeedFamily::DeltaCommuting: {
            only_keys(j, path, {"family", "a", "blocks"});
            s.a = get_real(required(j, path, "a"), child(path, "a"));
            const std::string bp = child(path, "blocks");
            const json& blocks = required(j, path, "blocks");
            if (!blocks.is_array() || blocks.empty()) {
                throw SchemaError(bp, "expected a non-empty array of blocks");
            }
            for (std::size_t i = 0; i < blocks.size(); ++i) {
                const std::string ip = child(bp, i);
                only_keys(blocks[i], ip, {"omega", "kappa"});
                DeltaBlock b;
                b.omega = get_real(required(blocks[i], ip, "omega"), child(ip, "omega"));
                b.kappa = get_real(required(blocks[i], ip, "kappa"), child(ip, "kappa"));
                s.blocks.push_back(b);
            }
            break;
        }
        case SeedFamily::PureState:
            only_keys(j, path, {"family", "psi"});
            s.psi = get_vector(required(j, path, "psi"), child(path, "psi"));
            break;
        case SeedFamily::Commuting:
            only_keys(j, path, {"family", "rho"});
            s.rho = get_matrix(required(j, path, "rho"), child(path, "rho"));
            break;
        case SeedFamily::Frame:
            throw SchemaError(fp, "frame seeds arise from symmetries and cannot be configured");
    }
    return s;
}

DarbouxConfig parse_darboux(const json& j, const std::string& path) {
    only_keys(j, path, {"mu", "nu", "lambda", "pin"});
    DarbouxConfig d;
    d.mu = get_complex(required(j, path, "mu"), child(path, "mu"));
    if (d.mu == Complex(0.0)) throw SchemaError(child(path, "mu"), "mu must be nonzero");
    if (j.contains("nu")) {
        const json& nu = j["nu"];
        const std::string np = child(path, "nu");
        if (nu.is_string() && nu.get<std::string>() == "conjugate") {
            d.nu.reset();
        } else if (nu.is_object()) {
            only_keys(nu, np, {"explicit"});
            d.nu = get_complex(required(nu, np, "explicit"), child(np, "explicit"));
            if (*d.nu == Complex(0.0)) throw SchemaError(child(np, "explicit"), "nu must be nonzero");
        } else {
            throw SchemaError(np, "expected \"conjugate\" or {\"explicit\": [re, im]}");
        }
    }
    if (j.contains("lambda") && !j["lambda"].is_null()) {
        d.lambda = get_complex(j["lambda"], child(path, "lambda"));
        if (*d.lambda == d.mu) throw SchemaError(child(path, "lambda"), "lambda must differ from mu");
    }
    if (j.contains("pin")) {
        const std::string pp = child(path, "pin");
        const json& pin = j["pin"];
        only_keys(pin, pp, {"z_mu", "z_nu", "z_lambda"});
        if (pin.contains("z_mu")) d.pin_z_mu = get_complex(pin["z_mu"], child(pp, "z_mu"));
        if (pin.contains("z_nu")) d.pin_z_nu = get_complex(pin["z_nu"], child(pp, "z_nu"));
        if (pin.contains("z_lambda")) {
            d.pin_z_lambda = get_complex(pin["z_lambda"], child(pp, "z_lambda"));
        }
    }
    return d;
}

TimeGrid parse_times(const json& j, const std::string& path) {
    only_keys(j, path, {"t_min", "t_max", "samples"});
    TimeGrid g;
    g.t_min = get_real(required(j, path, "t_min"), child(path, "t_min"));
    g.t_max = get_real(required(j, path, "t_max"), child(path, "t_max"));
    g.samples = get_int(required(j, path, "samples"), child(path, "samples"));
    if (g.samples < 2) throw SchemaError(child(path, "samples"), "samples must be at least 2");
    if (!(g.t_max > g.t_min)) throw SchemaError(child(path, "t_max"), "t_max must exceed t_min");
    return g;
}

SymmetryConfig parse_symmetries(const json& j, const std::string& path) {
    only_keys(j, path, {"shift", "rescale", "normalize_density", "margin", "order"});
    SymmetryConfig s;
    if (j.contains("shift")) s.shift = get_real(j["shift"], child(path, "shift"));
    if (j.contains("rescale")) {
        s.rescale = get_real(j["rescale"], child(path, "rescale"));
        if (*s.rescale == 0.0) throw SchemaError(child(path, "rescale"), "Y must be nonzero");
    }
    if (j.contains("normalize_density")) {
        s.normalize_density = get_bool(j["normalize_density"], child(path, "normalize_density"));
    }
    if (j.contains("margin")) s.margin = get_real(j["margin"], child(path, "margin"));
    if (s.normalize_density && (s.shift || s.rescale)) {
        throw SchemaError(child(path, "normalize_density"),
                          "normalize_density derives shift and rescale; do not give them");
    }
    if (j.contains("order")) {
        const std::string op = child(path, "order");
        if (!j["order"].is_string()) throw SchemaError(op, "expected a string");
        const std::string o = j["order"].get<std::string>();
        if (o == "shift_then_dress") s.order = SymmetryOrder::ShiftThenDress;
        else if (o == "dress_then_shift") s.order = SymmetryOrder::DressThenShift;
        else throw SchemaError(op, "expected shift_then_dress or dress_then_shift");
    }
    return s;
}

}  // namespace

std::vector<double> TimeGrid::points() const {
    std::vector<double> out(static_cast<std::size_t>(samples));
    const double step = (t_max - t_min) / static_cast<double>(samples - 1);
    for (int i = 0; i < samples; ++i) out[static_cast<std::size_t>(i)] = t_min + step * i;
    out.back() = t_max;
    return out;
}

ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("/", std::string("malformed JSON: ") + e.what());
    }
    only_keys(j, "", {"id", "model", "seed", "darboux", "times", "symmetries", "checks",
                      "tolerances", "residual_step", "resolved"});
    ScenarioConfig c;
    const json& id = required(j, "", "id");
    if (!id.is_string() || id.get<std::string>().empty()) {
        throw SchemaError("/id", "expected a non-empty string");
    }
    c.id = id.get<std::string>();
    c.seed = parse_seed(required(j, "", "seed"), "/seed");
    c.model = parse_model(required(j, "", "model"), "/model", c.seed.family);
    c.darboux = parse_darboux(required(j, "", "darboux"), "/darboux");
    c.times = parse_times(required(j, "", "times"), "/times");
    if (j.contains("symmetries")) c.symmetries = parse_symmetries(j["symmetries"], "/symmetries");
    if (j.contains("checks")) {
        if (!j["checks"].is_object()) throw SchemaError("/checks", "expected an object");
        for (const auto& [k, v] : j["checks"].items()) {
            if (!check_fields().count(k)) throw SchemaError("/checks/" + k, "unknown check");
            c.checks[k] = get_bool(v, "/checks/" + k);
        }
    }
    if (j.contains("tolerances")) {
        if (!j["tolerances"].is_object()) throw SchemaError("/tolerances", "expected an object");
        for (const auto& [k, v] : j["tolerances"].items()) {
            if (!tolerance_fields().count(k)) throw SchemaError("/tolerances/" + k, "unknown tolerance");
            c.tolerances[k] = get_real(v, "/tolerances/" + k);
        }
    }
    if (j.contains("residual_step")) {
        c.residual_step = get_real(j["residual_step"], "/residual_step");
        if (c.residual_step < 0.0) throw SchemaError("/residual_step", "must be non-negative");
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("/", "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

json config_json(const ScenarioConfig& c) {
    json j;
    j["id"] = c.id;
    json model;
    model["n"] = c.model.n;
    switch (c.model.kind) {
        case ASpecKind::None:
            break;
        case ASpecKind::Pairs:
            model["A"] = {{"pairs", c.model.pairs}};
            break;
        case ASpecKind::Diag: {
            std::vector<double> d;
            for (Eigen::Index i = 0; i < c.model.matrix.rows(); ++i) d.push_back(c.model.matrix(i, i).real());
            model["A"] = {{"diag", d}};
            break;
        }
        case ASpecKind::Matrix:
            model["A"] = {{"matrix", matrix_json(c.model.matrix)}};
            break;
    }
    j["model"] = model;
    json seed;
    seed["family"] = to_string(c.seed.family);
    switch (c.seed.family) {
        case SeedFamily::Anticommuting:
            seed["couplings"] = c.seed.couplings;
            break;
        case SeedFamily::DeltaCommuting: {
            seed["a"] = c.seed.a;
            json blocks = json::array();
            for (const DeltaBlock& b : c.seed.blocks) blocks.push_back({{"omega", b.omega}, {"kappa", b.kappa}});
            seed["blocks"] = blocks;
            break;
        }
        case SeedFamily::PureState:
            seed["psi"] = vector_json(c.seed.psi);
            break;
        case SeedFamily::Commuting:
            seed["rho"] = matrix_json(c.seed.rho);
            break;
        case SeedFamily::Frame:
            break;
    }
    j["seed"] = seed;
    json d;
    d["mu"] = complex_json(c.darboux.mu);
    if (c.darboux.nu) d["nu"] = {{"explicit", complex_json(*c.darboux.nu)}};
    else d["nu"] = "conjugate";
    if (c.darboux.lambda) d["lambda"] = complex_json(*c.darboux.lambda);
    json pin = json::object();
    if (c.darboux.pin_z_mu) pin["z_mu"] = complex_json(*c.darboux.pin_z_mu);
    if (c.darboux.pin_z_nu) pin["z_nu"] = complex_json(*c.darboux.pin_z_nu);
    if (c.darboux.pin_z_lambda) pin["z_lambda"] = complex_json(*c.darboux.pin_z_lambda);
    if (!pin.empty()) d["pin"] = pin;
    j["darboux"] = d;
    j["times"] = {{"t_min", c.times.t_min}, {"t_max", c.times.t_max}, {"samples", c.times.samples}};
    const SymmetryConfig& s = c.symmetries;
    if (s.any()) {
        json sym;
        if (s.shift) sym["shift"] = *s.shift;
        if (s.rescale) sym["rescale"] = *s.rescale;
        if (s.normalize_density) {
            sym["normalize_density"] = true;
            sym["margin"] = s.margin;
        }
        sym["order"] = order_name(s.order);
        j["symmetries"] = sym;
    }
    if (!c.checks.empty()) j["checks"] = c.checks;
    if (!c.tolerances.empty()) j["tolerances"] = c.tolerances;
    if (c.residual_step > 0.0) j["residual_step"] = c.residual_step;
    return j;
}

}  // namespace

std::string config_to_json(const ScenarioConfig& config) { return config_json(config).dump(2); }

Tolerances resolve_tolerances(const ScenarioConfig& config, double tol_scale) {
    if (!(tol_scale > 0.0) || !std::isfinite(tol_scale)) {
        throw SchemaError("--tol-scale", "must be a positive number");
    }
    Tolerances tol = default_tolerances();
    for (const auto& [name, value] : config.tolerances) tol.*(tolerance_fields().at(name)) = value;
    return tol_scale == 1.0 ? tol : tol.scaled(tol_scale);
}

namespace {

OperatorMatrix model_matrix(const ModelConfig& m) {
    if (m.kind != ASpecKind::Pairs) return m.matrix;
    std::vector<Complex> d;
    for (double a : m.pairs) {
        d.emplace_back(a);
        d.emplace_back(-a);
    }
    return diag(d);
}

}  // namespace

SeedSolution build_seed(const ScenarioConfig& config, const Tolerances& tol) {
    const SeedConfig& s = config.seed;
    switch (s.family) {
        case SeedFamily::Anticommuting:
            if (s.couplings.size() != config.model.pairs.size()) {
                throw SchemaError("/seed/couplings", "need one coupling per A pair");
            }
            return make_anticommuting_seed(config.model.n, config.model.pairs, s.couplings, tol);
        case SeedFamily::DeltaCommuting:
            return make_delta_commuting_seed(s.blocks, s.a, tol);
        case SeedFamily::PureState: {
            const ModelSpec spec(config.model.n, model_matrix(config.model), tol);
            if (s.psi.size() != spec.dim()) throw SchemaError("/seed/psi", "length does not match A");
            return make_pure_state_seed(spec, s.psi, tol);
        }
        case SeedFamily::Commuting: {
            const ModelSpec spec(config.model.n, model_matrix(config.model), tol);
            if (s.rho.rows() != spec.dim()) throw SchemaError("/seed/rho", "dimension does not match A");
            return make_commuting_seed(spec, s.rho, tol);
        }
        case SeedFamily::Frame:
            break;
    }
    throw SchemaError("/seed/family", "unsupported family");
}

ScenarioConfig with_sweep_value(const ScenarioConfig& config, const std::string& param,
                                const std::string& value) {
    ScenarioConfig out = config;
    try {
        if (param == "mu") {
            out.darboux.mu = parse_complex(value);
            if (out.darboux.mu == Complex(0.0)) throw SchemaError("/darboux/mu", "mu must be nonzero");
            out.darboux.pin_z_mu.reset();
            out.darboux.pin_z_nu.reset();
            if (out.darboux.lambda && *out.darboux.lambda == out.darboux.mu) {
                throw SchemaError("/darboux/lambda", "lambda must differ from mu");
            }
        } else if (param == "t_max") {
            const Complex v = parse_complex(value);
            if (v.imag() != 0.0) throw SchemaError("/times/t_max", "must be real");
            out.times.t_max = v.real();
            if (!(out.times.t_max > out.times.t_min)) {
                throw SchemaError("/times/t_max", "t_max must exceed t_min");
            }
        } else if (param == "a") {
            if (config.seed.family != SeedFamily::DeltaCommuting) {
                throw SchemaError("/seed/a", "sweeping a requires a delta_commuting seed");
            }
            const Complex v = parse_complex(value);
            if (v.imag() != 0.0) throw SchemaError("/seed/a", "must be real");
            out.seed.a = v.real();
            out.darboux.pin_z_mu.reset();
            out.darboux.pin_z_nu.reset();
            out.darboux.pin_z_lambda.reset();
        } else {
            throw SchemaError("--param", "expected mu, t_max or a");
        }
    } catch (const InvalidInput& e) {
        throw SchemaError("--values", e.what());
    }
    return out;
}

// ---------------------------------------------------------------- pipeline

namespace {

SuiteOptions suite_options(const ScenarioConfig& config, const Tolerances& tol) {
    SuiteOptions o;
    o.scenario_id = config.id;
    o.tol = tol;
    o.residual_step = config.residual_step;
    for (const auto& [name, on] : config.checks) o.*(check_fields().at(name)) = on;
    return o;
}

RhoAt compose_symmetries(const ModelSpec& spec, RhoAt rho_at, const SymmetryConfig& s,
                         const Tolerances& tol) {
    if (s.shift) rho_at = shifted(spec, std::move(rho_at), ShiftSpec::scalar(*s.shift, spec.dim()), tol);
    if (s.rescale) rho_at = rescaled(std::move(rho_at), *s.rescale);
    return rho_at;
}

// Transformed trajectory of a dressed one; checks on it carry a prefix.
Trajectory transformed_trajectory(const Trajectory& base, const SymmetryConfig& s,
                                  const Tolerances& tol) {
    Trajectory out;
    out.label = base.label + "/transformed";
    out.spec = base.spec;
    out.seed = base.seed;
    out.hermitian_mode = base.hermitian_mode;
    out.rho_at = compose_symmetries(*base.spec, base.rho_at, s, tol);
    const double lambda = s.shift.value_or(0.0);
    const double y = s.rescale.value_or(1.0);
    out.reference = y * (base.reference + lambda * identity(base.reference.rows()));
    for (double t : base.times) {
        try {
            out.states.push_back(out.rho_at(t));
            out.times.push_back(t);
        } catch (const SingularDarboux& e) {
            out.singular_time = e.time();
            out.singular_message = e.what();
            break;
        }
    }
    if (!out.singular_time && base.singular_time) {
        out.singular_time = base.singular_time;
        out.singular_message = base.singular_message;
    }
    return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, double tol_scale) {
    const Tolerances tol = resolve_tolerances(config, tol_scale);
    ScenarioResult result;
    result.resolved = config;
    SymmetryConfig& sym = result.resolved.symmetries;

    SeedSolution seed = build_seed(config, tol);
    if (sym.normalize_density) {
        const DensityNormalization dn =
            normalize_to_density(seed.evolution(), seed.spec, sym.margin, tol);
        sym.normalize_density = false;
        sym.shift = dn.lambda;
        sym.rescale = dn.Y;
    }
    if (sym.order == SymmetryOrder::ShiftThenDress) {
        if (sym.shift) seed = shift_seed(seed, *sym.shift, tol);
        if (sym.rescale) seed = rescale_seed(seed, *sym.rescale, tol);
    }
    result.seed = std::make_shared<const SeedSolution>(std::move(seed));

    LaxRequest request;
    request.mu = config.darboux.mu;
    request.nu = config.darboux.nu;
    request.lambda = config.darboux.lambda;
    request.pin_z_mu = config.darboux.pin_z_mu;
    request.pin_z_nu = config.darboux.pin_z_nu;
    request.pin_z_lambda = config.darboux.pin_z_lambda;
    result.lax = std::make_shared<const LaxSolution>(LaxSolution::solve(result.seed, request, tol));
    const DarbouxParams& p = result.lax->params();
    result.resolved.darboux.pin_z_mu = p.z_mu;
    result.resolved.darboux.pin_z_nu = p.z_nu;
    if (p.z_lambda) result.resolved.darboux.pin_z_lambda = *p.z_lambda;

    TrajectoryOptions topts;
    topts.tol = tol;
    topts.residual_step = config.residual_step;
    Trajectory dressed = dressed_trajectory(result.lax, config.times.points(), topts);

    SuiteOptions opts = suite_options(config, tol);
    const bool after = sym.order == SymmetryOrder::DressThenShift && sym.any();
    if (after) {
        opts.shift_lambda = sym.shift;
        opts.rescale_y = sym.rescale;
    }
    result.report = run_suite(dressed, opts);
    if (after) {
        Trajectory moved = transformed_trajectory(dressed, sym, tol);
        SuiteOptions mopts = suite_options(config, tol);
        VerificationReport extra = run_suite(moved, mopts);
        for (CheckResult c : extra.checks) {
            if (c.name == "nonsingular") continue;
            c.name = "transformed_" + c.name;
            result.report.checks.push_back(c);
            if (!c.pass) result.report.overall = false;
        }
        result.trajectory = std::move(moved);
        result.trajectory.diagnostics.clear();
    } else {
        result.trajectory = std::move(dressed);
    }

    if (result.trajectory.singular_time) {
        result.exit_code = kExitSingular;
        std::ostringstream msg;
        msg.precision(17);
        msg << "singular Darboux transformation at t = " << *result.trajectory.singular_time
            << ": " << result.trajectory.singular_message;
        result.message = msg.str();
    } else if (!result.report.overall) {
        result.exit_code = kExitCheckFailed;
        std::string failed;
        for (const CheckResult& c : result.report.checks) {
            if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
        }
        result.message = "checks failed: " + failed;
    } else {
        result.message = "all checks passed";
    }
    return result;
}

// ---------------------------------------------------------------- output

namespace {

void put(std::ostream& out, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
}

void put_opt(std::ostream& out, const std::optional<double>& x) {
    if (x) put(out, *x);
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const Eigen::Index dim = traj.states.empty() ? traj.reference.rows() : traj.states.front().rows();
    out << "t";
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) out << ",re_" << r << '_' << c << ",im_" << r << '_' << c;
    out << ",hermiticity_gap,min_eig,phi_norm,F_re,F_im,idempotency_gap,trace_P_gap,form_gap,"
           "bridge_gap,unitarity_gap,projector_rate,residual\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        put(out, traj.times[i]);
        const OperatorMatrix& m = traj.states[i];
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                out << ',';
                put(out, m(r, c).real());
                out << ',';
                put(out, m(r, c).imag());
            }
        }
        if (i < traj.diagnostics.size()) {
            const SampleDiagnostics& d = traj.diagnostics[i];
            out << ',';
            put(out, d.hermiticity_gap);
            out << ',';
            put_opt(out, d.min_eig);
            out << ',';
            put(out, d.phi_norm);
            out << ',';
            if (d.F_value) put(out, d.F_value->real());
            out << ',';
            if (d.F_value) put(out, d.F_value->imag());
            for (double v : {d.idempotency_gap, d.trace_P_gap, d.form_gap, d.bridge_gap}) {
                out << ',';
                put(out, v);
            }
            out << ',';
            put_opt(out, d.unitarity_gap);
            out << ',';
            put(out, d.projector_rate);
            out << ',';
            if (d.residual) put(out, d.residual->residual_norm);
        } else {
            out << ",,,,,,,,,,,,";
        }
        out << '\n';
    }
}

CsvTrajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("trajectory csv: empty input");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    std::size_t entries = 0;
    for (const std::string& h : header)
        if (h.rfind("re_", 0) == 0) ++entries;
    const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(entries))));
    if (dim * dim != static_cast<Eigen::Index>(entries) || header.empty() || header[0] != "t") {
        throw InvalidInput("trajectory csv: unexpected header");
    }
    CsvTrajectory out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 1 + 2 * entries) throw InvalidInput("trajectory csv: short row");
        out.times.push_back(std::strtod(cells[0].c_str(), nullptr));
        OperatorMatrix m(dim, dim);
        std::size_t k = 1;
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index c = 0; c < dim; ++c, k += 2) {
                m(r, c) = Complex(std::strtod(cells[k].c_str(), nullptr),
                                  std::strtod(cells[k + 1].c_str(), nullptr));
            }
        }
        out.states.push_back(std::move(m));
    }
    return out;
}

std::string report_to_json(const ScenarioResult& result) {
    json j;
    j["scenario_id"] = result.report.scenario_id;
    j["overall"] = result.report.overall;
    j["exit_code"] = result.exit_code;
    j["message"] = result.message;
    const SymmetryConfig& s = result.resolved.symmetries;
    if (s.any()) j["symmetry_order"] = order_name(s.order);
    if (result.trajectory.singular_time) j["singular_time"] = *result.trajectory.singular_time;
    json checks = json::array();
    for (const CheckResult& c : result.report.checks) {
        json e;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["worst_value"] = number_json(c.worst_value);
        e["tolerance"] = c.tolerance;
        e["location"] = c.location ? json(*c.location) : json(nullptr);
        if (!c.note.empty()) e["note"] = c.note;
        checks.push_back(e);
    }
    j["checks"] = checks;
    return j.dump(2);
}

std::string lock_to_json(const ScenarioResult& result) {
    json j = config_json(result.resolved);
    json resolved;
    if (result.seed) {
        resolved["seed_family"] = to_string(result.seed->family);
        resolved["A"] = matrix_json(result.seed->spec.A());
        resolved["rho0"] = matrix_json(result.seed->rho0);
        resolved["frame"] = matrix_json(result.seed->frame);
        if (result.seed->family == SeedFamily::DeltaCommuting) resolved["a"] = result.seed->a;
    }
    if (result.lax) {
        const DarbouxParams& p = result.lax->params();
        resolved["nu"] = complex_json(p.nu);
        resolved["hermitian_mode"] = p.hermitian_mode;
        resolved["phi0"] = vector_json(result.lax->phi0());
        resolved["chi0"] = vector_json(result.lax->chi0());
        if (result.lax->psi0()) resolved["psi0"] = vector_json(*result.lax->psi0());
    }
    j["resolved"] = resolved;
    return j.dump(2);
}

void write_file_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cannot write " + tmp);
        out << text;
        if (!out.flush()) throw InvalidInput("cannot write " + tmp);
    }
    fs::rename(tmp, path);
}

void write_outputs(const ScenarioResult& result, const std::string& dir) {
    fs::create_directories(dir);
    std::ostringstream csv;
    write_trajectory_csv(csv, result.trajectory);
    write_file_atomic((fs::path(dir) / "trajectory.csv").string(), csv.str());
    write_file_atomic((fs::path(dir) / "report.json").string(), report_to_json(result) + "\n");
    write_file_atomic((fs::path(dir) / "scenario.lock.json").string(), lock_to_json(result) + "\n");
}

// ---------------------------------------------------------------- commands

namespace {

struct PointOutcome {
    int exit_code = kExitPass;
    std::string message;
    std::optional<ScenarioResult> result;
};

PointOutcome run_point(const ScenarioConfig& config, double tol_scale, const std::string& out_dir) {
    PointOutcome o;
    try {
        ScenarioResult r = run_scenario(config, tol_scale);
        write_outputs(r, out_dir);
        o.exit_code = r.exit_code;
        o.message = r.message;
        o.result = std::move(r);
    } catch (const SchemaError& e) {
        o.exit_code = kExitSchema;
        o.message = std::string("schema error: ") + e.what();
    } catch (const SingularDarboux& e) {
        o.exit_code = kExitSingular;
        o.message = "singular Darboux transformation at t = " + std::to_string(e.time()) + ": " + e.what();
    } catch (const InvalidInput& e) {
        o.exit_code = kExitSchema;
        o.message = std::string("invalid scenario: ") + e.what();
    } catch (const DimensionMismatch& e) {
        o.exit_code = kExitSchema;
        o.message = std::string("invalid scenario: ") + e.what();
    } catch (const UnsupportedScenario& e) {
        o.exit_code = kExitSchema;
        o.message = std::string("unsupported scenario: ") + e.what();
    } catch (const VneError& e) {
        o.exit_code = kExitCheckFailed;
        o.message = std::string("numerical failure: ") + e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        o.exit_code = kExitSchema;
        o.message = std::string("cannot write outputs: ") + e.what();
    }
    return o;
}

void dump_matrix(std::ostream& out, const char* name, const OperatorMatrix& m) {
    out << name << " =\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out << "  ";
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            char buf[80];
            std::snprintf(buf, sizeof buf, "%s(%.17g, %.17g)", c ? " " : "", m(r, c).real(), m(r, c).imag());
            out << buf;
        }
        out << '\n';
    }
}

double worst_of(const ScenarioResult& r, std::initializer_list<const char*> names) {
    double w = 0.0;
    bool any = false;
    for (const char* n : names) {
        if (const CheckResult* c = r.report.find(n)) {
            w = std::max(w, c->worst_value);
            any = true;
        }
    }
    return any ? w : std::nan("");
}

}  // namespace

int run_command(const std::string& config_path, const std::string& out_dir,
                const RunOptions& options, std::ostream& out, std::ostream& err) {
    ScenarioConfig config;
    try {
        config = load_config(config_path);
        resolve_tolerances(config, options.tol_scale);
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kExitSchema;
    }
    const PointOutcome o = run_point(config, options.tol_scale, out_dir);
    if (options.seed_dump && o.result && o.result->seed) {
        out << "seed family: " << to_string(o.result->seed->family) << '\n';
        dump_matrix(out, "A", o.result->seed->spec.A());
        dump_matrix(out, "rho0", o.result->seed->rho0);
    }
    (o.exit_code == kExitPass ? out : err) << config.id << ": " << o.message << '\n';
    return o.exit_code;
}

int sweep_command(const std::string& config_path, const std::string& param,
                  const std::vector<std::string>& values, const std::string& out_dir,
                  const SweepOptions& options, std::ostream& out, std::ostream& err) {
    ScenarioConfig base;
    std::vector<ScenarioConfig> points;
    try {
        if (values.empty()) throw SchemaError("--values", "at least one value is required");
        if (options.jobs < 1) throw SchemaError("--jobs", "must be at least 1");
        base = load_config(config_path);
        resolve_tolerances(base, options.tol_scale);
        for (const std::string& v : values) points.push_back(with_sweep_value(base, param, v));
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kExitSchema;
    }

    std::vector<PointOutcome> outcomes(points.size());
    std::vector<std::string> dirs(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu", i);
        dirs[i] = (fs::path(out_dir) / name).string();
        points[i].id = base.id + "/" + param + "=" + values[i];
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            outcomes[i] = run_point(points[i], options.tol_scale, dirs[i]);
        }
    };
    const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(options.jobs), points.size());
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    std::ostringstream csv;
    csv << "index,param,value,exit_code,overall,worst_residual,worst_spectrum,singular_time,directory\n";
    int code = kExitPass;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const PointOutcome& o = outcomes[i];
        code = std::max(code, o.exit_code);
        csv << i << ',' << param << ",\"" << values[i] << "\"," << o.exit_code << ','
            << (o.exit_code == kExitPass ? "true" : "false") << ',';
        if (o.result) {
            put(csv, worst_of(*o.result, {"residual"}));
            csv << ',';
            put(csv, worst_of(*o.result, {"spectrum"}));
            csv << ',';
            if (o.result->trajectory.singular_time) put(csv, *o.result->trajectory.singular_time);
        } else {
            csv << ",,";
        }
        csv << ',' << fs::path(dirs[i]).filename().string() << '\n';
        (o.exit_code == kExitPass ? out : err) << points[i].id << ": " << o.message << '\n';
    }
    fs::create_directories(out_dir);
    write_file_atomic((fs::path(out_dir) / "summary.csv").string(), csv.str());
    return code;
}

}  // namespace vne
