#include "spde/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spde/errors.hpp"
#include "spde/mollifier.hpp"

namespace spde {

using nlohmann::json;

namespace {

const json& require(const json& node, const std::string& key,
                    const std::string& path) {
    auto it = node.find(key);
    if (it == node.end())
        throw ConfigError("missing required key \"" + path + "\"", path);
    return *it;
}

double require_number(const json& node, const std::string& key,
                      const std::string& path) {
    const json& v = require(node, key, path);
    if (!v.is_number())
        throw ConfigError("key \"" + path + "\" must be a number", path);
    return v.get<double>();
}

double number_or(const json& node, const std::string& key, double fallback) {
    auto it = node.find(key);
    return (it == node.end()) ? fallback : it->get<double>();
}

std::string string_or(const json& node, const std::string& key,
                      const std::string& fallback) {
    auto it = node.find(key);
    return (it == node.end()) ? fallback : it->get<std::string>();
}

ProfileSpec parse_profile(const json& node, const std::string& path) {
    ProfileSpec p;
    p.kind = string_or(node, "kind", "zero");
    if (p.kind != "gaussian" && p.kind != "cosine" && p.kind != "spike" &&
        p.kind != "tabulated" && p.kind != "zero")
        throw ConfigError("unknown profile kind \"" + p.kind + "\" at " + path,
                          path + ".kind");
    p.amplitude = number_or(node, "amplitude", 1.0);
    p.center = number_or(node, "center", 0.0);
    p.width = number_or(node, "width", 0.5);
    p.mode = static_cast<int>(number_or(node, "mode", 1));
    p.epsilon = number_or(node, "epsilon", 0.05);
    if (node.contains("values"))
        p.values = node["values"].get<std::vector<double>>();
    if (p.kind == "tabulated" && p.values.empty())
        throw ConfigError("tabulated profile needs \"values\" at " + path,
                          path + ".values");
    return p;
}

json profile_to_json(const ProfileSpec& p) {
    json node{{"kind", p.kind},       {"amplitude", p.amplitude},
              {"center", p.center},   {"width", p.width},
              {"mode", p.mode},       {"epsilon", p.epsilon}};
    if (!p.values.empty()) node["values"] = p.values;
    return node;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("config is not valid JSON: ") + err.what());
    }

    ExperimentConfig c;
    const json& grid = require(root, "grid", "grid");
    c.grid_half_length = require_number(grid, "L", "grid.L");
    c.grid_points = static_cast<int>(require_number(grid, "n", "grid.n"));

    const json& time = require(root, "time", "time");
    c.time_horizon = require_number(time, "T", "time.T");
    c.dt = require_number(time, "dt", "time.dt");
    c.stride = static_cast<int>(number_or(time, "stride", 1.0));
    if (!(c.dt > 0.0)) throw ConfigError("time.dt must be positive", "time.dt");
    if (c.stride < 1) throw ConfigError("time.stride must be >= 1", "time.stride");
    const double steps = c.time_horizon / c.dt;
    if (std::abs(steps - std::llround(steps)) > 1e-12 * std::max(1.0, steps))
        throw ConfigError("time.dt must divide time.T", "time.dt");

    const json& eq = require(root, "equation", "equation");
    const std::string kind = require(eq, "kind", "equation.kind").get<std::string>();
    if (kind == "FP") {
        c.equation = EquationKind::fokker_planck;
        const json& a = require(eq, "a", "equation.a");
        c.diffusion.kind = string_or(a, "kind", "constant");
        c.diffusion.value = require_number(a, "value", "equation.a.value");
        c.diffusion.lo = number_or(a, "lo", -0.5 * c.grid_half_length);
        c.diffusion.hi = number_or(a, "hi", 0.0);
        c.diffusion.gain = number_or(a, "gain", 0.5);
        c.diffusion.mode = static_cast<int>(number_or(a, "mode", 1));
    } else if (kind == "PME") {
        c.equation = EquationKind::porous_media;
        const json& psi = require(eq, "psi", "equation.psi");
        c.psi.kind = string_or(psi, "kind", "identity");
        c.psi.m = number_or(psi, "m", 2.0);
        c.psi.K = number_or(psi, "K", 5.0);
    } else {
        throw ConfigError("equation.kind must be \"FP\" or \"PME\"",
                          "equation.kind");
    }
    const std::string scheme = string_or(eq, "scheme", "explicit");
    if (scheme == "explicit") c.scheme = Scheme::explicit_em;
    else if (scheme == "semi_implicit") c.scheme = Scheme::semi_implicit;
    else throw ConfigError("equation.scheme must be \"explicit\" or \"semi_implicit\"",
                           "equation.scheme");
    c.dealias = eq.value("dealias", false);

    const json& noise = require(root, "noise", "noise");
    const std::string family = string_or(noise, "family", "off");
    if (family == "off") c.noise.kind = NoiseFamilyKind::off;
    else if (family == "trig") c.noise.kind = NoiseFamilyKind::trig;
    else if (family == "gaussian") c.noise.kind = NoiseFamilyKind::gaussian;
    else if (family == "tabulated") c.noise.kind = NoiseFamilyKind::tabulated;
    else throw ConfigError("unknown noise.family \"" + family + "\"", "noise.family");
    if (c.noise.kind != NoiseFamilyKind::off) {
        c.noise_modes = static_cast<int>(require_number(noise, "N", "noise.N"));
        c.noise.c = number_or(noise, "c", 1.0);
        c.noise.p = number_or(noise, "p", 2.0);
        c.noise.window_fraction = number_or(noise, "window", 0.8);
        c.noise.width = number_or(noise, "width", 0.3);
        if (noise.contains("modes"))
            c.noise.tabulated_modes =
                noise["modes"].get<std::vector<std::vector<double>>>();
    }
    if (noise.contains("e0")) {
        const json& e0 = noise["e0"];
        const std::string e0kind = string_or(e0, "kind", "zero");
        if (e0kind == "constant") {
            c.noise.has_drift = true;
            c.noise.drift_constant = require_number(e0, "value", "noise.e0.value");
        } else if (e0kind == "tabulated") {
            c.noise.has_drift = true;
            c.noise.drift_values = e0["values"].get<std::vector<double>>();
        } else if (e0kind != "zero") {
            throw ConfigError("noise.e0.kind must be zero|constant|tabulated",
                              "noise.e0.kind");
        }
    }

    c.initial = parse_profile(require(root, "initial", "initial"), "initial");

    if (root.contains("experiment")) {
        const json& exp = root["experiment"];
        const std::string mode = string_or(exp, "mode", "single");
        if (mode == "single") c.mode = ExperimentMode::single;
        else if (mode == "A" || mode == "refine") c.mode = ExperimentMode::refine;
        else if (mode == "B" || mode == "perturb") c.mode = ExperimentMode::perturb;
        else throw ConfigError("experiment.mode must be single|A|B", "experiment.mode");
        c.delta = number_or(exp, "delta", 0.0);
        if (exp.contains("perturbation"))
            c.perturbation = parse_profile(exp["perturbation"], "experiment.perturbation");
        else if (c.mode == ExperimentMode::perturb)
            c.perturbation = ProfileSpec{"cosine", 1.0, 0.0, 0.5, 1, 0.05, {}};
        if (exp.contains("epsilons"))
            c.epsilon_ladder = exp["epsilons"].get<std::vector<double>>();
        c.ensemble = static_cast<int>(number_or(exp, "ensemble", 1.0));
        if (c.ensemble < 1)
            throw ConfigError("experiment.ensemble must be >= 1", "experiment.ensemble");
        if (exp.contains("levels"))
            c.localization_levels = exp["levels"].get<std::vector<double>>();
        c.refine_factor = static_cast<int>(number_or(exp, "refine", 2.0));
        if (c.refine_factor < 2)
            throw ConfigError("experiment.refine must be >= 2", "experiment.refine");
    }

    if (root.contains("seed")) c.seed = root["seed"].get<std::uint64_t>();
    c.output_dir = string_or(root, "output", "out");

    // Constructor-level validation (grid shape, mollifier fit) surfaces here
    // so bad configs fail before any work happens.
    try {
        const GridPtr grid_ptr = c.make_grid_ptr();
        for (double frac : c.epsilon_ladder)
            make_mollifier(grid_ptr, frac * c.grid_half_length);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& json_path) {
    std::ifstream is(json_path);
    if (!is) throw ConfigError("cannot open config file " + json_path.string());
    std::stringstream buffer;
    buffer << is.rdbuf();
    return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    json eq;
    eq["kind"] = (c.equation == EquationKind::fokker_planck) ? "FP" : "PME";
    eq["scheme"] = (c.scheme == Scheme::explicit_em) ? "explicit" : "semi_implicit";
    eq["dealias"] = c.dealias;
    if (c.equation == EquationKind::fokker_planck) {
        eq["a"] = json{{"kind", c.diffusion.kind}, {"value", c.diffusion.value},
                       {"lo", c.diffusion.lo},     {"hi", c.diffusion.hi},
                       {"gain", c.diffusion.gain}, {"mode", c.diffusion.mode}};
    } else {
        eq["psi"] = json{{"kind", c.psi.kind}, {"m", c.psi.m}, {"K", c.psi.K}};
    }

    json noise;
    switch (c.noise.kind) {
        case NoiseFamilyKind::off: noise["family"] = "off"; break;
        case NoiseFamilyKind::trig: noise["family"] = "trig"; break;
        case NoiseFamilyKind::gaussian: noise["family"] = "gaussian"; break;
        case NoiseFamilyKind::tabulated: noise["family"] = "tabulated"; break;
    }
    noise["N"] = c.noise_modes;
    noise["c"] = c.noise.c;
    noise["p"] = c.noise.p;
    noise["window"] = c.noise.window_fraction;
    noise["width"] = c.noise.width;
    if (!c.noise.tabulated_modes.empty()) noise["modes"] = c.noise.tabulated_modes;
    if (c.noise.has_drift) {
        if (c.noise.drift_values.empty())
            noise["e0"] = json{{"kind", "constant"}, {"value", c.noise.drift_constant}};
        else
            noise["e0"] = json{{"kind", "tabulated"}, {"values", c.noise.drift_values}};
    } else {
        noise["e0"] = json{{"kind", "zero"}};
    }

    json exp;
    exp["mode"] = (c.mode == ExperimentMode::single)
                      ? "single"
                      : (c.mode == ExperimentMode::refine ? "A" : "B");
    exp["delta"] = c.delta;
    exp["perturbation"] = profile_to_json(c.perturbation);
    exp["epsilons"] = c.epsilon_ladder;
    exp["ensemble"] = c.ensemble;
    exp["levels"] = c.localization_levels;
    exp["refine"] = c.refine_factor;

    json root;
    root["grid"] = json{{"L", c.grid_half_length}, {"n", c.grid_points}};
    root["time"] = json{{"T", c.time_horizon}, {"dt", c.dt}, {"stride", c.stride}};
    root["equation"] = eq;
    root["noise"] = noise;
    root["initial"] = profile_to_json(c.initial);
    root["experiment"] = exp;
    root["seed"] = c.seed;
    root["output"] = c.output_dir;
    return root.dump(2);
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = serialize_config(config);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

RealField make_profile(const ProfileSpec& spec, const GridPtr& grid) {
    if (spec.kind == "gaussian") {
        return sample_field(grid, [&](double xi) {
            const double u = (xi - spec.center) / spec.width;
            return spec.amplitude * std::exp(-0.5 * u * u);
        });
    }
    if (spec.kind == "cosine") {
        const double k = spec.mode * M_PI / grid->half_length();
        return sample_field(grid, [&](double xi) {
            return spec.amplitude * std::cos(k * xi);
        });
    }
    if (spec.kind == "spike") {
        // Mollified point mass: amplitude times the unit-mass kernel.
        const MollifierSpec moll = make_mollifier(grid, spec.epsilon);
        RealField out(grid);
        const int n = grid->n_points();
        const int shift =
            static_cast<int>(std::llround((spec.center + grid->half_length()) /
                                          grid->dx()));
        for (int j = 0; j < n; ++j)
            out[(j + shift) % n] = spec.amplitude * moll.kernel[j];
        return out;
    }
    if (spec.kind == "tabulated") return RealField(grid, spec.values);
    return RealField(grid);  // zero
}

RealField ExperimentConfig::make_initial(const GridPtr& grid) const {
    return make_profile(initial, grid);
}

RealField ExperimentConfig::make_perturbation(const GridPtr& grid) const {
    return make_profile(perturbation, grid);
}

DiffusionCoefficient ExperimentConfig::make_diffusion() const {
    if (diffusion.kind == "constant")
        return DiffusionCoefficient::constant(diffusion.value);
    if (diffusion.kind == "indicator")
        return DiffusionCoefficient::indicator(diffusion.value, diffusion.lo,
                                               diffusion.hi);
    if (diffusion.kind == "modulated")
        return DiffusionCoefficient::path_modulated(diffusion.value,
                                                    diffusion.gain, diffusion.mode);
    throw ConfigError("unknown diffusion kind \"" + diffusion.kind + "\"",
                      "equation.a.kind");
}

Nonlinearity ExperimentConfig::make_psi() const {
    if (psi.kind == "identity") return Nonlinearity::identity();
    if (psi.kind == "arctan") return Nonlinearity::arctan();
    if (psi.kind == "saturated_power")
        return Nonlinearity::saturated_power(psi.m, psi.K);
    if (psi.kind == "zero") return Nonlinearity::zero();
    throw ConfigError("unknown psi kind \"" + psi.kind + "\"", "equation.psi.kind");
}

NoiseModel ExperimentConfig::make_noise(const GridPtr& grid) const {
    return build_noise_basis(noise, noise_modes, grid);
}

}  // namespace spde
