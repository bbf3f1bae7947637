#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spde/coefficients.hpp"
#include "spde/fokker_planck.hpp"
#include "spde/grid.hpp"
#include "spde/noise.hpp"

namespace spde {

enum class EquationKind { fokker_planck, porous_media };
enum class ExperimentMode { single, refine, perturb };  // A = refine, B = perturb

struct ProfileSpec {
    std::string kind;  // gaussian | cosine | spike | tabulated | zero
    double amplitude = 1.0;
    double center = 0.0;
    double width = 0.5;
    int mode = 1;
    double epsilon = 0.05;  // spike regularization width
    std::vector<double> values;
};

struct DiffusionSpec {
    std::string kind = "constant";  // constant | indicator | modulated
    double value = 0.0;
    double lo = 0.0, hi = 0.0;  // indicator support
    double gain = 0.5;          // modulated
    int mode = 1;               // modulated: which Wiener path drives a
};

struct PsiSpec {
    std::string kind = "identity";  // identity | arctan | saturated_power | zero
    double m = 2.0;
    double K = 5.0;
};

struct ExperimentConfig {
    double grid_half_length = M_PI;
    int grid_points = 128;

    double time_horizon = 1.0;
    double dt = 1e-3;
    int stride = 1;

    EquationKind equation = EquationKind::fokker_planck;
    Scheme scheme = Scheme::explicit_em;
    bool dealias = false;
    DiffusionSpec diffusion;  // FP
    PsiSpec psi;              // PME

    NoiseFamilySpec noise;
    int noise_modes = 0;

    ProfileSpec initial;

    ExperimentMode mode = ExperimentMode::single;
    double delta = 0.0;
    ProfileSpec perturbation;
    std::vector<double> epsilon_ladder;  // fractions of L
    int ensemble = 1;
    std::vector<double> localization_levels;
    int refine_factor = 2;

    std::uint64_t seed = 0;
    std::string output_dir = "out";

    int n_steps() const { return static_cast<int>(std::llround(time_horizon / dt)); }
    GridPtr make_grid_ptr() const { return make_grid(grid_half_length, grid_points); }
    RealField make_initial(const GridPtr& grid) const;
    RealField make_perturbation(const GridPtr& grid) const;
    DiffusionCoefficient make_diffusion() const;
    Nonlinearity make_psi() const;
    NoiseModel make_noise(const GridPtr& grid) const;
};

/// Parse + validate. Throws ConfigError naming the offending key path.
ExperimentConfig load_config(const std::filesystem::path& json_path);
ExperimentConfig parse_config(const std::string& json_text);

/// Canonical serialization of the resolved config (includes defaults).
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a hash of the canonical serialization, hex-encoded.
std::string config_hash(const ExperimentConfig& config);

RealField make_profile(const ProfileSpec& spec, const GridPtr& grid);

}  // namespace spde
