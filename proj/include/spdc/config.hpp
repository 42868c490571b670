#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spdc/amplitude.hpp"
#include "spdc/dispersion.hpp"

namespace spdc {

// Resolution profile: grid sizes used when the config does not override them.
struct ResolutionProfile {
    std::string name = "fast";
    int n_theta = 128;
    int n_phi = 32;
    int n_eps = 5;            // per filter window
    int n_eps_spectrum = 41;  // spectra for bandwidth and flux
    int fft_size = 512;

    static ResolutionProfile fast();
    static ResolutionProfile paper();
    static ResolutionProfile by_name(const std::string& name);
};

struct FilterConfig {
    // none: A = 1. narrow: FWHM = narrow_fraction x colinear bandwidth.
    // gaussian: explicit centre/FWHM. matched: the partner filter mapped
    // through energy matching (same frequency width).
    enum class Kind { None, Narrow, Gaussian, Matched };
    Kind kind = Kind::None;
    double center = 0.0;  // m; 0 means the photon's central wavelength
    double fwhm = 0.0;    // m

    static FilterConfig none() { return {}; }
    static FilterConfig narrow() { return {Kind::Narrow, 0.0, 0.0}; }
    static FilterConfig gaussian(double fwhm, double center = 0.0) { return {Kind::Gaussian, center, fwhm}; }
    static FilterConfig matched() { return {Kind::Matched, 0.0, 0.0}; }
    std::string describe() const;
};

struct FocusParams {
    double xi_p = 1.7;
    double xi_s = 2.3;
    double xi_i = 2.4;
};

struct Range {
    double min = 0.0, max = 0.0;
    int points = 2;
    std::vector<double> values(bool log_spaced = false) const;
};

struct SweepSettings {
    std::vector<double> lengths{2e-3, 4.5e-3, 10e-3};
    Range xi_pump{0.3, 5.0, 8};
    Range xi_fiber{0.5, 6.0, 12};
    double xi_lo = 0.3, xi_hi = 8.0;  // golden-section bounds for fiber xi
    double xi_tol = 0.01;
    std::vector<double> bandwidth_lengths{2e-3, 3e-3, 5e-3, 8e-3, 12e-3, 20e-3};
    std::vector<double> flux_lengths{2e-3, 3e-3, 5e-3, 8e-3, 12e-3, 20e-3};
    std::vector<double> flux_filters{0.01e-9, 25e-9};
    std::vector<double> m2_xi_pump{0.2, 0.4, 0.6, 0.9, 1.3, 2.0, 3.0, 4.5, 6.0};
    double m2_z_span = 2.0;  // caustic covers +- this many crystal lengths
    int m2_z_points = 21;
    int m2_modes = 20;
};

struct Scenario {
    DispersionModel dispersion = DispersionModel::builtin_ktp();
    CrystalConfig crystal;
    bool auto_temperature = true;
    TemperatureRange temperature_range{20.0, 200.0};
    double lambda_p = 532e-9;
    double lambda_s = 810e-9;
    FocusParams focus;
    WaistConvention convention = WaistConvention::Medium;
    AngularMeasure measure = AngularMeasure::Planar;
    double fiber_z_offset = 0.0;
    FilterConfig filter_s = FilterConfig::narrow();
    FilterConfig filter_i = FilterConfig::none();
    double narrow_fraction = 0.1;
    double eps_sigmas = 3.0;     // filter window half-width in filter sigmas
    double eps_sm_widths = 3.0;  // unfiltered half-width in single-mode bandwidths
    ResolutionProfile profile;
    // Explicit grid overrides; empty means use the profile / default rule.
    std::optional<int> n_theta, n_phi, n_eps, n_eps_spectrum, fft_size;
    std::optional<double> theta_max_s, theta_max_i;
    SweepSettings sweep;
    int threads = 1;
    bool deterministic = false;

    static Scenario defaults();
    int grid_n_theta() const { return n_theta.value_or(profile.n_theta); }
    int grid_n_phi() const { return n_phi.value_or(profile.n_phi); }
    int grid_n_eps() const { return n_eps.value_or(profile.n_eps); }
    int grid_n_eps_spectrum() const { return n_eps_spectrum.value_or(profile.n_eps_spectrum); }
    int grid_fft_size() const { return fft_size.value_or(profile.fft_size); }
};

// Reads a YAML scenario; unknown keys and bad units raise ConfigError.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& yaml_text);

}  // namespace spdc
