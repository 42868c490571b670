#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>

namespace spdc {

enum class Axis { X = 0, Y = 1, Z = 2 };

Axis parse_axis(std::string_view name);
const char* axis_name(Axis axis);

// n^2 = A + B1/(l^2 - C1) + B2/(l^2 - C2) - D l^2, l in micrometres.
struct SellmeierTerms {
    double A = 1.0;
    double B1 = 0.0, C1 = 0.0;
    double B2 = 0.0, C2 = 0.0;
    double D = 0.0;
};

// n(T) - n(T0) = n1 (T - T0) + n2 (T - T0)^2, with n1 = sum a_m / l^m and
// n2 = sum b_m / l^m (l in micrometres).
struct ThermoOpticTerms {
    std::array<double, 4> a{};
    std::array<double, 4> b{};
};

struct AxisCoefficients {
    SellmeierTerms sellmeier;
    ThermoOpticTerms thermo;
};

class DispersionModel {
public:
    std::string name = "unnamed";
    int version = 0;
    double reference_temperature = 25.0;  // deg C
    double lambda_min = 0.0;              // m
    double lambda_max = 0.0;              // m
    double temperature_min = 0.0;         // deg C
    double temperature_max = 0.0;         // deg C
    std::array<AxisCoefficients, 3> axes{};
    // X shares Y's indices unless explicitly switched off.
    bool x_follows_y = true;

    // Bundled KTP dataset compiled into the binary.
    static DispersionModel builtin_ktp();
    static DispersionModel from_yaml_text(std::string_view text);
    static DispersionModel from_file(const std::filesystem::path& path);

    // key is one of A B1 C1 B2 C2 D a0..a3 b0..b3.
    void set_coefficient(Axis axis, std::string_view key, double value);

    double index(Axis axis, double wavelength, double temperature) const;
};

// Refractive index; throws DomainError naming the violated bound.
double refractive_index(const DispersionModel& model, Axis axis, double wavelength, double temperature);

// Idler wavelength from exact energy matching 1/lp = 1/ls + 1/li.
double energy_match_idler(double lambda_pump, double lambda_signal);

// Wave number at polar angle theta for an index ellipse with on-axis kz and
// perpendicular ky.
double k_of_theta(double k_z, double k_y, double theta);

struct AxisAssignment {
    Axis pump = Axis::Z;
    Axis signal = Axis::Z;
    Axis idler = Axis::Z;
};

struct CrystalConfig {
    double length = 10e-3;          // m
    double poling_period = 9.6e-6;  // m; +inf removes the grating
    int grating_terms = 0;          // highest m in the square-wave series
    double temperature = 25.0;      // deg C
    AxisAssignment axes;

    double grating_constant() const;  // K = 2 pi / period
    void validate(const DispersionModel& model) const;
};

// On-axis and perpendicular wave numbers of the three fields (rad/m).
struct WaveNumbers {
    double kp_z = 0, kp_y = 0;
    double ks_z = 0, ks_y = 0;
    double ki_z = 0, ki_y = 0;
};

struct WaveTriplet {
    double lambda_p = 0, lambda_s = 0, lambda_i = 0;  // vacuum, m

    // Signal is the shorter of the two daughter wavelengths.
    static WaveTriplet from_pump_signal(double lambda_pump, double lambda_signal);
    void validate() const;
};

// Wave number of a field of given polarization axis; the perpendicular value
// is the index the field sees when tilted towards 90 degrees.
std::pair<double, double> axis_wave_numbers(const DispersionModel& model, Axis polarization, double wavelength,
                                            double temperature);

WaveNumbers wave_numbers(const DispersionModel& model, const CrystalConfig& config, const WaveTriplet& triplet);

// Colinear mismatch dk0 = ks + ki - kp + K.
double qpm_mismatch(const CrystalConfig& config, const DispersionModel& model, const WaveTriplet& triplet);

struct TemperatureRange {
    double low = 20.0;
    double high = 200.0;
};

// Temperature where the colinear mismatch vanishes, |dk0| < 1e-6 K.
// Throws NumericalError when dk0 does not change sign over the range.
double solve_qpm_temperature(const CrystalConfig& config, const DispersionModel& model, const WaveTriplet& triplet,
                             TemperatureRange range);

}  // namespace spdc
