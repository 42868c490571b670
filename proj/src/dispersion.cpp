#include "spdc/dispersion.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

extern const char* const kBuiltinKtpYaml;  // generated from data/ktp.yaml

Axis parse_axis(std::string_view name) {
    if (name == "X" || name == "x") return Axis::X;
    if (name == "Y" || name == "y") return Axis::Y;
    if (name == "Z" || name == "z") return Axis::Z;
    throw ConfigError("unknown crystal axis '" + std::string(name) + "'");
}

const char* axis_name(Axis axis) {
    switch (axis) {
        case Axis::X: return "X";
        case Axis::Y: return "Y";
        case Axis::Z: return "Z";
    }
    return "?";
}

namespace {

double require_number(const YAML::Node& node, const char* key, const std::string& where) {
    const YAML::Node v = node[key];
    if (!v) throw ConfigError("dispersion dataset: missing '" + std::string(key) + "' in " + where);
    try {
        return v.as<double>();
    } catch (const YAML::Exception&) {
        throw ConfigError("dispersion dataset: '" + std::string(key) + "' in " + where + " is not a number");
    }
}

AxisCoefficients read_axis(const YAML::Node& node, const std::string& where) {
    if (!node || !node.IsMap()) throw ConfigError("dispersion dataset: missing axis section " + where);
    AxisCoefficients c;
    const YAML::Node s = node["sellmeier"];
    if (!s) throw ConfigError("dispersion dataset: missing sellmeier block in " + where);
    c.sellmeier.A = require_number(s, "A", where);
    c.sellmeier.B1 = require_number(s, "B1", where);
    c.sellmeier.C1 = require_number(s, "C1", where);
    c.sellmeier.B2 = s["B2"] ? require_number(s, "B2", where) : 0.0;
    c.sellmeier.C2 = s["C2"] ? require_number(s, "C2", where) : 0.0;
    c.sellmeier.D = s["D"] ? require_number(s, "D", where) : 0.0;
    if (const YAML::Node t = node["thermo"]) {
        static const char* const a_keys[] = {"a0", "a1", "a2", "a3"};
        static const char* const b_keys[] = {"b0", "b1", "b2", "b3"};
        for (int m = 0; m < 4; ++m) {
            c.thermo.a[m] = t[a_keys[m]] ? require_number(t, a_keys[m], where) : 0.0;
            c.thermo.b[m] = t[b_keys[m]] ? require_number(t, b_keys[m], where) : 0.0;
        }
    }
    return c;
}

}  // namespace

DispersionModel DispersionModel::from_yaml_text(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("dispersion dataset: ") + e.what());
    }
    DispersionModel m;
    m.name = root["name"] ? root["name"].as<std::string>() : "unnamed";
    m.version = root["version"] ? root["version"].as<int>() : 0;
    m.reference_temperature = root["reference_temperature"] ? root["reference_temperature"].as<double>() : 25.0;
    const YAML::Node v = root["validity"];
    if (!v) throw ConfigError("dispersion dataset: missing validity block");
    m.lambda_min = require_number(v, "lambda_min_um", "validity") * um;
    m.lambda_max = require_number(v, "lambda_max_um", "validity") * um;
    m.temperature_min = require_number(v, "temperature_min_c", "validity");
    m.temperature_max = require_number(v, "temperature_max_c", "validity");
    if (!(m.lambda_min > 0 && m.lambda_max > m.lambda_min && m.temperature_max > m.temperature_min))
        throw ConfigError("dispersion dataset: empty validity range");
    m.axes[static_cast<int>(Axis::Y)] = read_axis(root["Y"], "Y");
    m.axes[static_cast<int>(Axis::Z)] = read_axis(root["Z"], "Z");
    m.axes[static_cast<int>(Axis::X)] = root["X"] ? read_axis(root["X"], "X") : m.axes[1];
    return m;
}

DispersionModel DispersionModel::builtin_ktp() {
    static const DispersionModel cached = from_yaml_text(kBuiltinKtpYaml);
    return cached;
}

DispersionModel DispersionModel::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dispersion dataset '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_yaml_text(buf.str());
}

void DispersionModel::set_coefficient(Axis axis, std::string_view key, double value) {
    AxisCoefficients& c = axes[static_cast<int>(axis)];
    SellmeierTerms& s = c.sellmeier;
    if (key == "A") s.A = value;
    else if (key == "B1") s.B1 = value;
    else if (key == "C1") s.C1 = value;
    else if (key == "B2") s.B2 = value;
    else if (key == "C2") s.C2 = value;
    else if (key == "D") s.D = value;
    else if (key.size() == 2 && (key[0] == 'a' || key[0] == 'b') && key[1] >= '0' && key[1] <= '3')
        (key[0] == 'a' ? c.thermo.a : c.thermo.b)[key[1] - '0'] = value;
    else
        throw ConfigError("unknown dispersion coefficient '" + std::string(key) + "'");
}

double DispersionModel::index(Axis axis, double wavelength, double temperature) const {
    if (!(wavelength >= lambda_min))
        throw DomainError("wavelength " + std::to_string(wavelength / nm) + " nm below dataset minimum " +
                          std::to_string(lambda_min / nm) + " nm");
    if (!(wavelength <= lambda_max))
        throw DomainError("wavelength " + std::to_string(wavelength / nm) + " nm above dataset maximum " +
                          std::to_string(lambda_max / nm) + " nm");
    if (!(temperature >= temperature_min))
        throw DomainError("temperature " + std::to_string(temperature) + " C below dataset minimum " +
                          std::to_string(temperature_min) + " C");
    if (!(temperature <= temperature_max))
        throw DomainError("temperature " + std::to_string(temperature) + " C above dataset maximum " +
                          std::to_string(temperature_max) + " C");
    if (axis == Axis::X && x_follows_y) axis = Axis::Y;
    const AxisCoefficients& c = axes[static_cast<int>(axis)];
    const double l = wavelength / um;
    const double l2 = l * l;
    const SellmeierTerms& s = c.sellmeier;
    const double n2 = s.A + s.B1 / (l2 - s.C1) + (s.B2 != 0.0 ? s.B2 / (l2 - s.C2) : 0.0) - s.D * l2;
    if (!(n2 > 1.0)) throw DomainError("Sellmeier terms give n <= 1 at " + std::to_string(wavelength / nm) + " nm");
    const double dt = temperature - reference_temperature;
    double n1 = 0, nq = 0, inv = 1.0;
    for (int m = 0; m < 4; ++m) {
        n1 += c.thermo.a[m] * inv;
        nq += c.thermo.b[m] * inv;
        inv /= l;
    }
    return std::sqrt(n2) + n1 * dt + nq * dt * dt;
}

double refractive_index(const DispersionModel& model, Axis axis, double wavelength, double temperature) {
    return model.index(axis, wavelength, temperature);
}

double energy_match_idler(double lambda_pump, double lambda_signal) {
    if (!(lambda_pump > 0)) throw DomainError("pump wavelength must be positive");
    if (!(lambda_signal > lambda_pump)) throw DomainError("signal wavelength must exceed the pump wavelength");
    return 1.0 / (1.0 / lambda_pump - 1.0 / lambda_signal);
}

double k_of_theta(double k_z, double k_y, double theta) {
    const double c = std::cos(theta) / k_z;
    const double s = std::sin(theta) / k_y;
    return 1.0 / std::sqrt(c * c + s * s);
}

double CrystalConfig::grating_constant() const {
    return std::isinf(poling_period) ? 0.0 : 2.0 * kPi / poling_period;
}

void CrystalConfig::validate(const DispersionModel& model) const {
    if (!(length > 0)) throw ConfigError("crystal length must be positive");
    if (!(poling_period > 0)) throw ConfigError("poling period must be positive");
    if (grating_terms < 0) throw ConfigError("grating term count must be >= 0");
    if (!(temperature >= model.temperature_min && temperature <= model.temperature_max))
        throw ConfigError("crystal temperature " + std::to_string(temperature) + " C outside dataset range");
}

WaveTriplet WaveTriplet::from_pump_signal(double lambda_pump, double lambda_signal) {
    WaveTriplet t;
    t.lambda_p = lambda_pump;
    t.lambda_s = lambda_signal;
    t.lambda_i = energy_match_idler(lambda_pump, lambda_signal);
    if (t.lambda_i < t.lambda_s) std::swap(t.lambda_s, t.lambda_i);
    return t;
}

void WaveTriplet::validate() const {
    const double lhs = 1.0 / lambda_p;
    const double rhs = 1.0 / lambda_s + 1.0 / lambda_i;
    if (!(std::abs(lhs - rhs) <= 1e-9 * lhs)) throw DomainError("wavelengths violate energy matching");
    if (!(lambda_s <= lambda_i)) throw DomainError("signal must be the shorter daughter wavelength");
}

std::pair<double, double> axis_wave_numbers(const DispersionModel& model, Axis polarization, double wavelength,
                                            double temperature) {
    const Axis tilted = polarization == Axis::Z ? Axis::Y : Axis::Z;
    const double k0 = 2.0 * kPi / wavelength;
    return {k0 * model.index(polarization, wavelength, temperature), k0 * model.index(tilted, wavelength, temperature)};
}

WaveNumbers wave_numbers(const DispersionModel& model, const CrystalConfig& config, const WaveTriplet& triplet) {
    WaveNumbers k;
    std::tie(k.kp_z, k.kp_y) = axis_wave_numbers(model, config.axes.pump, triplet.lambda_p, config.temperature);
    std::tie(k.ks_z, k.ks_y) = axis_wave_numbers(model, config.axes.signal, triplet.lambda_s, config.temperature);
    std::tie(k.ki_z, k.ki_y) = axis_wave_numbers(model, config.axes.idler, triplet.lambda_i, config.temperature);
    return k;
}

double qpm_mismatch(const CrystalConfig& config, const DispersionModel& model, const WaveTriplet& triplet) {
    const WaveNumbers k = wave_numbers(model, config, triplet);
    return k.ks_z + k.ki_z - k.kp_z + config.grating_constant();
}

double solve_qpm_temperature(const CrystalConfig& config, const DispersionModel& model, const WaveTriplet& triplet,
                             TemperatureRange range) {
    if (!(range.high > range.low)) throw ConfigError("temperature range is empty");
    CrystalConfig c = config;
    auto f = [&](double t) {
        c.temperature = t;
        return qpm_mismatch(c, model, triplet);
    };
    const double K = config.grating_constant();
    const double tol = 1e-6 * (K > 0 ? K : 2.0 * kPi / triplet.lambda_p);
    double a = range.low, b = range.high;
    double fa = f(a), fb = f(b);
    if (std::abs(fa) < tol) return a;
    if (std::abs(fb) < tol) return b;
    if ((fa > 0) == (fb > 0))
        throw NumericalError("no phase-matching in range [" + std::to_string(range.low) + ", " +
                             std::to_string(range.high) + "] C");
    for (int iter = 0; iter < 200; ++iter) {
        // Secant guess, falling back to the midpoint when it leaves the
        // inner part of the bracket.
        double t = b - fb * (b - a) / (fb - fa);
        const double margin = 0.05 * (b - a);
        if (!(t > a + margin && t < b - margin)) t = 0.5 * (a + b);
        const double ft = f(t);
        if (std::abs(ft) < tol) return t;
        if ((ft > 0) == (fa > 0)) {
            a = t;
            fa = ft;
        } else {
            b = t;
            fb = ft;
        }
        if (b - a < 1e-13 * std::max(1.0, std::abs(a))) break;
    }
    throw NumericalError("phase-matching temperature did not converge to tolerance");
}

}  // namespace spdc
