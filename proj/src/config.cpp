#include "spdc/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

ResolutionProfile ResolutionProfile::fast() { return {"fast", 128, 32, 5, 41, 512}; }

ResolutionProfile ResolutionProfile::paper() { return {"paper", 400, 80, 9, 81, 512}; }

ResolutionProfile ResolutionProfile::by_name(const std::string& name) {
    if (name == "fast") return fast();
    if (name == "paper") return paper();
    throw ConfigError("unknown resolution profile '" + name + "' (expected fast or paper)");
}

std::string FilterConfig::describe() const {
    std::ostringstream s;
    switch (kind) {
        case Kind::None: return "none";
        case Kind::Narrow: return "narrow";
        case Kind::Matched: return "matched";
        case Kind::Gaussian:
            s << "gaussian(" << fwhm / nm << "nm)";
            return s.str();
    }
    return "?";
}

std::vector<double> Range::values(bool log_spaced) const {
    if (points < 1) throw ConfigError("range needs at least one point");
    if (points == 1) return {min};
    if (!(max > min)) throw ConfigError("range maximum must exceed its minimum");
    std::vector<double> v(points);
    for (int j = 0; j < points; ++j) {
        const double f = static_cast<double>(j) / (points - 1);
        v[j] = log_spaced ? min * std::pow(max / min, f) : min + f * (max - min);
    }
    return v;
}

Scenario Scenario::defaults() { return Scenario{}; }

namespace {

void check_keys(const YAML::Node& node, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!node) return;
    if (!node.IsMap()) throw ConfigError("config section '" + section + "' must be a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!ok.count(key)) throw ConfigError("unknown config key '" + section + "." + key + "'");
    }
}

double as_number(const YAML::Node& n, const std::string& where) {
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config value '" + where + "' must be a number");
    }
}

int as_int(const YAML::Node& n, const std::string& where) {
    try {
        return n.as<int>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config value '" + where + "' must be an integer");
    }
}

double as_length(const YAML::Node& n, const std::string& where) {
    if (!n.IsScalar()) throw ConfigError("config value '" + where + "' must be a length");
    return parse_length(n.Scalar());
}

std::vector<double> as_length_list(const YAML::Node& n, const std::string& where) {
    if (!n.IsSequence()) throw ConfigError("config value '" + where + "' must be a list of lengths");
    std::vector<double> v;
    for (const auto& e : n) v.push_back(as_length(e, where));
    return v;
}

std::vector<double> as_number_list(const YAML::Node& n, const std::string& where) {
    if (!n.IsSequence()) throw ConfigError("config value '" + where + "' must be a list of numbers");
    std::vector<double> v;
    for (const auto& e : n) v.push_back(as_number(e, where));
    return v;
}

Range as_range(const YAML::Node& n, const std::string& where) {
    check_keys(n, where, {"min", "max", "points"});
    Range r;
    r.min = as_number(n["min"], where + ".min");
    r.max = as_number(n["max"], where + ".max");
    r.points = as_int(n["points"], where + ".points");
    return r;
}

FilterConfig as_filter(const YAML::Node& n, const std::string& where) {
    if (n.IsScalar()) {
        const std::string kind = n.Scalar();
        if (kind == "none") return FilterConfig::none();
        if (kind == "narrow") return FilterConfig::narrow();
        if (kind == "matched") return FilterConfig::matched();
        throw ConfigError("config value '" + where + "': unknown filter '" + kind + "'");
    }
    check_keys(n, where, {"type", "center", "fwhm"});
    if (!n["type"]) throw ConfigError("config section '" + where + "' needs a type");
    const std::string kind = n["type"].as<std::string>();
    FilterConfig f;
    if (kind == "none") f.kind = FilterConfig::Kind::None;
    else if (kind == "narrow") f.kind = FilterConfig::Kind::Narrow;
    else if (kind == "matched") f.kind = FilterConfig::Kind::Matched;
    else if (kind == "gaussian") f.kind = FilterConfig::Kind::Gaussian;
    else throw ConfigError("config value '" + where + ".type': unknown filter '" + kind + "'");
    if (n["center"]) f.center = as_length(n["center"], where + ".center");
    if (n["fwhm"]) f.fwhm = as_length(n["fwhm"], where + ".fwhm");
    if (f.kind == FilterConfig::Kind::Gaussian && !(f.fwhm > 0))
        throw ConfigError("gaussian filter '" + where + "' needs a positive fwhm");
    return f;
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    Scenario s;
    if (!root || root.IsNull()) return s;
    check_keys(root, "<root>", {"crystal", "wavelengths", "focus", "filters", "grid", "dispersion", "sweep", "run"});

    if (const YAML::Node d = root["dispersion"]) {
        check_keys(d, "dispersion", {"file", "overrides", "x_follows_y"});
        if (d["file"]) s.dispersion = DispersionModel::from_file(d["file"].as<std::string>());
        if (d["x_follows_y"]) s.dispersion.x_follows_y = d["x_follows_y"].as<bool>();
        if (const YAML::Node o = d["overrides"]) {
            check_keys(o, "dispersion.overrides", {"X", "Y", "Z"});
            for (const auto& ax : o) {
                const Axis axis = parse_axis(ax.first.as<std::string>());
                for (const auto& kv : ax.second)
                    s.dispersion.set_coefficient(axis, kv.first.as<std::string>(),
                                                 as_number(kv.second, "dispersion.overrides"));
            }
        }
    }
    if (const YAML::Node c = root["crystal"]) {
        check_keys(c, "crystal", {"length", "poling_period", "grating_terms", "temperature", "temperature_range", "axes"});
        if (c["length"]) s.crystal.length = as_length(c["length"], "crystal.length");
        if (c["poling_period"]) {
            const YAML::Node p = c["poling_period"];
            s.crystal.poling_period = (p.IsScalar() && p.Scalar() == "none") ? INFINITY
                                                                              : as_length(p, "crystal.poling_period");
        }
        if (c["grating_terms"]) s.crystal.grating_terms = as_int(c["grating_terms"], "crystal.grating_terms");
        if (c["temperature"]) {
            const YAML::Node t = c["temperature"];
            if (t.IsScalar() && t.Scalar() == "auto") {
                s.auto_temperature = true;
            } else {
                s.auto_temperature = false;
                s.crystal.temperature = as_number(t, "crystal.temperature");
            }
        }
        if (c["temperature_range"]) {
            const auto r = as_number_list(c["temperature_range"], "crystal.temperature_range");
            if (r.size() != 2) throw ConfigError("crystal.temperature_range needs two values");
            s.temperature_range = {r[0], r[1]};
        }
        if (const YAML::Node a = c["axes"]) {
            check_keys(a, "crystal.axes", {"pump", "signal", "idler"});
            if (a["pump"]) s.crystal.axes.pump = parse_axis(a["pump"].as<std::string>());
            if (a["signal"]) s.crystal.axes.signal = parse_axis(a["signal"].as<std::string>());
            if (a["idler"]) s.crystal.axes.idler = parse_axis(a["idler"].as<std::string>());
        }
    }
    if (const YAML::Node w = root["wavelengths"]) {
        check_keys(w, "wavelengths", {"pump", "signal"});
        if (w["pump"]) s.lambda_p = as_length(w["pump"], "wavelengths.pump");
        if (w["signal"]) s.lambda_s = as_length(w["signal"], "wavelengths.signal");
    }
    if (const YAML::Node f = root["focus"]) {
        check_keys(f, "focus", {"xi_pump", "xi_signal", "xi_idler", "waist_convention", "fiber_z_offset"});
        if (f["xi_pump"]) s.focus.xi_p = as_number(f["xi_pump"], "focus.xi_pump");
        if (f["xi_signal"]) s.focus.xi_s = as_number(f["xi_signal"], "focus.xi_signal");
        if (f["xi_idler"]) s.focus.xi_i = as_number(f["xi_idler"], "focus.xi_idler");
        if (f["waist_convention"]) {
            const std::string v = f["waist_convention"].as<std::string>();
            if (v == "medium") s.convention = WaistConvention::Medium;
            else if (v == "vacuum") s.convention = WaistConvention::Vacuum;
            else throw ConfigError("focus.waist_convention must be medium or vacuum");
        }
        if (f["fiber_z_offset"]) s.fiber_z_offset = as_length(f["fiber_z_offset"], "focus.fiber_z_offset");
        if (!(s.focus.xi_p > 0 && s.focus.xi_s > 0 && s.focus.xi_i > 0))
            throw ConfigError("focusing parameters must be positive");
    }
    if (const YAML::Node f = root["filters"]) {
        check_keys(f, "filters", {"signal", "idler", "narrow_fraction", "window_sigmas", "window_sm_widths"});
        if (f["signal"]) s.filter_s = as_filter(f["signal"], "filters.signal");
        if (f["idler"]) s.filter_i = as_filter(f["idler"], "filters.idler");
        if (f["narrow_fraction"]) s.narrow_fraction = as_number(f["narrow_fraction"], "filters.narrow_fraction");
        if (f["window_sigmas"]) s.eps_sigmas = as_number(f["window_sigmas"], "filters.window_sigmas");
        if (f["window_sm_widths"]) s.eps_sm_widths = as_number(f["window_sm_widths"], "filters.window_sm_widths");
        if (s.filter_s.kind == FilterConfig::Kind::Matched && s.filter_i.kind == FilterConfig::Kind::Matched)
            throw ConfigError("only one filter may be 'matched' to the other");
    }
    if (const YAML::Node g = root["grid"]) {
        check_keys(g, "grid", {"profile", "n_theta", "n_phi", "n_eps", "n_eps_spectrum", "theta_max_signal",
                               "theta_max_idler", "measure", "fft_size"});
        if (g["profile"]) s.profile = ResolutionProfile::by_name(g["profile"].as<std::string>());
        if (g["n_theta"]) s.n_theta = as_int(g["n_theta"], "grid.n_theta");
        if (g["n_phi"]) s.n_phi = as_int(g["n_phi"], "grid.n_phi");
        if (g["n_eps"]) s.n_eps = as_int(g["n_eps"], "grid.n_eps");
        if (g["n_eps_spectrum"]) s.n_eps_spectrum = as_int(g["n_eps_spectrum"], "grid.n_eps_spectrum");
        if (g["fft_size"]) s.fft_size = as_int(g["fft_size"], "grid.fft_size");
        auto cutoff = [&](const char* key, std::optional<double>& out) {
            const YAML::Node v = g[key];
            if (!v || (v.IsScalar() && v.Scalar() == "auto")) return;
            out = as_number(v, std::string("grid.") + key);
        };
        cutoff("theta_max_signal", s.theta_max_s);
        cutoff("theta_max_idler", s.theta_max_i);
        if (g["measure"]) {
            const std::string v = g["measure"].as<std::string>();
            if (v == "planar") s.measure = AngularMeasure::Planar;
            else if (v == "spherical") s.measure = AngularMeasure::Spherical;
            else throw ConfigError("grid.measure must be planar or spherical");
        }
    }
    if (const YAML::Node w = root["sweep"]) {
        check_keys(w, "sweep", {"lengths", "xi_pump", "xi_fiber", "xi_bounds", "xi_tolerance", "bandwidth_lengths",
                                "flux_lengths", "flux_filters", "m2_xi_pump", "m2_z_span", "m2_z_points", "m2_modes"});
        SweepSettings& sw = s.sweep;
        if (w["lengths"]) sw.lengths = as_length_list(w["lengths"], "sweep.lengths");
        if (w["xi_pump"]) sw.xi_pump = as_range(w["xi_pump"], "sweep.xi_pump");
        if (w["xi_fiber"]) sw.xi_fiber = as_range(w["xi_fiber"], "sweep.xi_fiber");
        if (w["xi_bounds"]) {
            const auto b = as_number_list(w["xi_bounds"], "sweep.xi_bounds");
            if (b.size() != 2 || !(b[0] > 0 && b[1] > b[0])) throw ConfigError("sweep.xi_bounds needs 0 < lo < hi");
            sw.xi_lo = b[0];
            sw.xi_hi = b[1];
        }
        if (w["xi_tolerance"]) sw.xi_tol = as_number(w["xi_tolerance"], "sweep.xi_tolerance");
        if (w["bandwidth_lengths"]) sw.bandwidth_lengths = as_length_list(w["bandwidth_lengths"], "sweep.bandwidth_lengths");
        if (w["flux_lengths"]) sw.flux_lengths = as_length_list(w["flux_lengths"], "sweep.flux_lengths");
        if (w["flux_filters"]) sw.flux_filters = as_length_list(w["flux_filters"], "sweep.flux_filters");
        if (w["m2_xi_pump"]) sw.m2_xi_pump = as_number_list(w["m2_xi_pump"], "sweep.m2_xi_pump");
        if (w["m2_z_span"]) sw.m2_z_span = as_number(w["m2_z_span"], "sweep.m2_z_span");
        if (w["m2_z_points"]) sw.m2_z_points = as_int(w["m2_z_points"], "sweep.m2_z_points");
        if (w["m2_modes"]) sw.m2_modes = as_int(w["m2_modes"], "sweep.m2_modes");
    }
    if (const YAML::Node r = root["run"]) {
        check_keys(r, "run", {"threads", "deterministic"});
        if (r["threads"]) s.threads = as_int(r["threads"], "run.threads");
        if (r["deterministic"]) s.deterministic = r["deterministic"].as<bool>();
    }
    s.crystal.validate(s.dispersion);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

}  // namespace spdc
