#include "spdc/amplitude.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

QuadratureAxis midpoint_axis(int n, double lo, double hi) {
    QuadratureAxis a;
    const double h = (hi - lo) / n;
    a.nodes.resize(n);
    a.weights.assign(n, h);
    for (int j = 0; j < n; ++j) a.nodes[j] = lo + (j + 0.5) * h;
    return a;
}

void check_axis(const QuadratureAxis& a, const char* name) {
    if (a.nodes.empty() || a.nodes.size() != a.weights.size())
        throw ConfigError(std::string("grid axis ") + name + " is empty or inconsistent");
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!(a.weights[j] > 0)) throw ConfigError(std::string("grid axis ") + name + " has a non-positive weight");
        if (j > 0 && !(a.nodes[j] > a.nodes[j - 1]))
            throw ConfigError(std::string("grid axis ") + name + " is not strictly increasing");
    }
}

}  // namespace

std::vector<double> theta_weights(const std::vector<double>& nodes, double step, AngularMeasure measure) {
    std::vector<double> w(nodes.size(), step);
    if (measure == AngularMeasure::Spherical)
        for (std::size_t j = 0; j < nodes.size(); ++j) w[j] = std::sin(nodes[j]) * step;
    return w;
}

SimulationGrid SimulationGrid::make(int n_theta, double theta_max_s, double theta_max_i, int n_phi, int n_eps,
                                    double eps_half_span, AngularMeasure measure) {
    if (n_theta < 1 || n_phi < 1 || n_eps < 1) throw ConfigError("grid point counts must be positive");
    if (!(theta_max_s > 0 && theta_max_i > 0)) throw ConfigError("theta cutoffs must be positive");
    SimulationGrid g;
    g.measure = measure;
    g.theta_s = midpoint_axis(n_theta, 0.0, theta_max_s);
    g.theta_i = midpoint_axis(n_theta, 0.0, theta_max_i);
    g.theta_s.weights = theta_weights(g.theta_s.nodes, theta_max_s / n_theta, measure);
    g.theta_i.weights = theta_weights(g.theta_i.nodes, theta_max_i / n_theta, measure);
    g.dphi = midpoint_axis(n_phi, 0.0, 2.0 * kPi);
    if (n_eps == 1) {
        g.eps.nodes = {0.0};
        g.eps.weights = {1.0};
    } else {
        if (!(eps_half_span > 0)) throw ConfigError("frequency span must be positive for n_eps > 1");
        g.eps = midpoint_axis(n_eps, -eps_half_span, eps_half_span);
    }
    g.validate();
    return g;
}

void SimulationGrid::validate() const {
    check_axis(theta_s, "theta_s");
    check_axis(theta_i, "theta_i");
    check_axis(dphi, "dphi");
    check_axis(eps, "eps");
    if (!(theta_max_s() < kPi / 2 && theta_max_i() < kPi / 2)) throw ConfigError("theta cutoff must be below pi/2");
    const std::size_t n_theta = std::max(theta_s.size(), theta_i.size());
    if (dphi.size() < (n_theta + 4) / 5)
        throw ConfigError("azimuthal grid too coarse: n_phi = " + std::to_string(dphi.size()) +
                          " < ceil(n_theta/5) = " + std::to_string((n_theta + 4) / 5));
    if (dphi.nodes.front() < 0 || dphi.nodes.back() >= 2.0 * kPi) throw ConfigError("dphi nodes outside [0, 2 pi)");
}

double SimulationGrid::theta_max_s() const {
    return theta_s.nodes.back() + 0.5 * (theta_s.nodes.back() - (theta_s.size() > 1 ? theta_s.nodes[theta_s.size() - 2] : 0.0));
}

double SimulationGrid::theta_max_i() const {
    return theta_i.nodes.back() + 0.5 * (theta_i.nodes.back() - (theta_i.size() > 1 ? theta_i.nodes[theta_i.size() - 2] : 0.0));
}

std::vector<std::size_t> SimulationGrid::half_dphi_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < dphi.size(); ++j)
        if (dphi.nodes[j] <= kPi + 1e-12) idx.push_back(j);
    return idx;
}

QuadratureAxis SimulationGrid::half_dphi() const {
    // Each node in [0, pi) absorbs the weight of its mirror when the mirror
    // is itself a grid node; the midpoint grid always pairs j with n-1-j.
    QuadratureAxis h;
    const std::size_t n = dphi.size();
    for (std::size_t j : half_dphi_indices()) {
        const std::size_t mirror = n - 1 - j;
        const bool paired = mirror != j && std::abs(dphi.nodes[mirror] - (2.0 * kPi - dphi.nodes[j])) < 1e-9;
        h.nodes.push_back(dphi.nodes[j]);
        h.weights.push_back(paired ? dphi.weights[j] + dphi.weights[mirror] : dphi.weights[j]);
    }
    double total = 0, half = 0;
    for (double w : dphi.weights) total += w;
    for (double w : h.weights) half += w;
    if (std::abs(total - half) > 1e-9 * total)
        throw ConfigError("dphi grid is not symmetric about pi; half-interval folding unavailable");
    return h;
}

FilterSpec FilterSpec::gaussian(double center, double fwhm) {
    FilterSpec f{center, fwhm, true};
    f.validate();
    return f;
}

void FilterSpec::validate() const {
    if (enabled && !(fwhm > 0 && center > 0)) throw ConfigError("enabled filter needs positive center and FWHM");
}

double filter_amplitude(const FilterSpec& filter, double wavelength) {
    if (!filter.enabled) return 1.0;
    const double x = (wavelength - filter.center) / filter.fwhm;
    return std::exp(-2.0 * std::log(2.0) * x * x);
}

double epsilon_of_lambda(double wavelength, double center, const DispersionModel& model, Axis axis,
                         double temperature) {
    const double n = model.index(axis, wavelength, temperature);
    const double nc = model.index(axis, center, temperature);
    return 2.0 * kPi * kSpeedOfLight * (n / wavelength - nc / center);
}

double lambda_of_epsilon(double eps, double center, const DispersionModel& model, Axis axis, double temperature) {
    if (eps == 0.0) return center;
    // eps(l) decreases monotonically: widen a bracket on the right side of
    // the centre, then bisect.
    auto f = [&](double l) { return epsilon_of_lambda(l, center, model, axis, temperature) - eps; };
    const double dir = eps > 0 ? -1.0 : 1.0;
    double inner = center, step = center * 1e-4;
    double outer = center + dir * step;
    for (;;) {
        outer = std::clamp(outer, model.lambda_min, model.lambda_max);
        if ((f(outer) > 0) == (eps > 0)) break;  // sign flipped from f(center) = -eps
        if (outer == model.lambda_min || outer == model.lambda_max)
            throw DomainError("frequency offset maps outside the dataset wavelength range");
        inner = outer;
        step *= 2;
        outer = center + dir * step;
    }
    double a = std::min(inner, outer), b = std::max(inner, outer);
    const bool fa_pos = f(a) > 0;
    for (int iter = 0; iter < 200 && b - a > 1e-19; ++iter) {
        const double mid = 0.5 * (a + b);
        ((f(mid) > 0) == fa_pos ? a : b) = mid;
    }
    return 0.5 * (a + b);
}

double waist_from_xi(double length, double wavelength, double index, double xi, WaistConvention convention) {
    if (!(xi > 0 && length > 0 && wavelength > 0)) throw ConfigError("focusing parameter xi must be positive");
    const double lam = convention == WaistConvention::Medium ? wavelength / index : wavelength;
    return std::sqrt(length * lam / (kPi * xi));
}

double xi_from_waist(double length, double wavelength, double index, double waist, WaistConvention convention) {
    if (!(waist > 0)) throw ConfigError("waist must be positive");
    const double lam = convention == WaistConvention::Medium ? wavelength / index : wavelength;
    return length * lam / (kPi * waist * waist);
}

PumpSpec PumpSpec::from_xi(double length, double wavelength, double index, double xi, WaistConvention convention) {
    PumpSpec p;
    p.wavelength = wavelength;
    p.waist = waist_from_xi(length, wavelength, index, xi, convention);
    p.k_z = 2.0 * kPi * index / wavelength;
    return p;
}

double PumpSpec::xi(double length, double index, WaistConvention convention) const {
    return xi_from_waist(length, wavelength, index, waist, convention);
}

double pump_angular_spectrum(const PumpSpec& pump, double theta) {
    const double kw = pump.k_z * pump.waist;
    const double s = std::sin(theta);
    return kw / std::sqrt(2.0 * kPi) * std::exp(-kw * kw * s * s / 4.0);
}

double pump_power_normalization(const PumpSpec& pump, AngularMeasure measure) {
    const double kw = pump.k_z * pump.waist;
    if (measure == AngularMeasure::Spherical) return kw / std::sqrt(2.0 * kPi);
    // One-dimensional Gaussian: integral of exp(-(kw t)^2/2) dt = sqrt(2 pi)/kw.
    return std::sqrt(kw) / std::pow(2.0 * kPi, 0.25);
}

double transverse_match(double k_s, double theta_s, double k_i, double theta_i, double dphi, double k_p) {
    const double a = k_s * std::sin(theta_s);
    const double b = k_i * std::sin(theta_i);
    return (a * a + b * b + 2.0 * a * b * std::cos(dphi)) / (k_p * k_p);
}

std::optional<double> delta_kz_prime(double k_s, double theta_s, double k_i, double theta_i, double dphi,
                                     double k_p, double grating_constant) {
    const double pq = transverse_match(k_s, theta_s, k_i, theta_i, dphi, k_p);
    if (pq > 1.0) return std::nullopt;
    return k_s * std::cos(theta_s) + k_i * std::cos(theta_i) - k_p * std::sqrt(1.0 - pq) + grating_constant;
}

double longitudinal_sinc(const CrystalConfig& config, double delta_kz) {
    const double L = config.length;
    const double K = config.grating_constant();
    double sum = 0.0;
    for (int m = 0; m <= config.grating_terms; ++m) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        sum += sign / (2 * m + 1) * sinc(0.5 * L * (delta_kz + 2.0 * m * K));
    }
    return 4.0 / kPi * sum;
}

AmplitudeModel::AmplitudeModel(AmplitudeSetup setup) : setup_(std::move(setup)) {
    const auto& c = setup_.crystal;
    c.validate(setup_.dispersion);
    setup_.triplet.validate();
    setup_.filter_s.validate();
    setup_.filter_i.validate();
    setup_.grid.validate();
    if (!(setup_.pump.waist > 0)) throw ConfigError("pump waist must be positive");
    k_ = spdc::wave_numbers(setup_.dispersion, c, setup_.triplet);
    // The pump k stored in PumpSpec wins if set so callers control it.
    if (!(setup_.pump.k_z > 0)) setup_.pump.k_z = k_.kp_z;
    k_.kp_z = setup_.pump.k_z;
    scale_ = setup_.prefactor * c.length * pump_power_normalization(setup_.pump, setup_.grid.measure);
    auto trig = [](const QuadratureAxis& a, std::vector<double>& s, std::vector<double>& co) {
        s.resize(a.size());
        co.resize(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            s[j] = std::sin(a.nodes[j]);
            co[j] = std::cos(a.nodes[j]);
        }
    };
    trig(setup_.grid.theta_s, sin_s_, cos_s_);
    trig(setup_.grid.theta_i, sin_i_, cos_i_);
    for (double e : setup_.grid.eps.nodes) freq_.push_back(make_frequency_point(e));
}

FrequencyPoint AmplitudeModel::make_frequency_point(double eps) const {
    const auto& s = setup_;
    FrequencyPoint f;
    f.eps = eps;
    f.lambda_s = lambda_of_epsilon(eps, s.triplet.lambda_s, s.dispersion, s.crystal.axes.signal, s.crystal.temperature);
    f.lambda_i = energy_match_idler(s.triplet.lambda_p, f.lambda_s);
    f.filter_s = filter_amplitude(s.filter_s, f.lambda_s);
    f.filter_i = filter_amplitude(s.filter_i, f.lambda_i);
    f.filter = f.filter_s * f.filter_i;
    const auto [ksz, ksy] = axis_wave_numbers(s.dispersion, s.crystal.axes.signal, f.lambda_s, s.crystal.temperature);
    const auto [kiz, kiy] = axis_wave_numbers(s.dispersion, s.crystal.axes.idler, f.lambda_i, s.crystal.temperature);
    f.k_s.resize(s.grid.theta_s.size());
    f.k_i.resize(s.grid.theta_i.size());
    for (std::size_t m = 0; m < f.k_s.size(); ++m) f.k_s[m] = k_of_theta(ksz, ksy, s.grid.theta_s.nodes[m]);
    for (std::size_t n = 0; n < f.k_i.size(); ++n) f.k_i[n] = k_of_theta(kiz, kiy, s.grid.theta_i.nodes[n]);
    return f;
}

void AmplitudeModel::fill(double dphi, const FrequencyPoint& f, Eigen::MatrixXd& out, bool apply_filters) const {
    const std::size_t ns = sin_s_.size(), ni = sin_i_.size();
    out.resize(ns, ni);
    const double kp = k_.kp_z;
    const double kw = setup_.pump.k_z * setup_.pump.waist;
    const double gauss = kw * kw / 4.0;
    const double K = setup_.crystal.grating_constant();
    const double L = setup_.crystal.length;
    const int M = setup_.crystal.grating_terms;
    const double cphi = std::cos(dphi);
    const double amp = scale_ * (apply_filters ? f.filter : 1.0) * 4.0 / kPi;
    const double inv_kp2 = 1.0 / (kp * kp);
    for (std::size_t n = 0; n < ni; ++n) {
        const double b = f.k_i[n] * sin_i_[n];
        const double kzi = f.k_i[n] * cos_i_[n];
        for (std::size_t m = 0; m < ns; ++m) {
            const double a = f.k_s[m] * sin_s_[m];
            const double pq = (a * a + b * b + 2.0 * a * b * cphi) * inv_kp2;
            if (pq > 1.0) {
                out(m, n) = 0.0;
                continue;
            }
            const double dk = f.k_s[m] * cos_s_[m] + kzi - kp * std::sqrt(1.0 - pq) + K;
            double s = sinc(0.5 * L * dk);
            for (int j = 1; j <= M; ++j)
                s += ((j % 2 == 0) ? 1.0 : -1.0) / (2 * j + 1) * sinc(0.5 * L * (dk + 2.0 * j * K));
            out(m, n) = amp * std::exp(-gauss * pq) * s;
        }
    }
}

AmplitudeSlice AmplitudeModel::slice(std::size_t iphi, std::size_t ieps) const {
    AmplitudeSlice s;
    s.dphi = setup_.grid.dphi.nodes.at(iphi);
    s.eps = setup_.grid.eps.nodes.at(ieps);
    fill(s.dphi, freq_.at(ieps), s.values);
    return s;
}

AmplitudeSlice AmplitudeModel::slice_at(double dphi, double eps) const {
    AmplitudeSlice s;
    s.dphi = dphi;
    s.eps = eps;
    fill(dphi, make_frequency_point(eps), s.values);
    return s;
}

AmplitudeSlice build_slice(const AmplitudeSetup& setup, double dphi, double eps) {
    return AmplitudeModel(setup).slice_at(dphi, eps);
}

double default_theta_max(double k_photon, double k_pump, double pump_waist, double length) {
    // exp(-(k w sin t)^2 / 4) = 1e-4 with the partner on axis.
    const double s = 2.0 * std::sqrt(std::log(1e4)) / (k_photon * pump_waist);
    const double t_pump = s < 1.0 ? std::asin(s) : kPi / 2;
    // dk ~ -(k t^2 / 2)(1 - k/kp); third zero at L|dk|/2 = 3 pi.
    const double curvature = k_photon * (1.0 - k_photon / k_pump);
    const double t_sinc = curvature > 0 ? std::sqrt(12.0 * kPi / (length * curvature)) : t_pump;
    return std::min(std::max(t_pump, t_sinc), 1.2);
}

double colinear_bandwidth(const CrystalConfig& config, const DispersionModel& model, const WaveTriplet& triplet) {
    const double kp = axis_wave_numbers(model, config.axes.pump, triplet.lambda_p, config.temperature).first;
    const double K = config.grating_constant();
    auto response = [&](double ls) {
        const double li = energy_match_idler(triplet.lambda_p, ls);
        const double ks = axis_wave_numbers(model, config.axes.signal, ls, config.temperature).first;
        const double ki = axis_wave_numbers(model, config.axes.idler, li, config.temperature).first;
        const double x = sinc(0.5 * config.length * (ks + ki - kp + K));
        return x * x;
    };
    const double peak = response(triplet.lambda_s);
    auto edge = [&](double dir) {
        double inner = triplet.lambda_s, step = 1e-12;
        double outer = inner + dir * step;
        while (response(outer) > 0.5 * peak) {
            inner = outer;
            step *= 2;
            outer = triplet.lambda_s + dir * step;
            if (step > 0.2 * triplet.lambda_s) throw NumericalError("colinear bandwidth search diverged");
        }
        for (int i = 0; i < 100; ++i) {
            const double mid = 0.5 * (inner + outer);
            (response(mid) > 0.5 * peak ? inner : outer) = mid;
        }
        return 0.5 * (inner + outer);
    };
    return edge(+1.0) - edge(-1.0);
}

}  // namespace spdc
