#include "spdc/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

namespace {

StreamOptions stream_options(const Scenario& s) { return {std::max(1, s.threads), 4}; }

double photon_index(const Scenario& s, Axis axis, double wavelength) {
    return s.dispersion.index(axis, wavelength, s.crystal.temperature);
}

}  // namespace

Scenario resolve_scenario(Scenario s) {
    if (s.auto_temperature) {
        const WaveTriplet t = WaveTriplet::from_pump_signal(s.lambda_p, s.lambda_s);
        s.crystal.temperature = solve_qpm_temperature(s.crystal, s.dispersion, t, s.temperature_range);
        s.auto_temperature = false;
    }
    s.crystal.validate(s.dispersion);
    return s;
}

PhaseMatchResult phase_match(const Scenario& scenario) {
    const Scenario s = resolve_scenario(scenario);
    const WaveTriplet t = WaveTriplet::from_pump_signal(s.lambda_p, s.lambda_s);
    PhaseMatchResult r;
    r.temperature = s.crystal.temperature;
    r.mismatch = qpm_mismatch(s.crystal, s.dispersion, t);
    r.grating_constant = s.crystal.grating_constant();
    r.lambda_i = t.lambda_i;
    r.n_p = photon_index(s, s.crystal.axes.pump, t.lambda_p);
    r.n_s = photon_index(s, s.crystal.axes.signal, t.lambda_s);
    r.n_i = photon_index(s, s.crystal.axes.idler, t.lambda_i);
    r.colinear_bandwidth = colinear_bandwidth(s.crystal, s.dispersion, t);
    return r;
}

Experiment::Experiment(const Scenario& scenario, double length, double xi_p)
    : scenario_(resolve_scenario(scenario)), xi_p_(xi_p) {
    const Scenario& s = scenario_;
    crystal_ = s.crystal;
    crystal_.length = length;
    crystal_.validate(s.dispersion);
    triplet_ = WaveTriplet::from_pump_signal(s.lambda_p, s.lambda_s);
    n_p_ = photon_index(s, crystal_.axes.pump, triplet_.lambda_p);
    n_s_ = photon_index(s, crystal_.axes.signal, triplet_.lambda_s);
    n_i_ = photon_index(s, crystal_.axes.idler, triplet_.lambda_i);
    k_s_ = 2.0 * kPi * n_s_ / triplet_.lambda_s;
    k_i_ = 2.0 * kPi * n_i_ / triplet_.lambda_i;
    pump_ = PumpSpec::from_xi(length, triplet_.lambda_p, n_p_, xi_p, s.convention);

    const double colinear = colinear_bandwidth(crystal_, s.dispersion, triplet_);
    const Axis sig = crystal_.axes.signal;
    sm_eps_ = std::abs(epsilon_of_lambda(triplet_.lambda_s - 0.5 * colinear, triplet_.lambda_s, s.dispersion, sig,
                                         crystal_.temperature) -
                       epsilon_of_lambda(triplet_.lambda_s + 0.5 * colinear, triplet_.lambda_s, s.dispersion, sig,
                                         crystal_.temperature));

    // Width conversion between the arms at equal frequency width.
    const double to_idler = std::pow(triplet_.lambda_i / triplet_.lambda_s, 2);
    auto resolve = [&](const FilterConfig& f, double lambda0, double narrow_width) -> FilterSpec {
        switch (f.kind) {
            case FilterConfig::Kind::None:
            case FilterConfig::Kind::Matched: return FilterSpec::none();
            case FilterConfig::Kind::Narrow:
                return FilterSpec::gaussian(f.center > 0 ? f.center : lambda0, s.narrow_fraction * narrow_width);
            case FilterConfig::Kind::Gaussian: return FilterSpec::gaussian(f.center > 0 ? f.center : lambda0, f.fwhm);
        }
        return FilterSpec::none();
    };
    filter_s_ = resolve(s.filter_s, triplet_.lambda_s, colinear);
    filter_i_ = resolve(s.filter_i, triplet_.lambda_i, colinear * to_idler);
    if (s.filter_s.kind == FilterConfig::Kind::Matched && filter_i_.enabled)
        filter_s_ = FilterSpec::gaussian(triplet_.lambda_s, filter_i_.fwhm / to_idler);
    if (s.filter_i.kind == FilterConfig::Kind::Matched && filter_s_.enabled)
        filter_i_ = FilterSpec::gaussian(triplet_.lambda_i, filter_s_.fwhm * to_idler);

    theta_max_s_ = s.theta_max_s.value_or(default_theta_max(k_s_, pump_.k_z, pump_.waist, length));
    theta_max_i_ = s.theta_max_i.value_or(default_theta_max(k_i_, pump_.k_z, pump_.waist, length));
}

double Experiment::wave_number(Photon p) const { return p == Photon::Signal ? k_s_ : k_i_; }

double Experiment::band_eps(Photon p) const {
    const FilterSpec& f = filter(p);
    if (!f.enabled) return scenario_.eps_sm_widths * sm_eps_;
    // sigma of |A|^2 in wavelength, mapped to eps through the signal arm.
    const double sigma = f.fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    auto eps_of = [&](double lambda) {
        const double ls = p == Photon::Signal ? lambda : energy_match_idler(triplet_.lambda_p, lambda);
        return epsilon_of_lambda(ls, triplet_.lambda_s, scenario_.dispersion, crystal_.axes.signal,
                                 crystal_.temperature);
    };
    const double lam0 = wavelength(p);
    const double sigma_eps = 0.5 * std::abs(eps_of(lam0 + sigma) - eps_of(lam0 - sigma));
    return scenario_.eps_sigmas * sigma_eps;
}

QuadratureAxis composite_eps_axis(double inner, int n_inner, double outer, int n_outer) {
    if (!(inner > 0) || n_inner < 1) throw ConfigError("eps window must be positive");
    QuadratureAxis a;
    auto cells = [&](double lo, double hi, int n) {
        const double h = (hi - lo) / n;
        for (int j = 0; j < n; ++j) {
            a.nodes.push_back(lo + (j + 0.5) * h);
            a.weights.push_back(h);
        }
    };
    if (!(outer > inner * 1.05)) {
        cells(-inner, inner, n_inner);
        return a;
    }
    const int side = std::max(1, static_cast<int>(std::lround(0.5 * n_outer * (outer - inner) / outer)));
    cells(-outer, -inner, side);
    cells(-inner, inner, n_inner);
    cells(inner, outer, side);
    return a;
}

SimulationGrid Experiment::grid(BandCover cover) const {
    std::vector<std::pair<double, bool>> bands;  // half-width, filtered
    if (cover.signal) bands.emplace_back(band_eps(Photon::Signal), filter_s_.enabled);
    if (cover.idler) bands.emplace_back(band_eps(Photon::Idler), filter_i_.enabled);
    if (bands.empty()) throw ConfigError("eps grid must cover at least one photon");
    std::sort(bands.begin(), bands.end());
    const int n_filter = scenario_.grid_n_eps();
    const int n_sm = std::max(n_filter, scenario_.grid_n_eps_spectrum() / 2);
    const auto& [inner, inner_filtered] = bands.front();
    const auto& [outer, outer_filtered] = bands.back();
    SimulationGrid g = SimulationGrid::make(scenario_.grid_n_theta(), theta_max_s_, theta_max_i_,
                                            scenario_.grid_n_phi(), 1, 0.0, scenario_.measure);
    g.eps = composite_eps_axis(inner, inner_filtered ? n_filter : n_sm, outer, outer_filtered ? n_filter : n_sm);
    g.validate();
    return g;
}

SimulationGrid Experiment::spectrum_grid(int n_eps, double half_span) const {
    return SimulationGrid::make(scenario_.grid_n_theta(), theta_max_s_, theta_max_i_, scenario_.grid_n_phi(), n_eps,
                                half_span, scenario_.measure);
}

AmplitudeModel Experiment::model(const SimulationGrid& grid) const {
    AmplitudeSetup setup{crystal_, scenario_.dispersion, triplet_, pump_, filter_s_, filter_i_, grid, 1.0};
    return AmplitudeModel(std::move(setup));
}

FiberMode Experiment::fiber(Photon p, double xi, const SimulationGrid& grid) const {
    const double w = waist_from_xi(crystal_.length, wavelength(p), index(p), xi, scenario_.convention);
    const QuadratureAxis& axis = p == Photon::Signal ? grid.theta_s : grid.theta_i;
    return fiber_matched_mode(w, scenario_.fiber_z_offset, wave_number(p), axis.nodes, axis.weights);
}

FocusOptimum golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(hi > lo)) throw ConfigError("optimizer bounds are empty");
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    FocusOptimum r;
    const double f_lo = f(lo), f_hi = f(hi);
    double a = lo, b = hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    r.evaluations = 4;
    while (b - a > tol) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
        ++r.evaluations;
    }
    r.xi = f1 >= f2 ? x1 : x2;
    r.value = std::max(f1, f2);
    if (f_lo > r.value || f_hi > r.value) {
        const bool low = f_lo >= f_hi;
        r.xi = low ? lo : hi;
        r.value = low ? f_lo : f_hi;
    }
    if (r.xi - lo < tol || hi - r.xi < tol) {
        r.boundary = true;
        r.warning = "optimum at the search boundary xi = " + std::to_string(r.xi);
    }
    return r;
}

FocusOptimum optimize_fiber_focus(const Experiment& ex, const ModeDecomposition& decomp, Photon photon,
                                  const SimulationGrid& grid) {
    const SweepSettings& sw = ex.scenario().sweep;
    return golden_section_max(
        [&](double xi) { return single_coupling(decomp, ex.fiber(photon, xi, grid)); }, sw.xi_lo, sw.xi_hi,
        sw.xi_tol);
}

ModeDecomposition single_photon_modes(const Experiment& ex, Photon photon, SimulationGrid* grid_out) {
    const bool sig = photon == Photon::Signal;
    SimulationGrid grid = ex.grid({sig, !sig});
    const AmplitudeModel model = ex.model(grid);
    StateRequest req;
    req.signal_density = sig;
    req.idler_density = !sig;
    const EmissionState st = accumulate_state(model, req, stream_options(ex.scenario()));
    ModeDecomposition d = diagonalize(st.density(photon, sig, !sig));
    if (grid_out) *grid_out = std::move(grid);
    return d;
}

SingleCouplingResult optimize_single(const Scenario& scenario, Photon photon, double length, double xi_p) {
    const Experiment ex(scenario, length, xi_p);
    SimulationGrid grid;
    const ModeDecomposition d = single_photon_modes(ex, photon, &grid);
    SingleCouplingResult r;
    r.xi_p = xi_p;
    r.length = length;
    r.lambda1 = d.eigenvalues[0];
    r.optimum = optimize_fiber_focus(ex, d, photon, grid);
    const double xi_fixed = photon == Photon::Signal ? scenario.focus.xi_s : scenario.focus.xi_i;
    r.gamma_at_fixed = single_coupling(d, ex.fiber(photon, xi_fixed, grid));
    return r;
}

namespace {

struct PairState {
    SimulationGrid grid;
    ModeDecomposition ds, di;
    EmissionState state;
};

PairState pair_state(const Experiment& ex) {
    PairState p;
    p.grid = ex.grid({true, true});
    const AmplitudeModel model = ex.model(p.grid);
    p.state = accumulate_state(model, {true, true, true}, stream_options(ex.scenario()));
    p.ds = diagonalize(p.state.density(Photon::Signal, true, false));
    p.di = diagonalize(p.state.density(Photon::Idler, false, true));
    return p;
}

CouplingReport report_at(const Experiment& ex, const PairState& p, double xi_s, double xi_i) {
    const FiberMode gs = ex.fiber(Photon::Signal, xi_s, p.grid);
    const FiberMode gi = ex.fiber(Photon::Idler, xi_i, p.grid);
    CouplingReport r;
    r.gamma_s = single_coupling(p.ds, gs);
    r.gamma_i = single_coupling(p.di, gi);
    r.mu_is = conditional_coincidence(diagonalize(conditional_project(p.state.coherent, gs, Photon::Signal)), gi);
    r.mu_si = conditional_coincidence(diagonalize(conditional_project(p.state.coherent, gi, Photon::Idler)), gs);
    r.gamma_c = pair_coupling(r.mu_is, r.gamma_s);
    r.gamma_c_alt = pair_coupling(r.mu_si, r.gamma_i);
    r.eta = pair_symmetry(r.mu_si, r.mu_is);
    r.bayes_gap = std::abs(r.gamma_c - r.gamma_c_alt);
    r.xi_p = ex.xi_p();
    r.xi_s = xi_s;
    r.xi_i = xi_i;
    r.length = ex.crystal().length;
    r.filters = "signal=" + ex.scenario().filter_s.describe() + ";idler=" + ex.scenario().filter_i.describe();
    return r;
}

}  // namespace

CouplingReport evaluate_coupling(const Scenario& scenario, double length, const FocusParams& focus) {
    const Experiment ex(scenario, length, focus.xi_p);
    const PairState p = pair_state(ex);
    return report_at(ex, p, focus.xi_s, focus.xi_i);
}

PairOptimum optimize_pair_focus(const Scenario& scenario, double length, double xi_p) {
    const Experiment ex(scenario, length, xi_p);
    const PairState p = pair_state(ex);
    const SweepSettings& sw = ex.scenario().sweep;
    double xs = scenario.focus.xi_s, xi = scenario.focus.xi_i;
    PairOptimum out;
    for (int round = 0; round < 3; ++round) {
        // Signal fiber pass: the conditioned idler state changes with xi_s.
        const FiberMode gi_fixed = ex.fiber(Photon::Idler, xi, p.grid);
        xs = golden_section_max(
                 [&](double x) {
                     const FiberMode gs = ex.fiber(Photon::Signal, x, p.grid);
                     const double mu =
                         conditional_coincidence(diagonalize(conditional_project(p.state.coherent, gs, Photon::Signal)),
                                                 gi_fixed);
                     return mu * single_coupling(p.ds, gs);
                 },
                 sw.xi_lo, sw.xi_hi, sw.xi_tol)
                 .xi;
        // Idler fiber pass: the conditioned state is fixed, only the overlap moves.
        const FiberMode gs_fixed = ex.fiber(Photon::Signal, xs, p.grid);
        const ModeDecomposition cond = diagonalize(conditional_project(p.state.coherent, gs_fixed, Photon::Signal));
        const double gamma_s = single_coupling(p.ds, gs_fixed);
        xi = golden_section_max(
                 [&](double x) { return gamma_s * conditional_coincidence(cond, ex.fiber(Photon::Idler, x, p.grid)); },
                 sw.xi_lo, sw.xi_hi, sw.xi_tol)
                 .xi;
        out.rounds = round + 1;
    }
    out.report = report_at(ex, p, xs, xi);
    return out;
}

std::vector<LengthRow> sweep_coupling_vs_length(const Scenario& scenario, Photon photon,
                                                const std::vector<double>& lengths, double xi_p, double xi_fiber) {
    if (lengths.empty()) throw ConfigError("length sweep needs at least one length");
    for (std::size_t j = 1; j < lengths.size(); ++j)
        if (!(lengths[j] > lengths[j - 1])) throw ConfigError("length sweep must be strictly increasing");
    const Scenario s = resolve_scenario(scenario);
    std::vector<LengthRow> rows;
    for (double L : lengths) {
        const Experiment ex(s, L, xi_p);
        SimulationGrid grid;
        const ModeDecomposition d = single_photon_modes(ex, photon, &grid);
        const FocusOptimum opt = optimize_fiber_focus(ex, d, photon, grid);
        rows.push_back({L, single_coupling(d, ex.fiber(photon, xi_fiber, grid)), opt.xi, opt.value});
    }
    return rows;
}

SurfaceResult sweep_coupling_surface(const Scenario& scenario, Photon photon, const std::vector<double>& xi_p,
                                     const std::vector<double>& xi_fiber, double length) {
    const Scenario s = resolve_scenario(scenario);
    SurfaceResult out;
    for (double xp : xi_p) {
        const Experiment ex(s, length, xp);
        SimulationGrid grid;
        const ModeDecomposition d = single_photon_modes(ex, photon, &grid);
        for (double xf : xi_fiber) out.cells.push_back({xp, xf, single_coupling(d, ex.fiber(photon, xf, grid))});
        const FocusOptimum opt = optimize_fiber_focus(ex, d, photon, grid);
        out.ridge.push_back({xp, opt.xi, opt.value});
    }
    return out;
}

double fwhm_linear(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw DomainError("FWHM needs matching samples");
    const std::size_t peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double half = 0.5 * y[peak];
    auto crossing = [&](int dir) -> std::optional<double> {
        for (long j = static_cast<long>(peak); j + dir >= 0 && j + dir < static_cast<long>(y.size()); j += dir) {
            const double y0 = y[j], y1 = y[j + dir];
            if (y1 < half) return x[j] + (half - y0) / (y1 - y0) * (x[j + dir] - x[j]);
        }
        return std::nullopt;
    };
    const auto lo = crossing(-1), hi = crossing(+1);
    if (!lo || !hi) return -1.0;
    return std::abs(*hi - *lo);
}

BandwidthPoint sm_bandwidth(const Scenario& scenario, Photon photon, double length, const FocusParams& focus) {
    Scenario s = resolve_scenario(scenario);
    s.filter_s = FilterConfig::none();
    s.filter_i = FilterConfig::none();
    const Experiment ex(s, length, focus.xi_p);
    const double xi = photon == Photon::Signal ? focus.xi_s : focus.xi_i;
    double span = s.eps_sm_widths * ex.sm_eps();
    BandwidthPoint bp;
    bp.length = length;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const SimulationGrid grid = ex.spectrum_grid(s.grid_n_eps_spectrum(), span);
        const AmplitudeModel model = ex.model(grid);
        const std::vector<double> dens = coupled_spectrum(model, photon, ex.fiber(photon, xi, grid), stream_options(s));
        // Order by wavelength (eps runs opposite to wavelength).
        std::vector<std::pair<double, double>> pts;
        for (std::size_t e = 0; e < dens.size(); ++e) {
            const FrequencyPoint& f = model.frequency(e);
            pts.emplace_back(photon == Photon::Signal ? f.lambda_s : f.lambda_i, dens[e]);
        }
        std::sort(pts.begin(), pts.end());
        bp.wavelength.clear();
        bp.density.clear();
        for (const auto& [l, d] : pts) {
            bp.wavelength.push_back(l);
            bp.density.push_back(d);
        }
        bp.fwhm = fwhm_linear(bp.wavelength, bp.density);
        if (bp.fwhm > 0) return bp;
        span *= 2.0;
        bp.widened = true;
    }
    throw NumericalError("single-mode bandwidth not bracketed by the eps grid even after widening");
}

BandwidthFit fit_bandwidth_law(std::vector<BandwidthPoint> points) {
    if (points.empty()) throw DomainError("bandwidth fit needs points");
    double num = 0, den = 0;
    for (const auto& p : points) {
        num += p.fwhm / p.length;
        den += 1.0 / (p.length * p.length);
    }
    BandwidthFit f;
    f.B = num / den;
    double ss = 0;
    for (const auto& p : points) ss += std::pow((p.fwhm - f.B / p.length) / p.fwhm, 2);
    f.rms_relative = std::sqrt(ss / points.size());
    f.points = std::move(points);
    return f;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs at least two points");
    double mx = 0, my = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!(x[j] > 0 && y[j] > 0)) throw DomainError("log-log fit needs positive values");
        mx += std::log(x[j]);
        my += std::log(y[j]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        sxy += (std::log(x[j]) - mx) * (std::log(y[j]) - my);
        sxx += std::pow(std::log(x[j]) - mx, 2);
    }
    return sxy / sxx;
}

FluxResult relative_flux(const Scenario& scenario, const std::vector<double>& lengths, double filter_fwhm,
                         const FocusParams& focus) {
    Scenario s = resolve_scenario(scenario);
    s.filter_s = FilterConfig::gaussian(filter_fwhm);
    s.filter_i = FilterConfig::none();
    FluxResult out;
    out.filter_fwhm = filter_fwhm;
    std::vector<double> ls, fs;
    for (double L : lengths) {
        const Experiment ex(s, L, focus.xi_p);
        // Coupled emission is negligible beyond a few single-mode widths,
        // so wide filters are integrated over that band only.
        const double window = std::min(ex.band_eps(Photon::Signal), 10.0 * ex.sm_eps());
        // A window inside a few single-mode widths sees a smooth spectrum.
        const bool smooth = window <= s.eps_sm_widths * ex.sm_eps();
        const SimulationGrid grid = ex.spectrum_grid(smooth ? s.grid_n_eps() : s.grid_n_eps_spectrum(), window);
        const AmplitudeModel model = ex.model(grid);
        const std::vector<double> dens =
            coupled_spectrum(model, Photon::Signal, ex.fiber(Photon::Signal, focus.xi_s, grid), stream_options(s));
        double flux = 0.0;
        for (std::size_t e = 0; e < dens.size(); ++e) {
            const double a = model.frequency(e).filter_s;
            flux += grid.eps.weights[e] * a * a * dens[e];
        }
        out.points.push_back({L, flux, 0.0});
        ls.push_back(L);
        fs.push_back(flux);
    }
    for (auto& p : out.points) p.relative = p.flux / out.points.front().flux;
    out.slope = lengths.size() >= 2 ? log_log_slope(ls, fs) : 0.0;
    return out;
}

M2Point m2_point(const Scenario& scenario, Photon photon, double length, double xi_p) {
    const Experiment ex(scenario, length, xi_p);
    SimulationGrid grid;
    const ModeDecomposition d = single_photon_modes(ex, photon, &grid);
    const SweepSettings& sw = ex.scenario().sweep;
    FieldGridSpec spec;
    spec.size = ex.scenario().grid_fft_size();
    spec.k = ex.wave_number(photon);
    spec.theta_max = ex.theta_max(photon);
    std::vector<double> z(static_cast<std::size_t>(std::max(5, sw.m2_z_points)));
    for (std::size_t j = 0; j < z.size(); ++j)
        z[j] = sw.m2_z_span * length * (2.0 * static_cast<double>(j) / (z.size() - 1) - 1.0);
    const std::vector<double>& theta = photon == Photon::Signal ? grid.theta_s.nodes : grid.theta_i.nodes;
    M2Point r;
    r.xi_p = xi_p;
    r.lambda1 = d.eigenvalues[0];
    r.caustic = measure_caustic(d, theta, spec, z, static_cast<std::size_t>(std::max(1, sw.m2_modes)),
                                ex.scenario().threads);
    r.fit = fit_m2(r.caustic, 2.0 * kPi / spec.k);
    return r;
}

bool is_u_shaped(const std::vector<double>& v, double slack) {
    if (v.size() < 3) return false;
    const std::size_t m = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
    if (m == 0 || m + 1 == v.size()) return false;
    for (std::size_t j = 0; j < m; ++j)
        if (v[j + 1] > v[j] + slack) return false;
    for (std::size_t j = m; j + 1 < v.size(); ++j)
        if (v[j + 1] < v[j] - slack) return false;
    return true;
}

}  // namespace spdc
