// spdc: command-line front end for the simulator.
#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "spdc/errors.hpp"
#include "spdc/output.hpp"
#include "spdc/parallel.hpp"
#include "spdc/sweeps.hpp"
#include "spdc/units.hpp"

namespace fs = std::filesystem;
using namespace spdc;

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    std::string profile;
    bool deterministic = false;
    int threads = 0;
    bool svg = false;
    int points = 0;
    std::vector<double> xi_p;
    std::string photon = "signal";
    std::string length;
    std::string kind = "length";
    std::string objective = "pair";
};

struct Context {
    Options opt;
    Scenario s;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    double length() const { return opt.length.empty() ? s.crystal.length : parse_length(opt.length); }
    Photon photon() const {
        if (opt.photon == "signal") return Photon::Signal;
        if (opt.photon == "idler") return Photon::Idler;
        throw ConfigError("--photon must be signal or idler");
    }
    std::vector<double> xi_p_values(const std::vector<double>& fallback) const {
        return opt.xi_p.empty() ? fallback : opt.xi_p;
    }
};

Context make_context(const Options& opt) {
    Context c;
    c.opt = opt;
    c.s = opt.config.empty() ? Scenario::defaults() : load_scenario(opt.config);
    if (!opt.profile.empty()) c.s.profile = ResolutionProfile::by_name(opt.profile);
    if (opt.threads > 0) c.s.threads = opt.threads;
    else if (std::getenv("SPDC_THREADS")) c.s.threads = resolve_thread_count(0);
    if (opt.deterministic) c.s.deterministic = true;
    if (opt.points < 0) throw ConfigError("--points must be positive");
    c.s = resolve_scenario(c.s);
    std::cerr << "grid: profile=" << c.s.profile.name << " n_theta=" << c.s.grid_n_theta()
              << " n_phi=" << c.s.grid_n_phi() << " n_eps=" << c.s.grid_n_eps()
              << " n_eps_spectrum=" << c.s.grid_n_eps_spectrum() << " fft=" << c.s.grid_fft_size()
              << " threads=" << c.s.threads << "\n";
    return c;
}

void add_common_meta(ResultTable& t, const Context& c) {
    t.add_meta("profile", c.s.profile.name);
    t.add_meta("grid", "n_theta=" + std::to_string(c.s.grid_n_theta()) + " n_phi=" + std::to_string(c.s.grid_n_phi()) +
                           " n_eps=" + std::to_string(c.s.grid_n_eps()) +
                           " n_eps_spectrum=" + std::to_string(c.s.grid_n_eps_spectrum()) +
                           " fft=" + std::to_string(c.s.grid_fft_size()));
    t.add_meta("temperature_C", c.s.crystal.temperature);
    t.add_meta("poling_period_m", c.s.crystal.poling_period);
    t.add_meta("lambda_p_m", c.s.lambda_p);
    t.add_meta("lambda_s_m", c.s.lambda_s);
    t.add_meta("filters", "signal=" + c.s.filter_s.describe() + " idler=" + c.s.filter_i.describe());
    t.add_meta("measure", c.s.measure == AngularMeasure::Planar ? "planar" : "spherical");
    t.add_meta("waist_convention", c.s.convention == WaistConvention::Medium ? "medium" : "vacuum");
    if (!c.opt.config.empty()) t.add_meta("config", c.opt.config);
}

void finish(ResultTable& t, const Context& c, const std::string& name) {
    if (!c.s.deterministic) t.add_meta("wall_time_s", c.elapsed());
    const fs::path path = fs::path(c.opt.out) / (name + ".csv");
    t.write(path);
    std::cerr << "wrote " << path.string() << " (" << t.rows() << " rows)\n";
}

void maybe_svg(const Context& c, const std::string& name, const std::string& svg) {
    if (!c.opt.svg) return;
    write_text(fs::path(c.opt.out) / (name + ".svg"), svg);
}

std::vector<double> linspace(double a, double b, int n) {
    if (n == 1) return {a};
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = a + (b - a) * j / (n - 1);
    return v;
}

int run_phase_match(const Context& c) {
    const PhaseMatchResult r = phase_match(c.s);
    ResultTable t("phase-match", {"profile", "lambda_p_m", "lambda_s_m", "lambda_i_m", "poling_period_m",
                                  "temperature_C", "delta_k0_per_m", "grating_constant_per_m", "n_p", "n_s", "n_i",
                                  "colinear_bandwidth_m"});
    add_common_meta(t, c);
    t.add_row({c.s.profile.name, c.s.lambda_p, c.s.lambda_s, r.lambda_i, c.s.crystal.poling_period, r.temperature,
               r.mismatch, r.grating_constant, r.n_p, r.n_s, r.n_i, r.colinear_bandwidth});
    std::cout << "T* = " << format_number(r.temperature) << " C, delta_k0 = " << format_number(r.mismatch)
              << " rad/m, lambda_i = " << format_number(r.lambda_i / nm) << " nm\n";
    finish(t, c, "phase_match");
    return 0;
}

const std::vector<std::string> kCouplingColumns = {"profile", "L_m",     "xi_p",      "xi_s",      "xi_i",
                                                   "gamma_s", "gamma_i", "mu_is",     "mu_si",     "gamma_c",
                                                   "gamma_c_alt", "eta", "bayes_gap", "filters"};

std::vector<Cell> coupling_row(const Context& c, const CouplingReport& r) {
    return {c.s.profile.name, r.length, r.xi_p,    r.xi_s,        r.xi_i, r.gamma_s,    r.gamma_i,
            r.mu_is,          r.mu_si,  r.gamma_c, r.gamma_c_alt, r.eta,  r.bayes_gap, r.filters};
}

int run_optimize(const Context& c) {
    const double L = c.length();
    if (c.opt.objective == "pair") {
        const std::vector<double> xps = c.xi_p_values({c.s.focus.xi_p});
        ResultTable t("optimize-pair", kCouplingColumns);
        add_common_meta(t, c);
        for (double xp : xps) {
            const PairOptimum p = optimize_pair_focus(c.s, L, xp);
            if (const std::string w = bayes_warning(p.report); !w.empty()) std::cerr << "warning: " << w << "\n";
            t.add_row(coupling_row(c, p.report));
        }
        finish(t, c, "optimize_pair");
        return 0;
    }
    if (c.opt.objective != "single") throw ConfigError("--objective must be single or pair");
    const Photon ph = c.photon();
    ResultTable t("optimize-single", {"profile", "photon", "L_m", "xi_p", "xi_opt", "gamma_opt", "lambda1",
                                      "boundary", "evaluations"});
    add_common_meta(t, c);
    for (double xp : c.xi_p_values({c.s.focus.xi_p})) {
        const SingleCouplingResult r = optimize_single(c.s, ph, L, xp);
        if (r.optimum.boundary) std::cerr << "warning: " << r.optimum.warning << "\n";
        t.add_row({c.s.profile.name, std::string(photon_name(ph)), L, xp, r.optimum.xi, r.optimum.value, r.lambda1,
                   static_cast<long long>(r.optimum.boundary), static_cast<long long>(r.optimum.evaluations)});
    }
    finish(t, c, "optimize_single");
    return 0;
}

int run_sweep(const Context& c) {
    const Photon ph = c.photon();
    const std::string pname = photon_name(ph);
    const double xi_fiber_fixed = ph == Photon::Signal ? c.s.focus.xi_s : c.s.focus.xi_i;
    if (c.opt.kind == "length") {
        std::vector<double> lengths = c.s.sweep.lengths;
        if (c.opt.points > 0) lengths = linspace(lengths.front(), lengths.back(), c.opt.points);
        const double xp = c.xi_p_values({c.s.focus.xi_p}).front();
        const auto rows = sweep_coupling_vs_length(c.s, ph, lengths, xp, xi_fiber_fixed);
        ResultTable t("sweep-length", {"profile", "photon", "L_m", "xi_p", "xi_fiber", "gamma_fixed", "xi_opt",
                                       "gamma_opt"});
        add_common_meta(t, c);
        PlotSeries fixed{"fixed xi", {}, {}}, opt{"optimal xi", {}, {}};
        for (const auto& r : rows) {
            t.add_row({c.s.profile.name, pname, r.length, xp, xi_fiber_fixed, r.gamma_fixed, r.xi_opt, r.gamma_opt});
            fixed.x.push_back(r.length / mm);
            fixed.y.push_back(r.gamma_fixed);
            opt.x.push_back(r.length / mm);
            opt.y.push_back(r.gamma_opt);
        }
        finish(t, c, "sweep_length");
        maybe_svg(c, "sweep_length", svg_line_plot({fixed, opt}, {pname + " coupling vs length", "L (mm)", "gamma"}));
        return 0;
    }
    if (c.opt.kind != "surface") throw ConfigError("--kind must be length or surface");
    Range rp = c.s.sweep.xi_pump, rf = c.s.sweep.xi_fiber;
    if (c.opt.points > 0) rp.points = rf.points = c.opt.points;
    const std::vector<double> xps = c.opt.xi_p.empty() ? rp.values(true) : c.opt.xi_p;
    const std::vector<double> xfs = rf.values(true);
    const double L = c.length();
    const SurfaceResult r = sweep_coupling_surface(c.s, ph, xps, xfs, L);
    ResultTable t("sweep-surface", {"profile", "photon", "L_m", "xi_p", "xi_fiber", "gamma", "ridge_xi_opt",
                                    "ridge_gamma_opt"});
    add_common_meta(t, c);
    std::vector<std::vector<double>> z(xfs.size(), std::vector<double>(xps.size()));
    for (std::size_t k = 0; k < r.cells.size(); ++k) {
        const auto& cell = r.cells[k];
        const RidgePoint& ridge = r.ridge[k / xfs.size()];
        t.add_row({c.s.profile.name, pname, L, cell.xi_p, cell.xi_fiber, cell.gamma, ridge.xi_opt, ridge.gamma_opt});
        z[k % xfs.size()][k / xfs.size()] = cell.gamma;
    }
    finish(t, c, "sweep_surface");
    maybe_svg(c, "sweep_surface", svg_heatmap(xps, xfs, z, {pname + " coupling", "xi_p", "xi_fiber"}));
    return 0;
}

int run_m2(const Context& c) {
    const Photon ph = c.photon();
    const double L = c.length();
    std::vector<double> xps = c.xi_p_values(c.s.sweep.m2_xi_pump);
    if (c.opt.points > 0 && c.opt.xi_p.empty()) xps.resize(std::min<std::size_t>(xps.size(), c.opt.points));
    ResultTable t("m2", {"profile", "photon", "L_m", "xi_p", "m2", "w0_m", "z0_m", "fit_residual_m", "lambda1"});
    add_common_meta(t, c);
    t.add_meta("z_span_lengths", c.s.sweep.m2_z_span);
    t.add_meta("z_points", static_cast<double>(c.s.sweep.m2_z_points));
    t.add_meta("modes", static_cast<double>(c.s.sweep.m2_modes));
    PlotSeries curve{photon_name(ph), {}, {}};
    for (double xp : xps) {
        const M2Point p = m2_point(c.s, ph, L, xp);
        t.add_row({c.s.profile.name, std::string(photon_name(ph)), L, xp, p.fit.m2, p.fit.w0, p.fit.z0,
                   p.fit.residual, p.lambda1});
        curve.x.push_back(xp);
        curve.y.push_back(p.fit.m2);
    }
    finish(t, c, "m2");
    maybe_svg(c, "m2", svg_line_plot({curve}, {"M2 vs pump focus", "xi_p", "M2", true, false}));
    return 0;
}

int run_bandwidth(const Context& c) {
    const Photon ph = c.photon();
    std::vector<double> lengths = c.s.sweep.bandwidth_lengths;
    if (c.opt.points > 0) lengths = linspace(lengths.front(), lengths.back(), c.opt.points);
    FocusParams focus = c.s.focus;
    if (!c.opt.xi_p.empty()) focus.xi_p = c.opt.xi_p.front();
    std::vector<BandwidthPoint> pts;
    for (double L : lengths) pts.push_back(sm_bandwidth(c.s, ph, L, focus));
    const BandwidthFit fit = fit_bandwidth_law(pts);
    ResultTable t("bandwidth", {"profile", "photon", "L_m", "xi_p", "xi_fiber", "fwhm_m", "widened", "fit_B_m2"});
    add_common_meta(t, c);
    t.add_meta("fit_rms_relative", fit.rms_relative);
    const double xf = ph == Photon::Signal ? focus.xi_s : focus.xi_i;
    PlotSeries sim{"simulated", {}, {}}, law{"B/L", {}, {}};
    for (const auto& p : fit.points) {
        t.add_row({c.s.profile.name, std::string(photon_name(ph)), p.length, focus.xi_p, xf, p.fwhm,
                   static_cast<long long>(p.widened), fit.B});
        sim.x.push_back(p.length / mm);
        sim.y.push_back(p.fwhm / nm);
        law.x.push_back(p.length / mm);
        law.y.push_back(fit.B / p.length / nm);
    }
    std::cout << "B = " << format_number(fit.B) << " m^2\n";
    finish(t, c, "bandwidth");
    maybe_svg(c, "bandwidth",
              svg_line_plot({sim, law}, {"single-mode bandwidth", "L (mm)", "FWHM (nm)", true, true}));
    return 0;
}

int run_flux(const Context& c) {
    std::vector<double> lengths = c.s.sweep.flux_lengths;
    if (c.opt.points > 0) lengths = linspace(lengths.front(), lengths.back(), c.opt.points);
    FocusParams focus = c.s.focus;
    if (!c.opt.xi_p.empty()) focus.xi_p = c.opt.xi_p.front();
    ResultTable t("flux", {"profile", "filter_fwhm_m", "L_m", "xi_p", "xi_s", "flux", "relative_flux", "fit_slope"});
    add_common_meta(t, c);
    std::vector<PlotSeries> series;
    for (double fw : c.s.sweep.flux_filters) {
        const FluxResult r = relative_flux(c.s, lengths, fw, focus);
        PlotSeries ps{format_number(fw / nm) + " nm filter", {}, {}};
        for (const auto& p : r.points) {
            t.add_row({c.s.profile.name, fw, p.length, focus.xi_p, focus.xi_s, p.flux, p.relative,
                       lengths.size() >= 2 ? r.slope : std::nan("")});
            ps.x.push_back(p.length / mm);
            ps.y.push_back(p.relative);
        }
        std::cout << "filter " << format_number(fw / nm) << " nm: slope " << format_number(r.slope) << "\n";
        series.push_back(std::move(ps));
    }
    finish(t, c, "flux");
    maybe_svg(c, "flux", svg_line_plot(series, {"relative coupled flux", "L (mm)", "flux / flux(L0)", true, true}));
    return 0;
}

int run_modes(const Context& c) {
    const Photon ph = c.photon();
    const double L = c.length();
    const double xp = c.xi_p_values({c.s.focus.xi_p}).front();
    const Experiment ex(c.s, L, xp);
    SimulationGrid grid;
    const ModeDecomposition d = single_photon_modes(ex, ph, &grid);
    const double xf = ph == Photon::Signal ? c.s.focus.xi_s : c.s.focus.xi_i;
    const FiberMode g = ex.fiber(ph, xf, grid);
    std::size_t count = static_cast<std::size_t>(std::min<Eigen::Index>(d.eigenvalues.size(), 20));
    if (c.opt.points > 0) count = std::min<std::size_t>(count, c.opt.points);
    double purity = d.eigenvalues.squaredNorm();
    ResultTable t("modes", {"profile", "photon", "L_m", "xi_p", "xi_fiber", "index", "eigenvalue", "cumulative",
                            "fiber_overlap"});
    add_common_meta(t, c);
    t.add_meta("schmidt_number", 1.0 / purity);
    double cum = 0.0;
    PlotSeries ev{"eigenvalue", {}, {}};
    for (std::size_t n = 0; n < count; ++n) {
        const double lam = d.eigenvalues[static_cast<Eigen::Index>(n)];
        cum += lam;
        const double overlap = std::norm(weighted_dot(g.amplitude, d.modes.col(static_cast<Eigen::Index>(n)), d.weights));
        t.add_row({c.s.profile.name, std::string(photon_name(ph)), L, xp, xf, static_cast<long long>(n), lam, cum,
                   overlap});
        ev.x.push_back(static_cast<double>(n));
        ev.y.push_back(lam);
    }
    finish(t, c, "modes");
    maybe_svg(c, "modes", svg_line_plot({ev}, {"emission mode weights", "mode index", "eigenvalue", false, true}));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPDC simulator and fiber-coupling optimizer for colinear QPM crystals"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--config", opt.config, "YAML scenario file")->check(CLI::ExistingFile);
    app.add_option("--out", opt.out, "output directory");
    app.add_option("--profile", opt.profile, "resolution profile")->check(CLI::IsMember({"fast", "paper"}));
    app.add_flag("--deterministic", opt.deterministic, "omit wall time from CSV; index-ordered reductions");
    app.add_option("--threads", opt.threads, "worker threads (env SPDC_THREADS otherwise)")->check(CLI::PositiveNumber);
    app.add_flag("--svg", opt.svg, "also write SVG plots");
    app.add_option("--points", opt.points, "override the sweep point count")->check(CLI::PositiveNumber);
    app.add_option("--xi-p", opt.xi_p, "pump focusing parameter(s)")->check(CLI::PositiveNumber);
    app.add_option("--photon", opt.photon, "signal or idler")->check(CLI::IsMember({"signal", "idler"}));
    app.add_option("--length", opt.length, "crystal length, e.g. 10mm");

    using Runner = int (*)(const Context&);
    std::vector<std::pair<CLI::App*, Runner>> commands;
    commands.emplace_back(app.add_subcommand("phase-match", "solve the phase-matching temperature"),
                          run_phase_match);
    auto* optimize = app.add_subcommand("optimize", "optimize fiber focusing");
    optimize->add_option("--objective", opt.objective, "single or pair")->check(CLI::IsMember({"single", "pair"}));
    commands.emplace_back(optimize, run_optimize);
    auto* sweep = app.add_subcommand("sweep", "coupling vs length or over the focusing surface");
    sweep->add_option("--kind", opt.kind, "length or surface")->check(CLI::IsMember({"length", "surface"}));
    commands.emplace_back(sweep, run_sweep);
    commands.emplace_back(app.add_subcommand("m2", "beam quality of one photon vs pump focus"), run_m2);
    commands.emplace_back(app.add_subcommand("bandwidth", "single-mode bandwidth and B fit"), run_bandwidth);
    commands.emplace_back(app.add_subcommand("flux", "relative coupled flux vs length"), run_flux);
    commands.emplace_back(app.add_subcommand("modes", "emission mode decomposition"), run_modes);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const Context ctx = make_context(opt);
        int code = 0;
        for (const auto& [sub, run] : commands)
            if (sub->parsed()) code = run(ctx);
        std::cerr << "wall time: " << format_number(ctx.elapsed()) << " s\n";
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const YAML::Exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
