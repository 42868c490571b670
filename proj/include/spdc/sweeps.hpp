#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spdc/beams.hpp"
#include "spdc/config.hpp"
#include "spdc/coupling.hpp"

namespace spdc {

// Solves the phase-matching temperature when the scenario asks for it.
Scenario resolve_scenario(Scenario scenario);

struct PhaseMatchResult {
    double temperature = 0.0;
    double mismatch = 0.0;  // dk0 at that temperature, rad/m
    double grating_constant = 0.0;
    double lambda_i = 0.0;
    double n_p = 0.0, n_s = 0.0, n_i = 0.0;
    double colinear_bandwidth = 0.0;  // signal, m
};

PhaseMatchResult phase_match(const Scenario& scenario);

// Which photons' spectral bands the eps grid must cover.
struct BandCover {
    bool signal = true;
    bool idler = true;
};

// A scenario pinned to one crystal length and pump focus.
class Experiment {
public:
    Experiment(const Scenario& scenario, double length, double xi_p);

    const Scenario& scenario() const { return scenario_; }
    const CrystalConfig& crystal() const { return crystal_; }
    const WaveTriplet& triplet() const { return triplet_; }
    const PumpSpec& pump() const { return pump_; }
    const FilterSpec& filter(Photon p) const { return p == Photon::Signal ? filter_s_ : filter_i_; }
    double index(Photon p) const { return p == Photon::Signal ? n_s_ : n_i_; }
    double wave_number(Photon p) const;
    double wavelength(Photon p) const { return p == Photon::Signal ? triplet_.lambda_s : triplet_.lambda_i; }
    double xi_p() const { return xi_p_; }
    double theta_max(Photon p) const { return p == Photon::Signal ? theta_max_s_ : theta_max_i_; }
    // Colinear estimate of the single-mode bandwidth, as an eps half-width unit.
    double sm_eps() const { return sm_eps_; }
    // eps half-width of a photon's band: filter sigmas, or single-mode widths.
    double band_eps(Photon p) const;

    // Filter-window grid: fine points over the narrowest covered band, coarse
    // points over the rest.
    SimulationGrid grid(BandCover cover) const;
    // Uniform eps grid of n points over +-half_span.
    SimulationGrid spectrum_grid(int n_eps, double half_span) const;
    AmplitudeModel model(const SimulationGrid& grid) const;

    FiberMode fiber(Photon p, double xi, const SimulationGrid& grid) const;

private:
    Scenario scenario_;
    CrystalConfig crystal_;
    WaveTriplet triplet_;
    double xi_p_ = 0.0;
    double n_p_ = 0.0, n_s_ = 0.0, n_i_ = 0.0;
    double k_s_ = 0.0, k_i_ = 0.0;
    PumpSpec pump_;
    FilterSpec filter_s_, filter_i_;
    double theta_max_s_ = 0.0, theta_max_i_ = 0.0;
    double sm_eps_ = 0.0;
};

// eps axis: midpoint cells of width inner/n_inner inside +-inner and cells of
// width about outer/n_outer outside, so no cell straddles the boundary.
QuadratureAxis composite_eps_axis(double inner, int n_inner, double outer, int n_outer);

struct FocusOptimum {
    double xi = 0.0;
    double value = 0.0;
    bool boundary = false;  // optimum pinned to a bound
    int evaluations = 0;
    std::string warning;
};

// Golden-section maximization until the bracket is below tol.
FocusOptimum golden_section_max(const std::function<double(double)>& f, double lo, double hi, double tol);

// Maximizes single coupling of a fixed decomposition over the fiber xi.
FocusOptimum optimize_fiber_focus(const Experiment& ex, const ModeDecomposition& decomp, Photon photon,
                                  const SimulationGrid& grid);

struct SingleCouplingResult {
    double xi_p = 0.0;
    double length = 0.0;
    FocusOptimum optimum;
    double lambda1 = 0.0;  // largest eigenvalue of the reduced density
    double gamma_at_fixed = 0.0;
};

// Density of one photon with only its own filter applied.
ModeDecomposition single_photon_modes(const Experiment& ex, Photon photon, SimulationGrid* grid_out = nullptr);

SingleCouplingResult optimize_single(const Scenario& scenario, Photon photon, double length, double xi_p);

// Full report at one focusing point: singles with own filters, conditional
// coincidences in both directions, pair coupling by both Bayes routes.
CouplingReport evaluate_coupling(const Scenario& scenario, double length, const FocusParams& focus);

struct PairOptimum {
    CouplingReport report;
    int rounds = 0;
};

// Coordinate descent over (xi_s, xi_i) maximizing gamma_c at fixed xi_p:
// alternating golden-section passes, three rounds.
PairOptimum optimize_pair_focus(const Scenario& scenario, double length, double xi_p);

struct LengthRow {
    double length = 0.0;
    double gamma_fixed = 0.0;  // at the scenario's fiber xi
    double xi_opt = 0.0;
    double gamma_opt = 0.0;
};

std::vector<LengthRow> sweep_coupling_vs_length(const Scenario& scenario, Photon photon,
                                                const std::vector<double>& lengths, double xi_p, double xi_fiber);

struct SurfaceCell {
    double xi_p = 0.0, xi_fiber = 0.0, gamma = 0.0;
};

struct RidgePoint {
    double xi_p = 0.0, xi_opt = 0.0, gamma_opt = 0.0;
};

struct SurfaceResult {
    std::vector<SurfaceCell> cells;
    std::vector<RidgePoint> ridge;
};

SurfaceResult sweep_coupling_surface(const Scenario& scenario, Photon photon, const std::vector<double>& xi_p,
                                     const std::vector<double>& xi_fiber, double length);

// FWHM between linearly interpolated half-maximum crossings; returns a
// negative value when either crossing is missing.
double fwhm_linear(const std::vector<double>& x, const std::vector<double>& y);

struct BandwidthPoint {
    double length = 0.0;
    double fwhm = 0.0;  // m, in the photon's wavelength
    bool widened = false;
    std::vector<double> wavelength, density;  // the coupled spectrum
};

BandwidthPoint sm_bandwidth(const Scenario& scenario, Photon photon, double length, const FocusParams& focus);

struct BandwidthFit {
    std::vector<BandwidthPoint> points;
    double B = 0.0;  // m^2, least squares of fwhm = B / L
    double rms_relative = 0.0;
};

BandwidthFit fit_bandwidth_law(std::vector<BandwidthPoint> points);

struct FluxPoint {
    double length = 0.0;
    double flux = 0.0;  // arbitrary units
    double relative = 0.0;
};

struct FluxResult {
    double filter_fwhm = 0.0;
    std::vector<FluxPoint> points;
    double slope = 0.0;  // d log(flux) / d log(L)
};

// Fiber-coupled flux of the signal through a Gaussian filter of the given
// FWHM, integrated over wavelength, at fixed xi.
FluxResult relative_flux(const Scenario& scenario, const std::vector<double>& lengths, double filter_fwhm,
                         const FocusParams& focus);

// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct M2Point {
    double xi_p = 0.0;
    M2Fit fit;
    double lambda1 = 0.0;
    BeamProfile caustic;
};

M2Point m2_point(const Scenario& scenario, Photon photon, double length, double xi_p);

// True when values fall then rise (one interior minimum), allowing `slack`
// of local noise.
bool is_u_shaped(const std::vector<double>& values, double slack = 1e-3);

}  // namespace spdc
