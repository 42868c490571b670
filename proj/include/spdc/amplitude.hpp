#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "spdc/dispersion.hpp"

namespace spdc {

// How a polar angle is integrated. Spherical uses sin(theta) dtheta; planar
// treats theta as a flat transverse coordinate with plain dtheta weights.
enum class AngularMeasure { Spherical, Planar };

// Wavelength used in the Rayleigh range when converting xi <-> waist.
enum class WaistConvention { Vacuum, Medium };

struct QuadratureAxis {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

struct SimulationGrid {
    QuadratureAxis theta_s;
    QuadratureAxis theta_i;
    QuadratureAxis dphi;  // full [0, 2 pi) midpoint grid
    QuadratureAxis eps;   // rad/s
    AngularMeasure measure = AngularMeasure::Planar;

    // Midpoint grids. n_eps == 1 gives the single point eps = 0 with unit weight.
    static SimulationGrid make(int n_theta, double theta_max_s, double theta_max_i, int n_phi, int n_eps,
                               double eps_half_span, AngularMeasure measure);

    // Checks ordering, positivity, theta_max < pi/2 and n_phi >= ceil(n_theta/5).
    void validate() const;

    double theta_max_s() const;
    double theta_max_i() const;

    // Indices of dphi in [0, pi] with weights doubled for points whose mirror
    // 2 pi - dphi is also on the grid.
    QuadratureAxis half_dphi() const;
    std::vector<std::size_t> half_dphi_indices() const;
};

std::vector<double> theta_weights(const std::vector<double>& nodes, double step, AngularMeasure measure);

struct FilterSpec {
    double center = 0.0;  // m
    double fwhm = 0.0;    // m, intensity FWHM
    bool enabled = false;

    static FilterSpec none() { return {}; }
    static FilterSpec gaussian(double center, double fwhm);
    void validate() const;
};

// exp(-2 ln2 (l - lc)^2 / dl^2): the intensity |A|^2 has FWHM dl.
double filter_amplitude(const FilterSpec& filter, double wavelength);

// eps = 2 pi c (n(l)/l - n(lc)/lc).
double epsilon_of_lambda(double wavelength, double center, const DispersionModel& model, Axis axis,
                         double temperature);
// Inverse of epsilon_of_lambda, solved to 1e-9 nm.
double lambda_of_epsilon(double eps, double center, const DispersionModel& model, Axis axis, double temperature);

double waist_from_xi(double length, double wavelength, double index, double xi, WaistConvention convention);
double xi_from_waist(double length, double wavelength, double index, double waist, WaistConvention convention);

struct PumpSpec {
    double wavelength = 0.0;  // vacuum, m
    double waist = 0.0;       // m, focus at the crystal centre
    double k_z = 0.0;         // in-medium on-axis wave number, rad/m

    static PumpSpec from_xi(double length, double wavelength, double index, double xi, WaistConvention convention);
    double xi(double length, double index, WaistConvention convention) const;
};

// (k w / sqrt(2 pi)) exp(-(k w)^2 sin^2(theta) / 4): unit power over the
// forward hemisphere under the spherical measure.
double pump_angular_spectrum(const PumpSpec& pump, double theta);

// Prefactor giving the Gaussian factor unit power under the given measure.
double pump_power_normalization(const PumpSpec& pump, AngularMeasure measure);

// (P^2 + Q^2) = |k_s,perp + k_i,perp|^2 / k_p^2.
double transverse_match(double k_s, double theta_s, double k_i, double theta_i, double dphi, double k_p);

// Longitudinal mismatch ks cos(ts) + ki cos(ti) - kp sqrt(1 - P^2 - Q^2) + K.
// Empty when the pump component would be evanescent (P^2 + Q^2 > 1).
std::optional<double> delta_kz_prime(double k_s, double theta_s, double k_i, double theta_i, double dphi,
                                     double k_p, double grating_constant);

// (4/pi) sum_{m=0}^{M} (-1)^m/(2m+1) sinc(L (dk + 2 m K) / 2).
double longitudinal_sinc(const CrystalConfig& config, double delta_kz);

// Two-photon amplitude on the theta_s x theta_i grid for one (dphi, eps).
// Every factor is real, so the global constant phase 1/i of the interaction
// is absorbed in the prefactor and the matrix is stored as real.
struct AmplitudeSlice {
    Eigen::MatrixXd values;  // rows: theta_s, cols: theta_i
    double dphi = 0.0;
    double eps = 0.0;
};

struct AmplitudeSetup {
    CrystalConfig crystal;
    DispersionModel dispersion;
    WaveTriplet triplet;
    PumpSpec pump;
    FilterSpec filter_s;
    FilterSpec filter_i;
    SimulationGrid grid;
    double prefactor = 1.0;  // arbitrary global constant C
};

// Wavelength-dependent data for one frequency offset eps.
struct FrequencyPoint {
    double eps = 0.0;
    double lambda_s = 0.0, lambda_i = 0.0;
    double filter = 1.0;  // A_s(eps) A_i(eps)
    double filter_s = 1.0, filter_i = 1.0;
    std::vector<double> k_s;  // k at each theta_s node
    std::vector<double> k_i;  // k at each theta_i node
};

class AmplitudeModel {
public:
    explicit AmplitudeModel(AmplitudeSetup setup);

    const AmplitudeSetup& setup() const { return setup_; }
    const SimulationGrid& grid() const { return setup_.grid; }
    const WaveNumbers& wave_numbers() const { return k_; }
    const FrequencyPoint& frequency(std::size_t ieps) const { return freq_[ieps]; }

    FrequencyPoint make_frequency_point(double eps) const;

    // Fills out (resized to n_theta_s x n_theta_i) for the grid point.
    void fill(double dphi, const FrequencyPoint& f, Eigen::MatrixXd& out, bool apply_filters = true) const;
    AmplitudeSlice slice(std::size_t iphi, std::size_t ieps) const;
    AmplitudeSlice slice_at(double dphi, double eps) const;

    // Global factors: C L times the pump normalization.
    double scale() const { return scale_; }

private:
    AmplitudeSetup setup_;
    WaveNumbers k_;
    double scale_ = 1.0;
    std::vector<double> sin_s_, cos_s_, sin_i_, cos_i_;
    std::vector<FrequencyPoint> freq_;
};

// Default polar cutoff for one photon: the larger of the angle where the pump
// factor drops to 1e-4 (partner on axis) and the third zero of the sinc.
double default_theta_max(double k_photon, double k_pump, double pump_waist, double length);

// FWHM in signal wavelength of the colinear, on-axis sinc^2 response.
double colinear_bandwidth(const CrystalConfig& config, const DispersionModel& model, const WaveTriplet& triplet);

}  // namespace spdc

namespace spdc {

// One-off slice evaluation; builds an AmplitudeModel internally.
AmplitudeSlice build_slice(const AmplitudeSetup& setup, double dphi, double eps);

}  // namespace spdc
