#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "spdc/modes.hpp"

namespace spdc {

// Uniform transverse wave-vector plane used for field synthesis. The angular
// extent is padded by two past the polar cutoff so propagated frames do not
// wrap around.
struct FieldGridSpec {
    int size = 256;          // FFT points per side
    double k = 0.0;          // in-medium wave number, rad/m
    double theta_max = 0.0;  // angular support of the modes, rad
    double padding = 2.0;

    double dk() const;     // transverse wave-vector step
    double pitch() const;  // spatial sampling step
    std::vector<double> y_axis() const;
};

struct FieldFrame {
    Eigen::MatrixXd intensity;  // rows x, cols y
    double pitch = 0.0;         // m
    double z = 0.0;             // m
    double energy() const;      // sum x pitch^2
};

// Radial angular amplitude sampled on theta nodes, evaluated on the (kx, ky)
// plane by linear interpolation in theta = asin(k_perp / k).
Eigen::MatrixXcd embed_radial(const Eigen::VectorXcd& radial, const std::vector<double>& theta,
                              const FieldGridSpec& spec);

// Complex field at z from an angular amplitude on the (kx, ky) plane, with
// propagation phase exp(-i k z cos(theta)).
Eigen::MatrixXcd propagate_field(const Eigen::MatrixXcd& angular, const FieldGridSpec& spec, double z);

// Incoherent sum of lambda_n |E_n|^2 over the leading modes. Throws
// NumericalError when the frame carries noticeable power at the window edge.
FieldFrame synthesize_field(const ModeDecomposition& decomp, const std::vector<double>& theta,
                            const FieldGridSpec& spec, double z, std::size_t max_modes = 40);

// Several z planes sharing the embedding work.
std::vector<FieldFrame> synthesize_caustic(const ModeDecomposition& decomp, const std::vector<double>& theta,
                                           const FieldGridSpec& spec, const std::vector<double>& z,
                                           std::size_t max_modes = 40, int threads = 1);

// Marginal over x: I(y) = sum_x I(x, y).
std::vector<double> integrated_profile(const FieldFrame& frame);

// w = 2 sigma of the profile.
double second_moment_width(const std::vector<double>& profile, const std::vector<double>& y);

struct WeightedWidth {
    double width = 0.0;     // 1/e^2 radius of the fitted Gaussian
    double center = 0.0;
    double residual = 0.0;  // weighted rms misfit relative to the peak
    bool misfit = false;    // residual above 5 percent of the peak
};

// Least-squares Gaussian fit with point weights (I/I_max)^center_weighting,
// so the core dominates and flat noise floors do not bias the width.
WeightedWidth weighted_gaussian_width(const std::vector<double>& profile, const std::vector<double>& y,
                                      double center_weighting = 2.0);

struct BeamProfile {
    std::vector<double> z;
    std::vector<double> w;
    std::string estimator = "second-moment";
};

struct M2Fit {
    double w0 = 0.0;
    double z0 = 0.0;
    double m2 = 0.0;
    double residual = 0.0;  // rms of w(z) misfit, m
};

// Fits w(z) = w0 sqrt(1 + ((z - z0)/zR)^2), zR = pi w0^2 / (M^2 lambda);
// lambda is the wavelength in the propagation medium.
M2Fit fit_m2(const BeamProfile& profile, double wavelength);

// Caustic of a radially symmetric beam through the full synthesis chain.
BeamProfile measure_caustic(const ModeDecomposition& decomp, const std::vector<double>& theta,
                            const FieldGridSpec& spec, const std::vector<double>& z, std::size_t max_modes = 40,
                            int threads = 1);

// u(theta_y) = sum_theta_x |sum_n lambda_n zeta_n(theta)|^2 on the embedded
// plane; returns (theta_y, u) pairs.
std::pair<std::vector<double>, std::vector<double>> angular_spectral_form(const ModeDecomposition& decomp,
                                                                          const std::vector<double>& theta,
                                                                          const FieldGridSpec& spec);

// Angular amplitude of a Laguerre-Gauss LG_p0 beam of waist w0, for
// calibration: the k-space profile is L_p(2 (k_perp w0/2)^2) exp(-(k_perp w0/2)^2).
Eigen::VectorXcd laguerre_gauss_angular(int p, double waist, double k, const std::vector<double>& theta);

}  // namespace spdc
