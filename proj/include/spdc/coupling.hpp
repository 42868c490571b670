#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spdc/modes.hpp"

namespace spdc {

// Gaussian mode of a single-mode fiber imaged into the crystal, sampled as
// an angular amplitude and normalized under the grid weights.
struct FiberMode {
    double waist = 0.0;     // m
    double z_offset = 0.0;  // m, focus position relative to the crystal centre
    double k = 0.0;         // in-medium wave number, rad/m
    Eigen::VectorXcd amplitude;
    std::vector<double> weights;
};

// exp(-(k w)^2 sin^2(theta)/4) exp(-i k z cos(theta)), unit weighted norm.
FiberMode fiber_matched_mode(double waist, double z_offset, double k, const std::vector<double>& theta,
                             const std::vector<double>& weights);

// sum_n lambda_n |<zeta_n|G>|^2, times the state's transmission.
double single_coupling(const ModeDecomposition& decomp, const FiberMode& fiber);

// Same quantity from the top `modes` eigenmodes only.
double truncated_coupling(const ModeDecomposition& decomp, const FiberMode& fiber, std::size_t modes);

// <G|rho|G> / tr(rho) evaluated directly; used as a cross-check.
double direct_coupling(const ReducedDensity& rho, const FiberMode& fiber);

// Partner state after projecting the herald photon onto its fiber mode.
// For each eps the dphi-coherent amplitude is contracted with the fiber
// mode, the partner vectors are summed as outer products over eps with the
// herald filter |A_h|^2, and the partner filter |A_d|^2 becomes a
// transmission factor carried by the result.
ReducedDensity conditional_project(const std::vector<CoherentState>& family, const FiberMode& herald_fiber,
                                   Photon herald);

// Coincidence probability given the herald: transmission x overlap.
double conditional_coincidence(const ModeDecomposition& conditioned, const FiberMode& fiber);

double pair_coupling(double mu, double gamma);
double pair_symmetry(double mu_si, double mu_is);

struct CouplingReport {
    double gamma_s = 0, gamma_i = 0;
    double mu_is = 0, mu_si = 0;  // mu_{i|s}: idler coupled given the signal was
    double gamma_c = 0;           // mu_{i|s} gamma_s
    double gamma_c_alt = 0;       // mu_{s|i} gamma_i
    double eta = 0;
    double bayes_gap = 0;         // |gamma_c - gamma_c_alt|
    double xi_p = 0, xi_s = 0, xi_i = 0;
    double length = 0;
    std::string filters;
};

// Warning text when the two Bayes routes disagree by more than 1e-3, else "".
std::string bayes_warning(const CouplingReport& report);

// <G|rho(eps)|G> for every eps node of the model grid, unfiltered and
// unnormalized: the fiber-coupled spectral density of one photon.
std::vector<double> coupled_spectrum(const AmplitudeModel& model, Photon photon, const FiberMode& fiber,
                                     const StreamOptions& options);

}  // namespace spdc
