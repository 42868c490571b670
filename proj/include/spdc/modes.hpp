#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "spdc/amplitude.hpp"

namespace spdc {

enum class Photon { Signal, Idler };

const char* photon_name(Photon p);

// One-photon density on a theta grid, stored as the kernel K of
// (rho f)(t) = sum_t' K(t, t') w(t') f(t').
struct ReducedDensity {
    Eigen::MatrixXcd kernel;
    std::vector<double> weights;
    // Fraction of the conditioned photons passing the partner's detection
    // filter; 1 for unconditioned states.
    double transmission = 1.0;

    double trace() const;  // sum_n w_n K(n, n), before normalization
    bool is_zero() const { return !(trace() > 0.0); }
    std::size_t size() const { return weights.size(); }
};

struct ModeDecomposition {
    Eigen::VectorXd eigenvalues;  // descending, sum 1
    Eigen::MatrixXcd modes;       // columns zeta_n, orthonormal under the weights
    std::vector<double> weights;
    double trace = 0.0;           // trace of the input before normalization
    double transmission = 1.0;
};

// Weighted inner product sum_n w_n conj(a_n) b_n.
std::complex<double> weighted_dot(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                                  const std::vector<double>& weights);

// Partial trace of one slice over the partner photon.
ReducedDensity reduce_over_partner(const AmplitudeSlice& slice, const SimulationGrid& grid, Photon keep);

// Weighted sums of densities (dphi or eps quadrature); shapes must agree.
ReducedDensity trace_over_dphi(const std::vector<ReducedDensity>& densities, const std::vector<double>& weights);
ReducedDensity trace_over_frequency(const std::vector<ReducedDensity>& densities, const std::vector<double>& weights);

// Amplitude at one eps summed coherently over dphi (unfiltered), with the
// filter values needed to weight it later.
struct CoherentState {
    Eigen::MatrixXd amplitude;  // sum_j w_j S(dphi_j), rows theta_s
    double eps = 0.0;
    double eps_weight = 1.0;
    double filter_s = 1.0;
    double filter_i = 1.0;
    std::vector<double> signal_weights, idler_weights;
};

CoherentState coherent_dphi_state(const std::vector<AmplitudeSlice>& slices, const std::vector<double>& dphi_weights,
                                  const SimulationGrid& grid);

// Eigen-decomposition via the sqrt(W) similarity transform.
ModeDecomposition diagonalize(const ReducedDensity& rho);

struct StreamOptions {
    int threads = 1;
    // Half-interval slices per task; fixing it fixes the summation order.
    int chunk = 4;
};

struct StateRequest {
    bool signal_density = false;
    bool idler_density = false;
    bool coherent = false;
};

// Everything extracted from one pass over the (dphi, eps) slices. Densities
// and coherent amplitudes are unfiltered and kept per eps so that filters,
// which only rescale whole eps slices, are applied afterwards.
struct EmissionState {
    std::vector<double> signal_weights, idler_weights;
    std::vector<double> eps, eps_weights, filter_s, filter_i;
    std::vector<Eigen::MatrixXd> signal_per_eps;  // lower triangle valid
    std::vector<Eigen::MatrixXd> idler_per_eps;
    std::vector<CoherentState> coherent;

    // sum_eps w_eps |A_s|^a |A_i|^b rho_X(eps) with a, b in {0, 2}.
    ReducedDensity density(Photon photon, bool use_signal_filter, bool use_idler_filter) const;
};

EmissionState accumulate_state(const AmplitudeModel& model, StateRequest request, const StreamOptions& options);

}  // namespace spdc
