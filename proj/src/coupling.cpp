#include "spdc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "spdc/errors.hpp"
#include "spdc/parallel.hpp"

namespace spdc {

using cd = std::complex<double>;

FiberMode fiber_matched_mode(double waist, double z_offset, double k, const std::vector<double>& theta,
                             const std::vector<double>& weights) {
    if (!(waist > 0)) throw DomainError("fiber waist must be positive");
    if (theta.size() != weights.size() || theta.empty()) throw DomainError("fiber mode grid is inconsistent");
    FiberMode f;
    f.waist = waist;
    f.z_offset = z_offset;
    f.k = k;
    f.weights = weights;
    f.amplitude.resize(static_cast<Eigen::Index>(theta.size()));
    const double kw = k * waist;
    double norm = 0.0;
    for (std::size_t n = 0; n < theta.size(); ++n) {
        const double s = std::sin(theta[n]);
        const double g = std::exp(-kw * kw * s * s / 4.0);
        f.amplitude[n] = z_offset == 0.0 ? cd(g, 0.0) : g * std::exp(cd(0.0, -k * z_offset * std::cos(theta[n])));
        norm += weights[n] * g * g;
    }
    if (!(norm > 0)) throw NumericalError("fiber mode vanishes on the grid");
    f.amplitude /= std::sqrt(norm);
    return f;
}

double single_coupling(const ModeDecomposition& decomp, const FiberMode& fiber) {
    return truncated_coupling(decomp, fiber, static_cast<std::size_t>(decomp.eigenvalues.size()));
}

double truncated_coupling(const ModeDecomposition& decomp, const FiberMode& fiber, std::size_t modes) {
    if (decomp.weights != fiber.weights) throw DomainError("fiber mode and density live on different grids");
    const std::size_t n = std::min<std::size_t>(modes, decomp.eigenvalues.size());
    double g = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (decomp.eigenvalues[j] == 0.0) continue;
        g += decomp.eigenvalues[j] * std::norm(weighted_dot(decomp.modes.col(j), fiber.amplitude, fiber.weights));
    }
    return decomp.transmission * g;
}

double direct_coupling(const ReducedDensity& rho, const FiberMode& fiber) {
    if (rho.weights != fiber.weights) throw DomainError("fiber mode and density live on different grids");
    Eigen::VectorXcd wg(fiber.amplitude.size());
    for (Eigen::Index n = 0; n < wg.size(); ++n) wg[n] = fiber.weights[n] * fiber.amplitude[n];
    const cd v = wg.dot(rho.kernel * wg);  // conj(wg)^T K wg
    return rho.transmission * v.real() / rho.trace();
}

ReducedDensity conditional_project(const std::vector<CoherentState>& family, const FiberMode& herald_fiber,
                                   Photon herald) {
    if (family.empty()) throw DomainError("empty coherent family");
    const bool signal_herald = herald == Photon::Signal;
    const CoherentState& first = family.front();
    const std::vector<double>& hw = signal_herald ? first.signal_weights : first.idler_weights;
    const std::vector<double>& dw = signal_herald ? first.idler_weights : first.signal_weights;
    if (herald_fiber.weights != hw) throw DomainError("herald fiber mode does not match the grid");
    const Eigen::Index nh = static_cast<Eigen::Index>(hw.size());
    const Eigen::Index nd = static_cast<Eigen::Index>(dw.size());
    Eigen::VectorXcd wg(nh);
    for (Eigen::Index m = 0; m < nh; ++m) wg[m] = hw[m] * std::conj(herald_fiber.amplitude[m]);

    ReducedDensity out;
    out.weights = dw;
    out.kernel = Eigen::MatrixXcd::Zero(nd, nd);
    double denominator = 0.0;
    for (const CoherentState& c : family) {
        if (c.amplitude.rows() != static_cast<Eigen::Index>(first.signal_weights.size()) ||
            c.amplitude.cols() != static_cast<Eigen::Index>(first.idler_weights.size()))
            throw DomainError("coherent family members differ in shape");
        const double a_h = signal_herald ? c.filter_s : c.filter_i;
        const double a_d = signal_herald ? c.filter_i : c.filter_s;
        const double base = c.eps_weight * a_h * a_h;
        if (base == 0.0) continue;
        Eigen::VectorXcd v = signal_herald ? Eigen::VectorXcd(c.amplitude.transpose() * wg)
                                           : Eigen::VectorXcd(c.amplitude * wg);
        double norm2 = 0.0;
        for (Eigen::Index n = 0; n < nd; ++n) norm2 += dw[n] * std::norm(v[n]);
        denominator += base * norm2;
        out.kernel.noalias() += (base * a_d * a_d) * (v * v.adjoint());
    }
    if (!(denominator > 0)) throw NumericalError("conditioning on zero-probability event: herald fiber sees no emission");
    const double tr = out.trace();
    out.transmission = tr / denominator;
    return out;
}

double conditional_coincidence(const ModeDecomposition& conditioned, const FiberMode& fiber) {
    return single_coupling(conditioned, fiber);
}

double pair_coupling(double mu, double gamma) { return mu * gamma; }

double pair_symmetry(double mu_si, double mu_is) { return std::sqrt(mu_si * mu_is); }

std::string bayes_warning(const CouplingReport& r) {
    if (!(r.bayes_gap > 1e-3)) return {};
    return "warning: Bayes routes disagree, mu_i|s*gamma_s = " + std::to_string(r.gamma_c) +
           " vs mu_s|i*gamma_i = " + std::to_string(r.gamma_c_alt) + " (gap " + std::to_string(r.bayes_gap) + ")";
}

std::vector<double> coupled_spectrum(const AmplitudeModel& model, Photon photon, const FiberMode& fiber,
                                     const StreamOptions& options) {
    const SimulationGrid& grid = model.grid();
    const QuadratureAxis half = grid.half_dphi();
    const bool sig = photon == Photon::Signal;
    const std::vector<double>& own = sig ? grid.theta_s.weights : grid.theta_i.weights;
    const std::vector<double>& partner = sig ? grid.theta_i.weights : grid.theta_s.weights;
    if (fiber.weights != own) throw DomainError("fiber mode does not match the grid");
    const Eigen::Index n_own = static_cast<Eigen::Index>(own.size());
    Eigen::VectorXd gr(n_own), gi(n_own);
    for (Eigen::Index m = 0; m < n_own; ++m) {
        gr[m] = own[m] * fiber.amplitude[m].real();
        gi[m] = -own[m] * fiber.amplitude[m].imag();  // conjugated mode
    }
    const bool complex_mode = gi.cwiseAbs().maxCoeff() > 0.0;
    const std::size_t chunk = static_cast<std::size_t>(std::max(1, options.chunk));
    const std::size_t per_eps = (half.size() + chunk - 1) / chunk;
    std::vector<double> out(grid.eps.size(), 0.0);
    auto make = [&](std::size_t task) {
        const std::size_t e = task / per_eps;
        const std::size_t first = (task % per_eps) * chunk;
        const std::size_t count = std::min(chunk, half.size() - first);
        Eigen::MatrixXd S;
        double acc = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            model.fill(half.nodes[first + j], model.frequency(e), S, false);
            const Eigen::VectorXd ur = sig ? Eigen::VectorXd(S.transpose() * gr) : Eigen::VectorXd(S * gr);
            Eigen::VectorXd ui;
            if (complex_mode) ui = sig ? Eigen::VectorXd(S.transpose() * gi) : Eigen::VectorXd(S * gi);
            double s = 0.0;
            for (Eigen::Index n = 0; n < ur.size(); ++n)
                s += partner[n] * (ur[n] * ur[n] + (complex_mode ? ui[n] * ui[n] : 0.0));
            acc += half.weights[first + j] * s;
        }
        return acc;
    };
    ordered_reduce(grid.eps.size() * per_eps, options.threads, make,
                   [&](std::size_t task, double v) { out[task / per_eps] += v; });
    return out;
}

}  // namespace spdc
