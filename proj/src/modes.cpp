#include "spdc/modes.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/errors.hpp"
#include "spdc/parallel.hpp"

namespace spdc {

const char* photon_name(Photon p) { return p == Photon::Signal ? "signal" : "idler"; }

double ReducedDensity::trace() const {
    double t = 0.0;
    for (std::size_t n = 0; n < weights.size(); ++n) t += weights[n] * kernel(n, n).real();
    return t;
}

std::complex<double> weighted_dot(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                                  const std::vector<double>& weights) {
    if (a.size() != b.size() || static_cast<std::size_t>(a.size()) != weights.size())
        throw DomainError("inner product of vectors on different grids");
    std::complex<double> s = 0.0;
    for (Eigen::Index n = 0; n < a.size(); ++n) s += weights[n] * std::conj(a[n]) * b[n];
    return s;
}

ReducedDensity reduce_over_partner(const AmplitudeSlice& slice, const SimulationGrid& grid, Photon keep) {
    const Eigen::MatrixXd& S = slice.values;
    if (static_cast<std::size_t>(S.rows()) != grid.theta_s.size() ||
        static_cast<std::size_t>(S.cols()) != grid.theta_i.size())
        throw DomainError("slice shape does not match the grid");
    ReducedDensity r;
    if (keep == Photon::Idler) {
        const Eigen::Map<const Eigen::VectorXd> ws(grid.theta_s.weights.data(), S.rows());
        r.kernel = (S.transpose() * ws.asDiagonal() * S).cast<std::complex<double>>();
        r.weights = grid.theta_i.weights;
    } else {
        const Eigen::Map<const Eigen::VectorXd> wi(grid.theta_i.weights.data(), S.cols());
        r.kernel = (S * wi.asDiagonal() * S.transpose()).cast<std::complex<double>>();
        r.weights = grid.theta_s.weights;
    }
    return r;
}

namespace {

ReducedDensity weighted_sum(const std::vector<ReducedDensity>& densities, const std::vector<double>& weights) {
    if (densities.empty() || densities.size() != weights.size())
        throw DomainError("density and weight lists differ in length or are empty");
    ReducedDensity out;
    out.weights = densities.front().weights;
    out.kernel = Eigen::MatrixXcd::Zero(densities.front().kernel.rows(), densities.front().kernel.cols());
    for (std::size_t j = 0; j < densities.size(); ++j) {
        if (densities[j].kernel.rows() != out.kernel.rows() || densities[j].kernel.cols() != out.kernel.cols() ||
            densities[j].weights != out.weights)
            throw DomainError("densities live on different grids");
        out.kernel += weights[j] * densities[j].kernel;
    }
    return out;
}

}  // namespace

ReducedDensity trace_over_dphi(const std::vector<ReducedDensity>& densities, const std::vector<double>& weights) {
    return weighted_sum(densities, weights);
}

ReducedDensity trace_over_frequency(const std::vector<ReducedDensity>& densities,
                                    const std::vector<double>& weights) {
    return weighted_sum(densities, weights);
}

CoherentState coherent_dphi_state(const std::vector<AmplitudeSlice>& slices, const std::vector<double>& dphi_weights,
                                  const SimulationGrid& grid) {
    if (slices.empty() || slices.size() != dphi_weights.size())
        throw DomainError("slice and weight lists differ in length or are empty");
    CoherentState c;
    c.eps = slices.front().eps;
    c.signal_weights = grid.theta_s.weights;
    c.idler_weights = grid.theta_i.weights;
    c.amplitude = Eigen::MatrixXd::Zero(slices.front().values.rows(), slices.front().values.cols());
    for (std::size_t j = 0; j < slices.size(); ++j) {
        if (slices[j].eps != c.eps) throw DomainError("coherent dphi sum mixes different frequencies");
        c.amplitude += dphi_weights[j] * slices[j].values;
    }
    return c;
}

ModeDecomposition diagonalize(const ReducedDensity& rho) {
    const Eigen::Index n = rho.kernel.rows();
    if (n == 0 || rho.kernel.cols() != n || static_cast<std::size_t>(n) != rho.weights.size())
        throw DomainError("density kernel is not square or mismatches its weights");
    const double scale = rho.kernel.cwiseAbs().maxCoeff();
    const double asym = (rho.kernel - rho.kernel.adjoint()).cwiseAbs().maxCoeff();
    if (!(asym <= 1e-12 * scale)) throw NumericalError("density kernel is not Hermitian (relative defect " +
                                                        std::to_string(scale > 0 ? asym / scale : asym) + ")");
    const double tr = rho.trace();
    if (!(tr > 0)) throw NumericalError("density has zero trace");

    Eigen::VectorXd sw(n);
    for (Eigen::Index j = 0; j < n; ++j) sw[j] = std::sqrt(rho.weights[j]);
    Eigen::MatrixXcd h = sw.asDiagonal() * rho.kernel * sw.asDiagonal();
    h = 0.5 * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");

    ModeDecomposition d;
    d.trace = tr;
    d.transmission = rho.transmission;
    d.weights = rho.weights;
    d.eigenvalues.resize(n);
    d.modes.resize(n, n);
    // Eigen returns ascending order.
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = n - 1 - j;
        double lam = solver.eigenvalues()[src];
        if (lam < -1e-10 * tr)
            throw NumericalError("density has a negative eigenvalue " + std::to_string(lam / tr) +
                                 " (relative to trace)");
        d.eigenvalues[j] = std::max(lam, 0.0);
        d.modes.col(j) = solver.eigenvectors().col(src).cwiseQuotient(sw.cast<std::complex<double>>());
    }
    d.eigenvalues /= d.eigenvalues.sum();
    return d;
}

ReducedDensity EmissionState::density(Photon photon, bool use_signal_filter, bool use_idler_filter) const {
    const auto& per = photon == Photon::Signal ? signal_per_eps : idler_per_eps;
    if (per.empty()) throw DomainError(std::string(photon_name(photon)) + " density was not accumulated");
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(per.front().rows(), per.front().cols());
    for (std::size_t e = 0; e < per.size(); ++e) {
        double w = eps_weights[e];
        if (use_signal_filter) w *= filter_s[e] * filter_s[e];
        if (use_idler_filter) w *= filter_i[e] * filter_i[e];
        if (w != 0.0) acc += w * per[e];
    }
    ReducedDensity r;
    Eigen::MatrixXd full = acc.selfadjointView<Eigen::Lower>();
    r.kernel = full.cast<std::complex<double>>();
    r.weights = photon == Photon::Signal ? signal_weights : idler_weights;
    return r;
}

EmissionState accumulate_state(const AmplitudeModel& model, StateRequest request, const StreamOptions& options) {
    const SimulationGrid& grid = model.grid();
    const QuadratureAxis half = grid.half_dphi();
    const std::size_t ns = grid.theta_s.size(), ni = grid.theta_i.size();
    const std::size_t n_eps = grid.eps.size();
    const std::size_t chunk = static_cast<std::size_t>(std::max(1, options.chunk));
    const std::size_t chunks_per_eps = (half.size() + chunk - 1) / chunk;

    EmissionState st;
    st.signal_weights = grid.theta_s.weights;
    st.idler_weights = grid.theta_i.weights;
    st.eps = grid.eps.nodes;
    st.eps_weights = grid.eps.weights;
    for (std::size_t e = 0; e < n_eps; ++e) {
        st.filter_s.push_back(model.frequency(e).filter_s);
        st.filter_i.push_back(model.frequency(e).filter_i);
    }
    if (request.signal_density) st.signal_per_eps.assign(n_eps, Eigen::MatrixXd::Zero(ns, ns));
    if (request.idler_density) st.idler_per_eps.assign(n_eps, Eigen::MatrixXd::Zero(ni, ni));
    if (request.coherent) {
        st.coherent.resize(n_eps);
        for (std::size_t e = 0; e < n_eps; ++e) {
            st.coherent[e].amplitude = Eigen::MatrixXd::Zero(ns, ni);
            st.coherent[e].eps = st.eps[e];
            st.coherent[e].eps_weight = st.eps_weights[e];
            st.coherent[e].filter_s = st.filter_s[e];
            st.coherent[e].filter_i = st.filter_i[e];
            st.coherent[e].signal_weights = st.signal_weights;
            st.coherent[e].idler_weights = st.idler_weights;
        }
    }

    Eigen::VectorXd sws(ns), swi(ni);
    for (std::size_t m = 0; m < ns; ++m) sws[m] = std::sqrt(grid.theta_s.weights[m]);
    for (std::size_t n = 0; n < ni; ++n) swi[n] = std::sqrt(grid.theta_i.weights[n]);

    struct Partial {
        Eigen::MatrixXd rs, ri, coh;
    };
    auto make = [&](std::size_t task) {
        const std::size_t e = task / chunks_per_eps;
        const std::size_t first = (task % chunks_per_eps) * chunk;
        const std::size_t count = std::min(chunk, half.size() - first);
        Partial p;
        Eigen::MatrixXd S;
        Eigen::MatrixXd stack_s, stack_i;
        if (request.signal_density) stack_s.resize(ns, count * ni);
        if (request.idler_density) stack_i.resize(ni, count * ns);
        if (request.coherent) p.coh = Eigen::MatrixXd::Zero(ns, ni);
        for (std::size_t j = 0; j < count; ++j) {
            const double w = half.weights[first + j];
            model.fill(half.nodes[first + j], model.frequency(e), S, false);
            const double sw = std::sqrt(w);
            if (request.signal_density) stack_s.middleCols(j * ni, ni) = sw * S * swi.asDiagonal();
            if (request.idler_density) stack_i.middleCols(j * ns, ns) = sw * S.transpose() * sws.asDiagonal();
            if (request.coherent) p.coh += w * S;
        }
        if (request.signal_density) {
            p.rs = Eigen::MatrixXd::Zero(ns, ns);
            p.rs.selfadjointView<Eigen::Lower>().rankUpdate(stack_s);
        }
        if (request.idler_density) {
            p.ri = Eigen::MatrixXd::Zero(ni, ni);
            p.ri.selfadjointView<Eigen::Lower>().rankUpdate(stack_i);
        }
        return p;
    };
    auto combine = [&](std::size_t task, Partial&& p) {
        const std::size_t e = task / chunks_per_eps;
        if (request.signal_density) st.signal_per_eps[e] += p.rs;
        if (request.idler_density) st.idler_per_eps[e] += p.ri;
        if (request.coherent) st.coherent[e].amplitude += p.coh;
    };
    ordered_reduce(n_eps * chunks_per_eps, options.threads, make, combine);
    return st;
}

}  // namespace spdc
