#include "spdc/beams.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "spdc/errors.hpp"
#include "spdc/parallel.hpp"
#include "spdc/units.hpp"

namespace spdc {

using cd = std::complex<double>;

double FieldGridSpec::dk() const {
    if (size < 8 || size % 4 != 0) throw ConfigError("FFT size must be a multiple of 4 and at least 8");
    if (!(k > 0 && theta_max > 0 && padding >= 1.0)) throw ConfigError("field grid needs k, theta_max and padding >= 1");
    const double kmax = k * std::sin(std::min(padding * theta_max, kPi / 2 - 1e-6));
    return 2.0 * kmax / size;
}

double FieldGridSpec::pitch() const { return 2.0 * kPi / (size * dk()); }

std::vector<double> FieldGridSpec::y_axis() const {
    std::vector<double> y(size);
    const double p = pitch();
    for (int j = 0; j < size; ++j) y[j] = (j - size / 2) * p;
    return y;
}

double FieldFrame::energy() const { return intensity.sum() * pitch * pitch; }

namespace {

// Interpolation of a radial theta profile onto the (kx, ky) plane: for
// each plane point the lower node index and fractional weight, -1 outside.
struct Embedding {
    std::vector<int> index;
    std::vector<double> frac;
    std::vector<double> cos_theta;
};

Embedding make_embedding(const std::vector<double>& theta, const FieldGridSpec& spec) {
    const int n = spec.size;
    const double dk = spec.dk();
    Embedding e;
    e.index.assign(static_cast<std::size_t>(n) * n, -1);
    e.frac.assign(e.index.size(), 0.0);
    e.cos_theta.assign(e.index.size(), 1.0);
    const double t_hi = theta.back() + 0.5 * (theta.size() > 1 ? theta.back() - theta[theta.size() - 2] : theta.back());
    for (int j = 0; j < n; ++j) {
        const double ky = (j - n / 2) * dk;
        for (int i = 0; i < n; ++i) {
            const double kx = (i - n / 2) * dk;
            const double kt = std::hypot(kx, ky);
            const std::size_t at = static_cast<std::size_t>(j) * n + i;
            if (kt >= spec.k) continue;
            const double t = std::asin(kt / spec.k);
            e.cos_theta[at] = std::cos(t);
            if (t > t_hi) continue;
            // Nodes are midpoints; below the first node hold the first value.
            auto it = std::upper_bound(theta.begin(), theta.end(), t);
            if (it == theta.begin()) {
                e.index[at] = 0;
                e.frac[at] = 0.0;
            } else if (it == theta.end()) {
                e.index[at] = static_cast<int>(theta.size()) - 1;
                e.frac[at] = 0.0;
            } else {
                const int lo = static_cast<int>(it - theta.begin()) - 1;
                e.index[at] = lo;
                e.frac[at] = (t - theta[lo]) / (theta[lo + 1] - theta[lo]);
            }
        }
    }
    return e;
}

Eigen::MatrixXcd apply_embedding(const Embedding& e, const Eigen::VectorXcd& radial, int n) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const std::size_t at = static_cast<std::size_t>(j) * n + i;
            const int lo = e.index[at];
            if (lo < 0) continue;
            const double f = e.frac[at];
            a(i, j) = f == 0.0 ? radial[lo] : (1.0 - f) * radial[lo] + f * radial[lo + 1];
        }
    return a;
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Centered inverse 2-D transform; output magnitudes are what matter, so the
// trailing (-1)^(i+j) phase is dropped.
Eigen::MatrixXcd centered_transform(const Eigen::MatrixXcd& in) {
    const int n = static_cast<int>(in.rows());
    Eigen::MatrixXcd buf(n, n), out(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) buf(i, j) = ((i + j) % 2 == 0) ? in(i, j) : -in(i, j);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(buf.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

void check_window(const Eigen::MatrixXd& intensity, const FieldGridSpec& spec, double z) {
    const int n = spec.size;
    const int band = std::max(1, n / 16);
    double edge = 0.0;
    const double total = intensity.sum();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i < band || j < band || i >= n - band || j >= n - band) edge += intensity(i, j);
    if (total > 0 && edge > 1e-3 * total)
        throw NumericalError("field at z = " + std::to_string(z) + " m reaches the window edge (" +
                             std::to_string(edge / total) + " of power); use an FFT size of at least " +
                             std::to_string(2 * n));
}

Eigen::MatrixXcd propagate_embedded(const Eigen::MatrixXcd& a, const Embedding& e, const FieldGridSpec& spec,
                                    double z) {
    const int n = spec.size;
    Eigen::MatrixXcd phased(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const std::size_t at = static_cast<std::size_t>(j) * n + i;
            phased(i, j) = z == 0.0 ? a(i, j) : a(i, j) * std::exp(cd(0.0, -spec.k * z * e.cos_theta[at]));
        }
    return centered_transform(phased);
}

std::vector<std::size_t> leading_modes(const ModeDecomposition& d, std::size_t max_modes) {
    std::vector<std::size_t> idx;
    for (Eigen::Index j = 0; j < d.eigenvalues.size() && idx.size() < max_modes; ++j)
        if (d.eigenvalues[j] > 1e-8) idx.push_back(static_cast<std::size_t>(j));
    return idx;
}

}  // namespace

Eigen::MatrixXcd embed_radial(const Eigen::VectorXcd& radial, const std::vector<double>& theta,
                              const FieldGridSpec& spec) {
    if (static_cast<std::size_t>(radial.size()) != theta.size()) throw DomainError("radial profile and theta differ");
    return apply_embedding(make_embedding(theta, spec), radial, spec.size);
}

Eigen::MatrixXcd propagate_field(const Eigen::MatrixXcd& angular, const FieldGridSpec& spec, double z) {
    if (angular.rows() != spec.size || angular.cols() != spec.size) throw DomainError("angular plane size mismatch");
    const Embedding e = make_embedding({0.0}, spec);
    return propagate_embedded(angular, e, spec, z);
}

std::vector<FieldFrame> synthesize_caustic(const ModeDecomposition& decomp, const std::vector<double>& theta,
                                           const FieldGridSpec& spec, const std::vector<double>& z,
                                           std::size_t max_modes, int threads) {
    if (static_cast<std::size_t>(decomp.modes.rows()) != theta.size())
        throw DomainError("mode vectors and theta grid differ in length");
    const int n = spec.size;
    const Embedding e = make_embedding(theta, spec);
    const std::vector<std::size_t> modes = leading_modes(decomp, max_modes);
    std::vector<Eigen::MatrixXcd> planes;
    planes.reserve(modes.size());
    for (std::size_t m : modes) planes.push_back(apply_embedding(e, decomp.modes.col(m), n));
    std::vector<FieldFrame> frames(z.size());
    parallel_for(z.size(), threads, [&](std::size_t iz) {
        FieldFrame f;
        f.z = z[iz];
        f.pitch = spec.pitch();
        f.intensity = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t j = 0; j < modes.size(); ++j)
            f.intensity += decomp.eigenvalues[modes[j]] * propagate_embedded(planes[j], e, spec, z[iz]).cwiseAbs2();
        check_window(f.intensity, spec, z[iz]);
        frames[iz] = std::move(f);
    });
    return frames;
}

FieldFrame synthesize_field(const ModeDecomposition& decomp, const std::vector<double>& theta,
                            const FieldGridSpec& spec, double z, std::size_t max_modes) {
    return synthesize_caustic(decomp, theta, spec, {z}, max_modes, 1).front();
}

std::vector<double> integrated_profile(const FieldFrame& frame) {
    std::vector<double> p(static_cast<std::size_t>(frame.intensity.cols()));
    for (Eigen::Index j = 0; j < frame.intensity.cols(); ++j) p[j] = frame.intensity.col(j).sum();
    return p;
}

double second_moment_width(const std::vector<double>& profile, const std::vector<double>& y) {
    if (profile.size() != y.size() || profile.empty()) throw DomainError("profile and axis differ in length");
    double m0 = 0, m1 = 0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (profile[j] < 0) throw DomainError("profile has negative samples");
        m0 += profile[j];
        m1 += profile[j] * y[j];
    }
    if (!(m0 > 0)) throw NumericalError("profile has zero mass");
    const double ybar = m1 / m0;
    double m2 = 0;
    for (std::size_t j = 0; j < y.size(); ++j) m2 += profile[j] * (y[j] - ybar) * (y[j] - ybar);
    return 2.0 * std::sqrt(m2 / m0);
}

namespace {

struct GaussianResiduals : Eigen::DenseFunctor<double> {
    const std::vector<double>& I;
    const std::vector<double>& y;
    std::vector<double> sw;
    double yscale;
    GaussianResiduals(const std::vector<double>& I_, const std::vector<double>& y_, std::vector<double> sw_,
                      double ys)
        : DenseFunctor<double>(3, static_cast<int>(I_.size())), I(I_), y(y_), sw(std::move(sw_)), yscale(ys) {}
    // x = (amplitude, centre / yscale, width / yscale)
    int operator()(const InputType& x, ValueType& f) const {
        for (std::size_t j = 0; j < I.size(); ++j) {
            const double u = (y[j] / yscale - x[1]) / x[2];
            f[j] = sw[j] * (x[0] * std::exp(-2.0 * u * u) - I[j]);
        }
        return 0;
    }
};

struct CausticResiduals : Eigen::DenseFunctor<double> {
    const std::vector<double>& z;
    const std::vector<double>& w;
    double lambda, wscale, zscale;
    CausticResiduals(const std::vector<double>& z_, const std::vector<double>& w_, double lam, double ws, double zs)
        : DenseFunctor<double>(3, static_cast<int>(z_.size())), z(z_), w(w_), lambda(lam), wscale(ws), zscale(zs) {}
    // x = (w0 / wscale, z0 / zscale, M^2)
    int operator()(const InputType& x, ValueType& f) const {
        const double w0 = x[0] * wscale;
        const double zr = kPi * w0 * w0 / (x[2] * lambda);
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double d = (z[j] - x[1] * zscale) / zr;
            f[j] = (w0 * std::sqrt(1.0 + d * d) - w[j]) / wscale;
        }
        return 0;
    }
};

}  // namespace

WeightedWidth weighted_gaussian_width(const std::vector<double>& profile, const std::vector<double>& y,
                                      double center_weighting) {
    const double w2 = second_moment_width(profile, y);
    const double peak = *std::max_element(profile.begin(), profile.end());
    std::size_t at = static_cast<std::size_t>(std::max_element(profile.begin(), profile.end()) - profile.begin());
    std::vector<double> sw(profile.size());
    for (std::size_t j = 0; j < profile.size(); ++j) sw[j] = std::pow(std::max(profile[j], 0.0) / peak, 0.5 * center_weighting);
    const double ys = w2 > 0 ? w2 : 1.0;
    GaussianResiduals f(profile, y, sw, ys);
    Eigen::NumericalDiff<GaussianResiduals> nd(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<GaussianResiduals>> lm(nd);
    Eigen::VectorXd x(3);
    // Start from the half-maximum width, which ignores flat floors.
    double half = 0;
    for (std::size_t j = 0; j < profile.size(); ++j)
        if (profile[j] >= 0.5 * peak) half = std::max(half, std::abs(y[j] - y[at]));
    x << peak, y[at] / ys, std::max(half * 2.0 / std::sqrt(2.0 * std::log(2.0)), 0.5 * w2) / ys;
    lm.minimize(x);
    if (!(std::isfinite(x[2]) && x[2] != 0.0)) throw NumericalError("Gaussian width fit diverged");
    WeightedWidth r;
    r.width = std::abs(x[2]) * ys;
    r.center = x[1] * ys;
    Eigen::VectorXd fv(profile.size());
    f(x, fv);
    double sumw = 0;
    for (double s : sw) sumw += s * s;
    r.residual = std::sqrt(fv.squaredNorm() / sumw) / peak;
    r.misfit = r.residual > 0.05;
    return r;
}

M2Fit fit_m2(const BeamProfile& profile, double wavelength) {
    const std::size_t n = profile.z.size();
    if (n < 5 || profile.w.size() != n) throw NumericalError("M^2 fit needs at least 5 (z, w) samples");
    const std::size_t imin =
        static_cast<std::size_t>(std::min_element(profile.w.begin(), profile.w.end()) - profile.w.begin());
    if (imin == 0 || imin == n - 1)
        throw NumericalError("ill-conditioned M^2 fit: all samples lie on one side of the waist");
    const double w0 = profile.w[imin];
    const double zc = profile.z[imin];
    // Rayleigh range estimate from the farthest sample.
    std::size_t far = std::abs(profile.z.front() - zc) > std::abs(profile.z.back() - zc) ? 0 : n - 1;
    const double ratio = profile.w[far] / w0;
    const double zr0 = ratio > 1.0 + 1e-9 ? std::abs(profile.z[far] - zc) / std::sqrt(ratio * ratio - 1.0)
                                          : 10.0 * std::abs(profile.z[far] - zc);
    const double m2_0 = std::max(kPi * w0 * w0 / (wavelength * zr0), 0.5);
    const double zs = std::max(std::abs(profile.z.back() - profile.z.front()), 1e-12);
    CausticResiduals f(profile.z, profile.w, wavelength, w0, zs);
    Eigen::NumericalDiff<CausticResiduals> nd(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<CausticResiduals>> lm(nd);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    Eigen::VectorXd x(3);
    x << 1.0, zc / zs, m2_0;
    lm.minimize(x);
    if (!x.allFinite() || !(x[2] > 0)) throw NumericalError("M^2 fit diverged");
    M2Fit r;
    r.w0 = std::abs(x[0]) * w0;
    r.z0 = x[1] * zs;
    r.m2 = x[2];
    Eigen::VectorXd fv(n);
    f(x, fv);
    r.residual = std::sqrt(fv.squaredNorm() / n) * w0;
    return r;
}

BeamProfile measure_caustic(const ModeDecomposition& decomp, const std::vector<double>& theta,
                            const FieldGridSpec& spec, const std::vector<double>& z, std::size_t max_modes,
                            int threads) {
    const std::vector<FieldFrame> frames = synthesize_caustic(decomp, theta, spec, z, max_modes, threads);
    const std::vector<double> y = spec.y_axis();
    BeamProfile b;
    for (const FieldFrame& f : frames) {
        b.z.push_back(f.z);
        b.w.push_back(second_moment_width(integrated_profile(f), y));
    }
    return b;
}

std::pair<std::vector<double>, std::vector<double>> angular_spectral_form(const ModeDecomposition& decomp,
                                                                          const std::vector<double>& theta,
                                                                          const FieldGridSpec& spec) {
    Eigen::VectorXcd combined = Eigen::VectorXcd::Zero(decomp.modes.rows());
    for (Eigen::Index j = 0; j < decomp.eigenvalues.size(); ++j)
        if (decomp.eigenvalues[j] > 0) combined += decomp.eigenvalues[j] * decomp.modes.col(j);
    const Eigen::MatrixXcd a = embed_radial(combined, theta, spec);
    const int n = spec.size;
    std::vector<double> ty(n), u(n, 0.0);
    const double dk = spec.dk();
    for (int j = 0; j < n; ++j) {
        ty[j] = std::asin(std::clamp((j - n / 2) * dk / spec.k, -1.0, 1.0));
        for (int i = 0; i < n; ++i) u[j] += std::norm(a(i, j));
    }
    return {ty, u};
}

Eigen::VectorXcd laguerre_gauss_angular(int p, double waist, double k, const std::vector<double>& theta) {
    if (p < 0) throw DomainError("radial index must be >= 0");
    Eigen::VectorXcd v(static_cast<Eigen::Index>(theta.size()));
    for (std::size_t j = 0; j < theta.size(); ++j) {
        const double rho2 = std::pow(k * std::sin(theta[j]) * waist / 2.0, 2);
        v[j] = std::assoc_laguerre(static_cast<unsigned>(p), 0u, 2.0 * rho2) * std::exp(-rho2);
    }
    return v;
}

}  // namespace spdc
