#include <doctest.h>

#include <cmath>

#include "spdc/beams.hpp"
#include "spdc/errors.hpp"
#include "spdc/units.hpp"

using namespace spdc;

namespace {

const double kK = 2 * kPi / (1 * um);
const double kW0 = 20 * um;

std::vector<double> theta_nodes(int n, double tmax) {
    std::vector<double> t(n);
    for (int j = 0; j < n; ++j) t[j] = (j + 0.5) * tmax / n;
    return t;
}

ModeDecomposition single_mode(const Eigen::VectorXcd& mode) {
    ModeDecomposition d;
    d.eigenvalues = Eigen::VectorXd::Ones(1);
    d.modes = mode;
    d.weights.assign(mode.size(), 1.0);
    return d;
}

std::vector<double> gaussian_profile(const std::vector<double>& y, double w, double c = 0.0) {
    std::vector<double> p;
    for (double v : y) p.push_back(std::exp(-2 * (v - c) * (v - c) / (w * w)));
    return p;
}

std::vector<double> linear_axis(int n, double half) {
    std::vector<double> y(n);
    for (int j = 0; j < n; ++j) y[j] = -half + 2 * half * j / (n - 1);
    return y;
}

}  // namespace

TEST_CASE("Laguerre-Gauss calibration through the full synthesis chain") {
    const std::vector<double> th = theta_nodes(200, 0.06);
    const FieldGridSpec spec{512, kK, 0.06, 2.0};
    std::vector<double> z;
    for (int j = -10; j <= 10; ++j) z.push_back(j * 0.4 * mm);
    for (int p = 0; p <= 3; ++p) {
        const BeamProfile prof = measure_caustic(single_mode(laguerre_gauss_angular(p, kW0, kK, th)), th, spec, z);
        const M2Fit fit = fit_m2(prof, 1 * um);
        CAPTURE(p);
        CHECK(fit.m2 == doctest::Approx(2 * p + 1).epsilon(0.02));
        CHECK(std::abs(fit.z0) < 0.05 * mm);
    }
}

TEST_CASE("second-moment width of Gaussian profiles") {
    const std::vector<double> y = linear_axis(2001, 200 * um);
    CHECK(second_moment_width(gaussian_profile(y, 30 * um), y) == doctest::Approx(30 * um).epsilon(1e-9));
    CHECK(second_moment_width(gaussian_profile(y, 30 * um, 20 * um), y) == doctest::Approx(30 * um).epsilon(1e-6));
}

TEST_CASE("weighted Gaussian fit resists a flat noise floor") {
    const std::vector<double> y = linear_axis(801, 200 * um);
    std::vector<double> p = gaussian_profile(y, 30 * um);
    for (double& v : p) v += 0.01;
    const double moment = second_moment_width(p, y);
    const WeightedWidth fit = weighted_gaussian_width(p, y);
    CHECK(moment > 1.10 * 30 * um);
    CHECK(fit.width == doctest::Approx(30 * um).epsilon(0.03));
    CHECK_FALSE(fit.misfit);

    const WeightedWidth clean = weighted_gaussian_width(gaussian_profile(y, 30 * um), y);
    CHECK(clean.width == doctest::Approx(30 * um).epsilon(1e-6));

    std::vector<double> bimodal = gaussian_profile(y, 15 * um, -60 * um);
    const std::vector<double> right = gaussian_profile(y, 15 * um, 60 * um);
    for (std::size_t j = 0; j < y.size(); ++j) bimodal[j] += right[j];
    CHECK(weighted_gaussian_width(bimodal, y).misfit);
}

TEST_CASE("caustic fit recovers a synthetic hyperbola") {
    BeamProfile b;
    const double w0 = 25 * um, lam = 1 * um, m2 = 1.7, z0 = 0.3 * mm;
    const double zr = kPi * w0 * w0 / (m2 * lam);
    for (int j = -10; j <= 10; ++j) {
        const double z = j * 0.5 * mm;
        b.z.push_back(z);
        b.w.push_back(w0 * std::sqrt(1 + std::pow((z - z0) / zr, 2)));
    }
    const M2Fit fit = fit_m2(b, lam);
    CHECK(fit.m2 == doctest::Approx(m2).epsilon(1e-6));
    CHECK(fit.w0 == doctest::Approx(w0).epsilon(1e-6));
    CHECK(fit.z0 == doctest::Approx(z0).epsilon(1e-4));

    // A monotone caustic has its waist outside the sampled range.
    BeamProfile half;
    for (int j = 0; j <= 10; ++j) {
        half.z.push_back(j * 0.5 * mm);
        half.w.push_back(w0 * std::sqrt(1 + std::pow((j * 0.5 * mm + 1 * mm) / zr, 2)));
    }
    CHECK_THROWS_AS(fit_m2(half, lam), NumericalError);
    BeamProfile tiny{{0.0, 1.0}, {1.0, 1.0}, "second-moment"};
    CHECK_THROWS_AS(fit_m2(tiny, lam), NumericalError);
}

TEST_CASE("intensity is the eigenvalue-weighted sum of mode intensities") {
    const std::vector<double> th = theta_nodes(120, 0.05);
    const FieldGridSpec spec{128, kK, 0.05, 2.0};
    ModeDecomposition d;
    d.eigenvalues = Eigen::VectorXd(2);
    d.eigenvalues << 0.7, 0.3;
    d.modes = Eigen::MatrixXcd(th.size(), 2);
    d.modes.col(0) = laguerre_gauss_angular(0, kW0, kK, th);
    d.modes.col(1) = laguerre_gauss_angular(1, kW0, kK, th);
    d.weights.assign(th.size(), 1.0);
    const double z = 0.5 * mm;
    const FieldFrame frame = synthesize_field(d, th, spec, z);
    const Eigen::MatrixXcd e1 = propagate_field(embed_radial(d.modes.col(0), th, spec), spec, z);
    const Eigen::MatrixXcd e2 = propagate_field(embed_radial(d.modes.col(1), th, spec), spec, z);
    const Eigen::MatrixXd expected = 0.7 * e1.cwiseAbs2() + 0.3 * e2.cwiseAbs2();
    CHECK((frame.intensity - expected).cwiseAbs().maxCoeff() <= 1e-12 * expected.maxCoeff());
}

TEST_CASE("field outside the window is reported") {
    const std::vector<double> th = theta_nodes(120, 0.05);
    const FieldGridSpec spec{64, kK, 0.05, 2.0};
    CHECK_THROWS_AS(synthesize_field(single_mode(laguerre_gauss_angular(0, kW0, kK, th)), th, spec, 50 * mm),
                    NumericalError);
    CHECK_THROWS_AS(FieldGridSpec({66, kK, 0.05, 2.0}).dk(), ConfigError);
    CHECK_THROWS_AS(FieldGridSpec({64, kK, 0.05, 0.5}).dk(), ConfigError);
}

TEST_CASE("x-integrated profile") {
    FieldFrame uniform{Eigen::MatrixXd::Constant(8, 8, 2.0), 1.0, 0.0};
    for (double v : integrated_profile(uniform)) CHECK(v == doctest::Approx(16.0));
    FieldFrame delta{Eigen::MatrixXd::Zero(8, 8), 1.0, 0.0};
    delta.intensity(3, 5) = 1.0;
    const std::vector<double> p = integrated_profile(delta);
    for (int j = 0; j < 8; ++j) CHECK(p[j] == (j == 5 ? 1.0 : 0.0));
    CHECK(uniform.energy() == doctest::Approx(128.0));
}

TEST_CASE("angular spectral form of a Gaussian mode") {
    const std::vector<double> th = theta_nodes(150, 0.05);
    const FieldGridSpec spec{128, kK, 0.05, 2.0};
    const auto [ty, u] = angular_spectral_form(single_mode(laguerre_gauss_angular(0, kW0, kK, th)), th, spec);
    const int n = static_cast<int>(u.size());
    // Even about the axis (index n/2 is theta = 0).
    for (int j = 1; j < n / 2; ++j) CHECK(u[n / 2 + j] == doctest::Approx(u[n / 2 - j]).epsilon(1e-12));
    // Gaussian marginal: ln u is quadratic in k_y with the input curvature.
    const double k1 = kK * std::sin(ty[n / 2 + 4]);
    const double ratio = std::log(u[n / 2] / u[n / 2 + 4]);
    CHECK(ratio == doctest::Approx(kW0 * kW0 * k1 * k1 / 2).epsilon(0.02));
}
