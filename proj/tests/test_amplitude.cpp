#include <doctest.h>

#include <cmath>

#include "spdc/amplitude.hpp"
#include "spdc/errors.hpp"
#include "spdc/units.hpp"

using namespace spdc;

namespace {

// Reference values evaluated from data/ktp.yaml with a 30-digit calculator
// (T = 111 C, pump 532 nm, signal 810 nm, period 9.6 um).
constexpr double kEps811 = -5479990787253.9;  // rad/s
constexpr double kPq5mrad = 2.42030036747792e-6;
constexpr double kDkPrime5mrad = 354.956790281288;  // rad/m
constexpr double kThreeTermSum = 1.27331255000535;

const DispersionModel& ktp() {
    static const DispersionModel m = DispersionModel::builtin_ktp();
    return m;
}

double tilted_k(double wavelength, double theta, double T) {
    const auto [kz, ky] = axis_wave_numbers(ktp(), Axis::Z, wavelength, T);
    return k_of_theta(kz, ky, theta);
}

AmplitudeSetup small_setup(int n_theta, int n_phi, int n_eps, double eps_half_span) {
    AmplitudeSetup s;
    s.crystal.temperature = 111.0;
    s.dispersion = ktp();
    s.triplet = WaveTriplet::from_pump_signal(532 * nm, 810 * nm);
    const double np = ktp().index(Axis::Z, 532 * nm, 111.0);
    s.pump = PumpSpec::from_xi(s.crystal.length, 532 * nm, np, 1.7, WaistConvention::Medium);
    s.filter_s = FilterSpec::gaussian(810 * nm, 0.5 * nm);
    s.filter_i = FilterSpec::gaussian(1550.07 * nm, 2.0 * nm);
    s.grid = SimulationGrid::make(n_theta, 0.03, 0.04, n_phi, n_eps, eps_half_span, AngularMeasure::Planar);
    return s;
}

}  // namespace

TEST_CASE("frequency offset of a 1 nm detuning") {
    const double e = epsilon_of_lambda(811 * nm, 810 * nm, ktp(), Axis::Z, 111.0);
    CHECK(e == doctest::Approx(kEps811).epsilon(1e-9));
    CHECK(lambda_of_epsilon(e, 810 * nm, ktp(), Axis::Z, 111.0) == doctest::Approx(811 * nm).epsilon(1e-12));
    CHECK(lambda_of_epsilon(-e, 810 * nm, ktp(), Axis::Z, 111.0) < 810 * nm);
    CHECK(lambda_of_epsilon(0.0, 810 * nm, ktp(), Axis::Z, 111.0) == 810 * nm);
}

TEST_CASE("off-axis longitudinal mismatch matches an independent evaluation") {
    const double T = 111.0;
    const double li = energy_match_idler(532 * nm, 810 * nm);
    const double ks = tilted_k(810 * nm, 0.005, T);
    const double ki = tilted_k(li, 0.005, T);
    const double kp = 2 * kPi * ktp().index(Axis::Z, 532 * nm, T) / (532 * nm);
    const double K = 2 * kPi / (9.6 * um);
    CHECK(transverse_match(ks, 0.005, ki, 0.005, kPi, kp) == doctest::Approx(kPq5mrad).epsilon(1e-9));
    const auto dk = delta_kz_prime(ks, 0.005, ki, 0.005, kPi, kp, K);
    REQUIRE(dk.has_value());
    CHECK(*dk == doctest::Approx(kDkPrime5mrad).epsilon(1e-6));
    // Transverse momentum beyond the pump's: evanescent, no propagating solution.
    CHECK_FALSE(delta_kz_prime(2e7, 1.0, 2e7, 1.0, 0.0, 1e7, 0.0).has_value());
}

TEST_CASE("square-wave grating series") {
    CrystalConfig c;
    c.grating_terms = 3;
    CHECK(longitudinal_sinc(c, 0.0) == doctest::Approx(kThreeTermSum).epsilon(1e-12));
    CHECK(std::abs(longitudinal_sinc(c, 0.0) - 4.0 / kPi) < 1e-3);
    c.grating_terms = 0;
    CHECK(longitudinal_sinc(c, 0.0) == doctest::Approx(4.0 / kPi).epsilon(1e-15));
    // First zero of the sinc.
    CHECK(std::abs(longitudinal_sinc(c, 2 * kPi / c.length)) < 1e-15);
}

TEST_CASE("pump angular spectrum carries unit power") {
    PumpSpec p{532 * nm, 30 * um, 2 * kPi * 1.89 / (532 * nm)};
    const double kw = p.k_z * p.waist;
    // Spherical measure over the forward hemisphere.
    const int n = 200000;
    const double tmax = 12.0 / kw;
    double sph = 0.0;
    for (int j = 0; j < n; ++j) {
        const double t = (j + 0.5) * tmax / n;
        sph += 2 * kPi * std::pow(pump_angular_spectrum(p, t), 2) * std::sin(t) * tmax / n;
    }
    CHECK(sph == doctest::Approx(1.0).epsilon(1e-5));
    // Planar measure: one transverse coordinate over the whole line.
    const double norm = pump_power_normalization(p, AngularMeasure::Planar);
    double plan = 0.0;
    for (int j = -n; j < n; ++j) {
        const double t = (j + 0.5) * tmax / n;
        plan += std::pow(norm * std::exp(-kw * kw * t * t / 4.0), 2) * tmax / n;
    }
    CHECK(plan == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pump_power_normalization(p, AngularMeasure::Spherical) == doctest::Approx(kw / std::sqrt(2 * kPi)));
}

TEST_CASE("slice is the product of independently evaluated factors") {
    AmplitudeSetup s = small_setup(3, 1, 1, 0.0);
    const double eps = epsilon_of_lambda(810.3 * nm, 810 * nm, ktp(), Axis::Z, 111.0);
    s.grid.eps.nodes = {eps};
    const AmplitudeModel model(s);
    const AmplitudeSlice slice = model.slice_at(1.1, eps);

    const double ls = model.frequency(0).lambda_s;
    CHECK(ls == doctest::Approx(810.3 * nm).epsilon(1e-12));
    const double li = energy_match_idler(532 * nm, ls);
    const double kp = 2 * kPi * ktp().index(Axis::Z, 532 * nm, 111.0) / (532 * nm);
    const double kw = kp * s.pump.waist;
    const double norm = s.crystal.length * pump_power_normalization(s.pump, AngularMeasure::Planar);
    const double filt = filter_amplitude(s.filter_s, ls) * filter_amplitude(s.filter_i, li);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double ts = s.grid.theta_s.nodes[a], ti = s.grid.theta_i.nodes[b];
            const double ks = tilted_k(ls, ts, 111.0), ki = tilted_k(li, ti, 111.0);
            const double pq = transverse_match(ks, ts, ki, ti, 1.1, kp);
            const double dk = *delta_kz_prime(ks, ts, ki, ti, 1.1, kp, s.crystal.grating_constant());
            const double expected = norm * longitudinal_sinc(s.crystal, dk) * std::exp(-kw * kw * pq / 4.0) * filt;
            CHECK(slice.values(a, b) == doctest::Approx(expected).epsilon(1e-10));
        }
}

TEST_CASE("amplitude is linear in the global prefactor") {
    AmplitudeSetup s = small_setup(6, 2, 1, 0.0);
    const AmplitudeSlice one = build_slice(s, 0.4, 0.0);
    s.prefactor = 2.0;
    const AmplitudeSlice two = build_slice(s, 0.4, 0.0);
    CHECK((two.values - 2.0 * one.values).cwiseAbs().maxCoeff() <= 1e-14 * one.values.cwiseAbs().maxCoeff());
}

TEST_CASE("half dphi interval with doubled weights equals the full sum") {
    const AmplitudeSetup s = small_setup(10, 8, 1, 0.0);
    const AmplitudeModel model(s);
    const SimulationGrid& g = model.grid();
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(10, 10), half = Eigen::MatrixXd::Zero(10, 10);
    for (std::size_t j = 0; j < g.dphi.size(); ++j) full += g.dphi.weights[j] * model.slice(j, 0).values;
    const QuadratureAxis h = g.half_dphi();
    const auto idx = g.half_dphi_indices();
    REQUIRE(h.size() == idx.size());
    for (std::size_t j = 0; j < h.size(); ++j) half += h.weights[j] * model.slice(idx[j], 0).values;
    CHECK((full - half).cwiseAbs().maxCoeff() <= 1e-12 * full.cwiseAbs().maxCoeff());
}

TEST_CASE("grid construction and validation") {
    const SimulationGrid g = SimulationGrid::make(10, 0.03, 0.04, 4, 1, 0.0, AngularMeasure::Planar);
    CHECK(g.eps.size() == 1);
    CHECK(g.eps.nodes[0] == 0.0);
    CHECK(g.eps.weights[0] == 1.0);
    CHECK(g.theta_max_s() == doctest::Approx(0.03));
    double wsum = 0;
    for (double w : g.dphi.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2 * kPi));
    CHECK_THROWS_AS(SimulationGrid::make(40, 0.03, 0.04, 4, 1, 0.0, AngularMeasure::Planar).validate(), ConfigError);
    CHECK_THROWS_AS(SimulationGrid::make(10, 1.6, 0.04, 4, 1, 0.0, AngularMeasure::Planar).validate(), ConfigError);
    const auto sph = theta_weights({0.01, 0.02}, 0.01, AngularMeasure::Spherical);
    CHECK(sph[1] == doctest::Approx(std::sin(0.02) * 0.01));
}

TEST_CASE("filters and focusing conversions") {
    const FilterSpec f = FilterSpec::gaussian(810 * nm, 1 * nm);
    CHECK(std::pow(filter_amplitude(f, 810.5 * nm), 2) == doctest::Approx(0.5));
    CHECK(filter_amplitude(FilterSpec::none(), 700 * nm) == 1.0);
    const double w = waist_from_xi(10 * mm, 810 * nm, 1.84, 2.3, WaistConvention::Medium);
    CHECK(w == doctest::Approx(std::sqrt(10 * mm * 810 * nm / (1.84 * kPi * 2.3))));
    CHECK(xi_from_waist(10 * mm, 810 * nm, 1.84, w, WaistConvention::Medium) == doctest::Approx(2.3));
    CHECK(waist_from_xi(10 * mm, 810 * nm, 1.84, 2.3, WaistConvention::Vacuum) > w);
    CHECK_THROWS_AS(waist_from_xi(10 * mm, 810 * nm, 1.84, -1.0, WaistConvention::Medium), ConfigError);
}

TEST_CASE("colinear bandwidth scales inversely with length") {
    CrystalConfig c;
    const WaveTriplet t = WaveTriplet::from_pump_signal(532 * nm, 810 * nm);
    c.temperature = solve_qpm_temperature(c, ktp(), t, {20, 200});
    const double b10 = colinear_bandwidth(c, ktp(), t);
    CHECK(b10 == doctest::Approx(1.0 * nm).epsilon(0.05));
    c.length = 5 * mm;
    CHECK(colinear_bandwidth(c, ktp(), t) == doctest::Approx(2 * b10).epsilon(0.01));
}

TEST_CASE("default polar cutoff stays bounded") {
    const double kp = 2.2e7, ks = 1.4e7;
    CHECK(default_theta_max(ks, kp, 20 * um, 10 * mm) < 0.1);
    CHECK(default_theta_max(ks, kp, 0.1 * um, 1e-6) <= 1.2);
}
