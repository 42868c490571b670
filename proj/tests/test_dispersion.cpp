#include <doctest.h>

#include <cmath>
#include <random>

#include "spdc/dispersion.hpp"
#include "spdc/errors.hpp"
#include "spdc/units.hpp"

using namespace spdc;

namespace {

// Reference values evaluated from data/ktp.yaml with a 30-digit calculator.
constexpr double kNz532At25 = 1.88865071045353;
constexpr double kNy810At111 = 1.75674891616935;
constexpr double kDk0At111 = 626.304548818023;  // rad/m, 532 -> 810 + 1550.07, period 9.6 um

const DispersionModel& ktp() {
    static const DispersionModel m = DispersionModel::builtin_ktp();
    return m;
}

CrystalConfig default_crystal(double temperature) {
    CrystalConfig c;
    c.temperature = temperature;
    return c;
}

}  // namespace

TEST_CASE("bundled dataset reproduces reference indices") {
    const double nz = refractive_index(ktp(), Axis::Z, 532 * nm, 25.0);
    CHECK(nz == doctest::Approx(1.89).epsilon(0.02 / 1.89));
    CHECK(nz == doctest::Approx(kNz532At25).epsilon(1e-12));
    CHECK(refractive_index(ktp(), Axis::Y, 810 * nm, 111.0) == doctest::Approx(kNy810At111).epsilon(1e-12));
    // X follows Y by default.
    CHECK(refractive_index(ktp(), Axis::X, 1064 * nm, 60.0) == refractive_index(ktp(), Axis::Y, 1064 * nm, 60.0));
}

TEST_CASE("dataset bounds raise domain errors") {
    CHECK_THROWS_AS(refractive_index(ktp(), Axis::Z, 300 * nm, 25.0), DomainError);
    CHECK_THROWS_AS(refractive_index(ktp(), Axis::Z, 4 * um, 25.0), DomainError);
    CHECK_THROWS_AS(refractive_index(ktp(), Axis::Z, 800 * nm, 250.0), DomainError);
    CHECK_THROWS_AS(refractive_index(ktp(), Axis::Z, 800 * nm, -5.0), DomainError);
}

TEST_CASE("indices are physical over the whole validity box") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> lam(0.41e-6, 3.49e-6), temp(0.0, 200.0);
    for (int trial = 0; trial < 400; ++trial) {
        const double l = lam(rng), t = temp(rng);
        for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
            const double n = refractive_index(ktp(), a, l, t);
            CHECK(n > 1.0);
            const double h = 1e-10;
            const double slope = (refractive_index(ktp(), a, l + h, t) - refractive_index(ktp(), a, l - h, t)) / (2 * h);
            CHECK(std::isfinite(slope));
            CHECK(std::abs(slope) < 1e6);  // below 1 per micrometre
        }
    }
}

TEST_CASE("dataset loads from YAML text and rejects broken files") {
    const DispersionModel m = DispersionModel::from_file(SPDC_DATA_DIR "/ktp.yaml");
    CHECK(m.index(Axis::Z, 700 * nm, 80.0) == ktp().index(Axis::Z, 700 * nm, 80.0));
    CHECK_THROWS_AS(DispersionModel::from_yaml_text("name: broken\n"), ConfigError);
    CHECK_THROWS_AS(DispersionModel::from_file("/nonexistent/ktp.yaml"), ConfigError);
    DispersionModel edited = ktp();
    edited.set_coefficient(Axis::Z, "A", 4.7);
    CHECK(edited.index(Axis::Z, 700 * nm, 25.0) > ktp().index(Axis::Z, 700 * nm, 25.0));
    CHECK_THROWS_AS(edited.set_coefficient(Axis::Z, "Q", 1.0), ConfigError);
}

TEST_CASE("energy matching and triplet ordering") {
    CHECK(energy_match_idler(532 * nm, 810 * nm) == doctest::Approx(1550.0719424460437 * nm).epsilon(1e-13));
    const WaveTriplet t = WaveTriplet::from_pump_signal(532 * nm, 1550.0719424460437 * nm);
    CHECK(t.lambda_s == doctest::Approx(810 * nm));
    CHECK(t.lambda_i == doctest::Approx(1550.0719424460437 * nm));
    CHECK_THROWS_AS(WaveTriplet::from_pump_signal(532 * nm, 500 * nm), DomainError);
}

TEST_CASE("index ellipse wave number") {
    CHECK(k_of_theta(1.1e7, 1.0e7, 0.01) == doctest::Approx(10999884.505668921).epsilon(1e-12));
    CHECK(k_of_theta(1.1e7, 1.0e7, 0.0) == doctest::Approx(1.1e7));
    CHECK(k_of_theta(1.1e7, 1.0e7, kPi / 2) == doctest::Approx(1.0e7));
}

TEST_CASE("colinear mismatch matches an independent evaluation") {
    const WaveTriplet t = WaveTriplet::from_pump_signal(532 * nm, 810 * nm);
    CHECK(qpm_mismatch(default_crystal(111.0), ktp(), t) == doctest::Approx(kDk0At111).epsilon(1e-8));
}

TEST_CASE("phase-matching temperature for the 532/810/1550 triplet") {
    const WaveTriplet t = WaveTriplet::from_pump_signal(532 * nm, 810 * nm);
    CrystalConfig c = default_crystal(25.0);
    const double T = solve_qpm_temperature(c, ktp(), t, {20.0, 200.0});
    CHECK(T >= 96.0);
    CHECK(T <= 126.0);
    c.temperature = T;
    CHECK(std::abs(qpm_mismatch(c, ktp(), t)) < 1e-6 * c.grating_constant());

    // Sign change across the root and growth away from it.
    double previous = 0.0;
    for (double dT : {2.0, 5.0, 10.0, 20.0}) {
        c.temperature = T - dT;
        const double below = qpm_mismatch(c, ktp(), t);
        c.temperature = T + dT;
        const double above = qpm_mismatch(c, ktp(), t);
        CHECK(below * above < 0.0);
        CHECK(std::abs(above) > previous);
        previous = std::abs(above);
    }
}

TEST_CASE("phase matching fails cleanly without a grating") {
    const WaveTriplet t = WaveTriplet::from_pump_signal(532 * nm, 810 * nm);
    CrystalConfig c = default_crystal(25.0);
    c.poling_period = std::numeric_limits<double>::infinity();
    CHECK(c.grating_constant() == 0.0);
    CHECK_THROWS_AS(solve_qpm_temperature(c, ktp(), t, {20.0, 200.0}), NumericalError);
}

TEST_CASE("crystal validation") {
    CrystalConfig c;
    c.length = -1.0;
    CHECK_THROWS_AS(c.validate(ktp()), ConfigError);
    c = CrystalConfig{};
    c.temperature = 300.0;
    CHECK_THROWS_AS(c.validate(ktp()), ConfigError);
    CHECK_THROWS_AS(parse_axis("W"), ConfigError);
    CHECK(parse_axis("z") == Axis::Z);
}
