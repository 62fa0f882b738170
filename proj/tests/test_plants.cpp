#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "fadrc/errors.hpp"
#include "fadrc/plants.hpp"

using namespace fadrc;

namespace {

PmsmParams shipped_pmsm() {
    PmsmParams p;
    p.torque_coeff_Cm = 0.38154341650382706;
    p.flywheel_inertia_GD2 = 0.005;
    p.viscous_B = 0.020031372336796152;
    p.speed_factor_Kv = 9.549296585513721;
    p.speed_conv_K1 = 1.0 / 1200.0;
    p.filter_Ti = 0.010015735029396105;
    p.phase_resistance_Rs = 1.0;
    p.q_inductance_Lq = 0.005;
    p.emf_coeff_Ce = 0.05;
    return p;
}

} // namespace

TEST_CASE("example plant") {
    const auto p = example_plant();
    CHECK(p.order_m() == 2);
    CHECK(p.denom_coeffs == std::vector<double>{0.0, 26.08});
    CHECK(p.gain_b == 383.635);
    CHECK(p.gain_b / p.denom_coeffs[1] == doctest::Approx(14.71).epsilon(1e-3));
}

TEST_CASE("plant validation") {
    CHECK_THROWS_AS((PlantModel{{}, 1.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((PlantModel{{1.0}, 0.0}.validate()), InvalidArgument);
    PmsmParams bad = shipped_pmsm();
    bad.filter_Ti = 0.0;
    CHECK_THROWS_AS(pmsm_speed_plant(bad), InvalidArgument);
}

TEST_CASE("PMSM parameters reproduce the published speed-loop plant") {
    const auto pm = shipped_pmsm();
    const auto p = pmsm_speed_plant(pm);
    CHECK(p.gain_b == doctest::Approx(2380.9).epsilon(1e-9));
    CHECK(p.denom_coeffs[1] == doctest::Approx(138.1).epsilon(1e-9));
    CHECK(p.denom_coeffs[0] == doctest::Approx(3819.7).epsilon(1e-9));

    // independent expansion: Ti GD2 s^2 + (Kv B Ti + GD2) s + Kv B, numerator 375 Cm K1
    const double c2 = pm.filter_Ti * pm.flywheel_inertia_GD2;
    const double c1 = pm.speed_factor_Kv * pm.viscous_B * pm.filter_Ti + pm.flywheel_inertia_GD2;
    const double c0 = pm.speed_factor_Kv * pm.viscous_B;
    CHECK(p.denom_coeffs[1] == doctest::Approx(c1 / c2));
    CHECK(p.denom_coeffs[0] == doctest::Approx(c0 / c2));
    CHECK(p.gain_b == doctest::Approx(375 * pm.torque_coeff_Cm * pm.speed_conv_K1 / c2));

    PmsmParams doubled = pm;
    doubled.torque_coeff_Cm *= 2;
    const auto q = pmsm_speed_plant(doubled);
    CHECK(q.gain_b == doctest::Approx(2 * p.gain_b));
    CHECK(q.denom_coeffs == p.denom_coeffs);
    for (double a : p.denom_coeffs)
        CHECK(a > 0.0);
}

TEST_CASE("plant at rest stays at rest") {
    const auto p = example_plant();
    PlantState s(2);
    for (int k = 0; k < 100; ++k)
        CHECK(plant_step(p, s, 0.0, 1e-3) == 0.0);
}

TEST_CASE("RK4 stepping agrees with the exact zero-order-hold discretization") {
    const auto p = example_plant();
    const double h = 1.0 / 8000.0;
    // augmented [A B; 0 0] exponential gives the exact held-input update
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    M(0, 1) = 1.0;
    M(1, 0) = -p.denom_coeffs[0];
    M(1, 1) = -p.denom_coeffs[1];
    M(1, 2) = p.gain_b;
    const Eigen::Matrix3d E = (M * h).exp();
    Eigen::Vector3d x(0, 0, 0);
    PlantState s(2);
    double worst = 0.0;
    for (int k = 0; k < 8000; ++k) {
        const double u = std::sin(7.0 * k * h) + 0.5;
        x(2) = u;
        x = E * x;
        plant_step(p, s, u, h);
        worst = std::max(worst, std::abs(x(0) - s.output()));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("constant input drives the integrating plant to velocity b/a1") {
    const auto p = example_plant();
    PlantState s(2);
    for (int k = 0; k < 8000; ++k)
        plant_step(p, s, 1.0, 1e-3);
    CHECK(s.x[1] == doctest::Approx(383.635 / 26.08).epsilon(1e-6));
}

TEST_CASE("PMSM plant step settles to its DC gain") {
    const PlantModel p{{3819.7, 138.1}, 2380.9};
    PlantState s(2);
    for (int k = 0; k < 16000; ++k)
        plant_step(p, s, 1.0, 1.0 / 8000.0);
    CHECK(s.output() == doctest::Approx(2380.9 / 3819.7).epsilon(1e-6));
}

TEST_CASE("non-finite input is flagged") {
    const auto p = example_plant();
    PlantState s(2);
    bool finite = true;
    plant_step(p, s, std::nan(""), 1e-3, &finite);
    CHECK_FALSE(finite);
    CHECK_THROWS_AS(plant_step(p, s, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("disturbance signals") {
    DisturbanceSignal d;
    CHECK(d.at(3.0) == 0.0);
    d.kind = DisturbanceSignal::Kind::step_at;
    d.amplitude = 2.0;
    d.onset = 0.5;
    CHECK(d.at(0.49) == 0.0);
    CHECK(d.at(0.5) == 2.0);
    d.kind = DisturbanceSignal::Kind::sinusoid;
    d.frequency = 3.0;
    CHECK(d.at(0.2) == doctest::Approx(2.0 * std::sin(0.6)));
}
