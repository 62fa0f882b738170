#include "fadrc/plants.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fadrc/errors.hpp"

namespace fadrc {

void PlantModel::validate() const {
    if (denom_coeffs.empty())
        throw InvalidArgument("plant order must be >= 1");
    if (gain_b == 0.0 || !std::isfinite(gain_b))
        throw InvalidArgument("plant gain b must be finite and nonzero");
    for (double a : denom_coeffs)
        if (!std::isfinite(a))
            throw InvalidArgument("plant coefficients must be finite");
}

void PmsmParams::validate() const {
    const double v[] = {torque_coeff_Cm, flywheel_inertia_GD2, viscous_B, speed_factor_Kv, speed_conv_K1,
                        filter_Ti,       phase_resistance_Rs,  q_inductance_Lq, emf_coeff_Ce};
    for (double x : v)
        if (!(x > 0.0) || !std::isfinite(x))
            throw InvalidArgument("PMSM parameters must all be finite and > 0");
}

double DisturbanceSignal::at(double t) const {
    switch (kind) {
    case Kind::zero:
        return 0.0;
    case Kind::constant:
        return amplitude;
    case Kind::step_at:
        return t >= onset ? amplitude : 0.0;
    case Kind::sinusoid:
        return amplitude * std::sin(frequency * t);
    }
    return 0.0;
}

PlantModel example_plant() { return PlantModel{{0.0, 26.08}, 383.635}; }

PlantModel pmsm_speed_plant(const PmsmParams& p) {
    p.validate();
    const double lead = p.filter_Ti * p.flywheel_inertia_GD2;
    if (lead == 0.0)
        throw InvalidArgument("pmsm_speed_plant: Ti * GD^2 is zero");
    const double b = 375.0 * p.torque_coeff_Cm * p.speed_conv_K1;
    const double s1 = p.speed_factor_Kv * p.viscous_B * p.filter_Ti + p.flywheel_inertia_GD2;
    const double s0 = p.speed_factor_Kv * p.viscous_B;
    return PlantModel{{s0 / lead, s1 / lead}, b / lead};
}

namespace {

void deriv(const PlantModel& p, const std::vector<double>& x, double u, std::vector<double>& dx) {
    const size_t m = x.size();
    for (size_t i = 0; i + 1 < m; ++i)
        dx[i] = x[i + 1];
    double top = p.gain_b * u;
    for (size_t i = 0; i < m; ++i)
        top -= p.denom_coeffs[i] * x[i];
    dx[m - 1] = top;
}

} // namespace

double plant_step(const PlantModel& plant, PlantState& st, double u, double h, bool* finite) {
    if (!(h > 0.0))
        throw InvalidArgument("plant_step: step must be > 0");
    const size_t m = st.x.size();
    if (m != plant.denom_coeffs.size())
        throw InvalidArgument(fmt::format("plant_step: state size {} != plant order {}", m, plant.order_m()));
    std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
    deriv(plant, st.x, u, k1);
    for (size_t i = 0; i < m; ++i)
        tmp[i] = st.x[i] + 0.5 * h * k1[i];
    deriv(plant, tmp, u, k2);
    for (size_t i = 0; i < m; ++i)
        tmp[i] = st.x[i] + 0.5 * h * k2[i];
    deriv(plant, tmp, u, k3);
    for (size_t i = 0; i < m; ++i)
        tmp[i] = st.x[i] + h * k3[i];
    deriv(plant, tmp, u, k4);
    bool ok = true;
    for (size_t i = 0; i < m; ++i) {
        st.x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        ok = ok && std::isfinite(st.x[i]);
    }
    if (finite)
        *finite = ok;
    return st.output();
}

} // namespace fadrc
