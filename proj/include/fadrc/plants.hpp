#pragma once

#include <vector>

namespace fadrc {

// b / (s^m + a_{m-1} s^{m-1} + ... + a_1 s + a_0)
struct PlantModel {
    std::vector<double> denom_coeffs; // a_0 .. a_{m-1}
    double gain_b = 0.0;

    int order_m() const { return static_cast<int>(denom_coeffs.size()); }
    void validate() const;
};

// The R_s, L_q, C_e fields are carried for completeness; the speed-loop plant
// assumes an ideal current loop and never reads them.
struct PmsmParams {
    double torque_coeff_Cm = 0;
    double flywheel_inertia_GD2 = 0;
    double viscous_B = 0;
    double speed_factor_Kv = 0;
    double speed_conv_K1 = 0;
    double filter_Ti = 0;
    double phase_resistance_Rs = 0;
    double q_inductance_Lq = 0;
    double emf_coeff_Ce = 0;

    void validate() const;
};

struct DisturbanceSignal {
    enum class Kind { zero, constant, step_at, sinusoid };
    Kind kind = Kind::zero;
    double amplitude = 0;
    double onset = 0;      // step_at
    double frequency = 0;  // sinusoid, rad/s

    double at(double t) const;
};

PlantModel example_plant();
PlantModel pmsm_speed_plant(const PmsmParams& p);

// Controllable canonical form: x = [y, y', ..., y^(m-1)].
struct PlantState {
    std::vector<double> x;
    explicit PlantState(int m = 0) : x(static_cast<size_t>(m), 0.0) {}
    double output() const { return x.empty() ? 0.0 : x[0]; }
};

// One RK4 step with the input held. Returns y after the step; false in
// `finite` when the state stopped being finite.
double plant_step(const PlantModel& plant, PlantState& state, double u_plus_d, double step, bool* finite = nullptr);

} // namespace fadrc
