#pragma once

#include <vector>

#include "fadrc/freqanal.hpp"
#include "fadrc/observers.hpp"
#include "fadrc/plants.hpp"

namespace fadrc {

struct AuxController {
    enum class Kind { P, PD, full_state };
    Kind kind = Kind::P;
    double k_p = 0.0;
    std::vector<double> k_d; // k_d1 .. k_d(m-2); exactly one for PD (C_pd = k_p (1 + k_d s))
    bool reference_feedforward = false;

    void validate() const;
    int gain_count() const { return 1 + static_cast<int>(k_d.size()); }
};

struct AdrcLoop {
    PlantModel plant;
    ObserverConfig observer;
    AuxController aux;
    double b0 = 1.0;

    void validate() const;
};

// u = (u0 - q_hat - f_hat) / b0
double adrc_control(double u0, double q_hat, double f_hat, double b0);

// r_derivs[0] = r, r_derivs[i] = r^(i); z1_derivs likewise for the estimate.
// For PD the single derivative term is k_p * k_d * (r' - z1'). The optional
// feedforward r^(n gamma) is passed as the trailing entry of r_derivs.
double aux_output(const AuxController& aux, const std::vector<double>& r_derivs,
                  const std::vector<double>& z1_derivs);

// Phase-lead split: the PD zero supplies the phase deficit at target_wc, the
// gain closes the magnitude condition. `loop` is the open loop with C_pd = 1.
AuxController match_crossover_design(const FoTransferFunction& loop, double target_wc, double target_pm_deg);

// Number of auxiliary gains an m-th order plant needs: IFO uses m-1, IO uses m.
int aux_gain_count(ObserverKind kind, int m);

} // namespace fadrc
