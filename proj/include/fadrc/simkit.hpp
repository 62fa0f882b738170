#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fadrc/adrc.hpp"
#include "fadrc/plants.hpp"

namespace fadrc {

struct ReferenceSignal {
    double amplitude = 1.0;
    double onset = 0.0; // r(t) = amplitude for t >= onset
    double at(double t) const { return t >= onset ? amplitude : 0.0; }
};

struct SimConfig {
    double horizon = 1.0;
    double step = 1.0 / 8000.0;
    // RK4 sub-steps per control period; the controller and observer still run once per step.
    int plant_substeps = 1;
    // |y| beyond this multiple of max(1, |reference|) counts as divergence.
    double divergence_ratio = 1e6;
};

struct SimulationTrace {
    double step = 0.0;
    std::vector<double> time;
    std::vector<double> reference;
    std::vector<double> output;
    std::vector<double> control;
    std::vector<double> aux_control;
    std::vector<double> q_hat;
    std::vector<double> f_hat;
    std::vector<std::vector<double>> observer_states;
    bool diverged = false;
    std::string note;

    size_t size() const { return time.size(); }
};

struct StepMetrics {
    double overshoot_pct = 0.0;
    double settling_time = 0.0;
    bool settled = false;
    double steady_state_error = 0.0;
    double peak_value = 0.0;
    bool valid = false;
};

// Disturbance d is input-referred: the plant sees u + d.
// Per sample: read y, observer step with the previous u, aux law, ADRC law,
// then hold u over the next period.
SimulationTrace simulate(const AdrcLoop& loop, const ReferenceSignal& reference, const DisturbanceSignal& disturbance,
                         const SimConfig& cfg);

// Settling time is the instant the output last enters the +/- band_pct envelope.
StepMetrics step_metrics(const SimulationTrace& trace, double reference_value, double settle_band_pct = 2.0);

double overshoot_fluctuation(const std::vector<double>& peaks, double reference);

// Scales k_p only. Runs concurrently up to FADRC_THREADS (default: hardware concurrency).
std::map<double, SimulationTrace> gain_sweep(const AdrcLoop& loop, const std::vector<double>& k_values,
                                             const ReferenceSignal& reference, const DisturbanceSignal& disturbance,
                                             const SimConfig& cfg);

unsigned sweep_threads();

void write_trace_csv(const SimulationTrace& trace, std::ostream& os);
void write_metrics_text(const StepMetrics& m, std::ostream& os);

} // namespace fadrc
