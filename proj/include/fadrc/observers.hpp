#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "fadrc/fracops.hpp"

namespace fadrc {

enum class ObserverKind { IFO, FO, IO };

// How each fractional channel integrator is realized in discrete time.
//  gl:  full-memory Grünwald-Letnikov sum (default, exact low-frequency behavior)
//  iri: fixed-order IIR from iri_integrator, trapezoidal rule for the integer part
enum class ChannelScheme { gl, iri };

const char* to_string(ObserverKind k);
const char* to_string(ChannelScheme s);

struct ObserverConfig {
    ObserverKind kind = ObserverKind::IFO;
    int n = 2;
    int m = 2;
    double gamma = 0.75;
    double b0 = 1.0;
    std::vector<double> gains_L; // beta_1 .. beta_{n+1}
    double sample_rate = 8000.0;
    int approx_order = 7;
    ChannelScheme scheme = ChannelScheme::gl;

    double nu() const { return m - n * gamma; }
    double chi() const { return m - n * gamma + gamma; }
    void validate() const;
};

// One discrete integrator of order alpha > 0 with direct feedthrough.
class ChannelIntegrator {
public:
    ChannelIntegrator(double alpha, double sample_rate, ChannelScheme scheme, int approx_order);
    double feedthrough() const;
    double free_response() const;
    double step(double x);
    double alpha() const { return alpha_; }

private:
    double alpha_;
    std::variant<GlOperator, DiscreteFilter> impl_;
};

struct ObserverState {
    std::vector<double> z;
    std::vector<ChannelIntegrator> channels; // one per state (fractional kinds)
    std::optional<ChannelIntegrator> nu_integrator; // IFO only: I^nu for q_hat
    double q_hat = 0.0;
    double f_hat = 0.0;
    double dz1 = 0.0; // last right-hand side of the first channel
    bool valid = true;
};

struct EsoOutput {
    std::vector<double> z;
    double q_hat = 0.0;
    double f_hat = 0.0;
    // Right-hand side of channel 1: z_1^(gamma) for fractional kinds, dz_1/dt for IO.
    double dz1 = 0.0;
};

// beta_i = C(n+1, i) * omega_o^i
std::vector<double> bandwidth_gains(double omega_o, int n);

ObserverState make_observer_state(const ObserverConfig& cfg);

EsoOutput ifo_eso_step(const ObserverConfig& cfg, ObserverState& st, double u, double y);
EsoOutput fo_eso_step(const ObserverConfig& cfg, ObserverState& st, double u, double y);
EsoOutput io_eso_step(const ObserverConfig& cfg, ObserverState& st, double u, double y);
EsoOutput eso_step(const ObserverConfig& cfg, ObserverState& st, double u, double y);

} // namespace fadrc
