#include "fadrc/adrc.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "fadrc/errors.hpp"

namespace fadrc {

void AuxController::validate() const {
    if (kind == Kind::P && !k_d.empty())
        throw InvalidArgument("P controller takes no derivative gains");
    if (kind == Kind::PD && k_d.size() != 1)
        throw InvalidArgument("PD controller takes exactly one derivative gain");
    if (!std::isfinite(k_p))
        throw InvalidArgument("controller gain must be finite");
}

void AdrcLoop::validate() const {
    plant.validate();
    observer.validate();
    aux.validate();
    if (observer.b0 != b0)
        throw InvalidArgument("loop b0 differs from observer b0");
    if (observer.m != plant.order_m())
        throw InvalidArgument(fmt::format("observer m={} but plant order is {}", observer.m, plant.order_m()));
}

double adrc_control(double u0, double q_hat, double f_hat, double b0) {
    if (b0 == 0.0)
        throw InvalidArgument("adrc_control: b0 must be nonzero");
    return (u0 - q_hat - f_hat) / b0;
}

double aux_output(const AuxController& aux, const std::vector<double>& r, const std::vector<double>& z1) {
    const size_t need = aux.kind == AuxController::Kind::P ? 1 : 1 + aux.k_d.size();
    if (r.size() < need || z1.size() < need)
        throw InvalidArgument(fmt::format("aux_output: need {} derivatives of r and z1", need));
    double u0 = aux.k_p * (r[0] - z1[0]);
    if (aux.kind == AuxController::Kind::PD) {
        u0 += aux.k_p * aux.k_d[0] * (r[1] - z1[1]);
    } else if (aux.kind == AuxController::Kind::full_state) {
        for (size_t i = 0; i < aux.k_d.size(); ++i)
            u0 += aux.k_d[i] * (r[i + 1] - z1[i + 1]);
    }
    if (aux.reference_feedforward) {
        if (r.size() < need + 1)
            throw InvalidArgument("aux_output: feedforward requested but r^(n gamma) missing");
        u0 += r[need];
    }
    return u0;
}

AuxController match_crossover_design(const FoTransferFunction& loop, double wc, double pm) {
    if (!(wc > 0.0))
        throw InvalidArgument("match_crossover_design: target crossover must be > 0");
    const cplx g = loop.eval(wc);
    const double phase_g = std::arg(g) * 180.0 / std::numbers::pi;
    // lead the PD zero must add, reduced to (-180, 180]
    double lead = -180.0 + pm - phase_g;
    lead = std::remainder(lead, 360.0);
    if (lead < 0.0 && lead > -1e-9)
        lead = 0.0;
    if (lead < 0.0)
        throw InfeasibleDesign(fmt::format("PD cannot add lag: required phase {:.4g} deg", lead));
    if (lead >= 90.0)
        throw InfeasibleDesign(fmt::format("required phase lead {:.4g} deg is not below 90 deg", lead));
    const double kid = std::tan(lead * std::numbers::pi / 180.0) / wc;
    const double kip = 1.0 / (std::abs(g) * std::hypot(1.0, kid * wc));
    AuxController c;
    c.kind = AuxController::Kind::PD;
    c.k_p = kip;
    c.k_d = {kid};
    return c;
}

int aux_gain_count(ObserverKind kind, int m) { return kind == ObserverKind::IO ? m : m - 1; }

} // namespace fadrc
