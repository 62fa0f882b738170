#include "fadrc/observers.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "fadrc/errors.hpp"

namespace fadrc {

const char* to_string(ObserverKind k) {
    switch (k) {
    case ObserverKind::IFO:
        return "IFO";
    case ObserverKind::FO:
        return "FO";
    case ObserverKind::IO:
        return "IO";
    }
    return "?";
}

const char* to_string(ChannelScheme s) { return s == ChannelScheme::gl ? "gl" : "iri"; }

void ObserverConfig::validate() const {
    if (n < 1 || m < 1)
        throw InvalidArgument("observer: n and m must be >= 1");
    if (static_cast<int>(gains_L.size()) != n + 1)
        throw InvalidArgument(fmt::format("observer: expected {} gains, got {}", n + 1, gains_L.size()));
    for (double g : gains_L)
        if (!std::isfinite(g))
            throw InvalidArgument("observer: gains must be finite");
    if (b0 == 0.0 || !std::isfinite(b0))
        throw InvalidArgument("observer: b0 must be finite and nonzero");
    if (!(sample_rate > 0.0))
        throw InvalidArgument("observer: sample rate must be > 0");
    if (kind == ObserverKind::IO) {
        if (n != m)
            throw InvalidArgument("IO observer: n must equal m");
        return;
    }
    if (!(gamma > 0.0 && gamma < 1.0))
        throw InvalidArgument(fmt::format("observer: gamma must lie in (0,1), got {}", gamma));
    if (!(n * gamma < m && m < (n + 1) * gamma))
        throw InvalidArgument(fmt::format("observer: need n*gamma < m < (n+1)*gamma, got n={} m={} gamma={}", n, m,
                                          gamma));
}

// ---------------------------------------------------------------------------

namespace {

std::variant<GlOperator, DiscreteFilter> make_channel(double alpha, double fs, ChannelScheme scheme, int order) {
    if (!(alpha > 0.0))
        throw InvalidArgument("channel integrator order must be > 0");
    if (scheme == ChannelScheme::gl)
        return GlOperator(-alpha, 1.0 / fs);
    const double T = 1.0 / fs;
    const double whole = std::floor(alpha + 1e-12);
    const double frac = alpha - whole;
    std::vector<DiscreteFilter> parts;
    for (int k = 0; k < static_cast<int>(whole); ++k)
        parts.emplace_back(std::vector<double>{T / 2, T / 2}, std::vector<double>{1.0, -1.0}, fs, -1.0);
    if (frac > 1e-12)
        parts.push_back(iri_integrator(frac, fs, order));
    return DiscreteFilter::cascade(parts, -alpha);
}

} // namespace

ChannelIntegrator::ChannelIntegrator(double alpha, double sample_rate, ChannelScheme scheme, int approx_order)
    : alpha_(alpha), impl_(make_channel(alpha, sample_rate, scheme, approx_order)) {}

double ChannelIntegrator::feedthrough() const {
    return std::visit([](const auto& f) { return f.feedthrough(); }, impl_);
}

double ChannelIntegrator::free_response() const {
    return std::visit([](const auto& f) { return f.free_response(); }, impl_);
}

double ChannelIntegrator::step(double x) {
    return std::visit([x](auto& f) { return f.step(x); }, impl_);
}

// ---------------------------------------------------------------------------

std::vector<double> bandwidth_gains(double omega_o, int n) {
    if (!(omega_o > 0.0))
        throw InvalidArgument("bandwidth_gains: omega_o must be > 0");
    if (n < 1)
        throw InvalidArgument("bandwidth_gains: n must be >= 1");
    std::vector<double> out;
    double binom = 1.0;
    for (int i = 1; i <= n + 1; ++i) {
        binom = binom * (n + 2 - i) / i;
        out.push_back(binom * std::pow(omega_o, i));
    }
    return out;
}

ObserverState make_observer_state(const ObserverConfig& cfg) {
    cfg.validate();
    ObserverState st;
    st.z.assign(static_cast<size_t>(cfg.n + 1), 0.0);
    if (cfg.kind == ObserverKind::IO)
        return st;
    for (int i = 1; i <= cfg.n + 1; ++i) {
        const double a = (cfg.kind == ObserverKind::IFO && i == cfg.n) ? cfg.chi() : cfg.gamma;
        st.channels.emplace_back(a, cfg.sample_rate, cfg.scheme, cfg.approx_order);
    }
    if (cfg.kind == ObserverKind::IFO)
        st.nu_integrator.emplace(cfg.nu(), cfg.sample_rate, cfg.scheme, cfg.approx_order);
    return st;
}

namespace {

EsoOutput invalid(ObserverState& st) {
    st.valid = false;
    return {st.z, st.q_hat, st.f_hat, st.dz1};
}

// Fractional channels: z_i^(a_i) = z_{i+1} + beta_i (y - z_1) [+ b0 u on channel n].
// Each integrator has feedthrough g_i, so z_i = g_i rhs_i(z) + free_i is solved
// jointly as one small linear system.
std::vector<double> fractional_update(const ObserverConfig& cfg, ObserverState& st, double u, double y) {
    const int N = cfg.n + 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(N, N);
    Eigen::VectorXd c(N);
    for (int i = 0; i < N; ++i) {
        const auto& ch = st.channels[static_cast<size_t>(i)];
        const double g = ch.feedthrough();
        const double beta = cfg.gains_L[static_cast<size_t>(i)];
        M(i, 0) += g * beta;
        if (i + 1 < N)
            M(i, i + 1) -= g;
        double ext = beta * y;
        if (i == cfg.n - 1)
            ext += cfg.b0 * u;
        c(i) = g * ext + ch.free_response();
    }
    const Eigen::VectorXd z = M.partialPivLu().solve(c);
    std::vector<double> rhs(static_cast<size_t>(N));
    const double e = y - z(0);
    for (int i = 0; i < N; ++i) {
        double r = cfg.gains_L[static_cast<size_t>(i)] * e;
        if (i + 1 < N)
            r += z(i + 1);
        if (i == cfg.n - 1)
            r += cfg.b0 * u;
        rhs[static_cast<size_t>(i)] = r;
        st.channels[static_cast<size_t>(i)].step(r);
        st.z[static_cast<size_t>(i)] = z(i);
    }
    st.dz1 = rhs[0];
    return rhs;
}

} // namespace

EsoOutput ifo_eso_step(const ObserverConfig& cfg, ObserverState& st, double u, double y) {
    if (cfg.kind != ObserverKind::IFO)
        throw InvalidArgument("ifo_eso_step: config kind is not IFO");
    if (!st.valid || !std::isfinite(u) || !std::isfinite(y))
        return invalid(st);
    const auto rhs = fractional_update(cfg, st, u, y);
    // Channel n runs at order chi, so rhs_n = D^chi z_n and I^nu rhs_n = D^gamma z_n.
    const double rn = rhs[static_cast<size_t>(cfg.n - 1)];
    st.q_hat = st.nu_integrator->step(rn) - rn;
    st.f_hat = st.z.back();
    return {st.z, st.q_hat, st.f_hat, st.dz1};
}

EsoOutput fo_eso_step(const ObserverConfig& cfg, ObserverState& st, double u, double y) {
    if (cfg.kind != ObserverKind::FO)
        throw InvalidArgument("fo_eso_step: config kind is not FO");
    if (!st.valid || !std::isfinite(u) || !std::isfinite(y))
        return invalid(st);
    fractional_update(cfg, st, u, y);
    st.q_hat = 0.0;
    st.f_hat = st.z.back();
    return {st.z, 0.0, st.f_hat, st.dz1};
}

EsoOutput io_eso_step(const ObserverConfig& cfg, ObserverState& st, double u, double y) {
    if (cfg.kind != ObserverKind::IO)
        throw InvalidArgument("io_eso_step: config kind is not IO");
    if (!st.valid || !std::isfinite(u) || !std::isfinite(y))
        return invalid(st);
    const size_t N = st.z.size();
    const double h = 1.0 / cfg.sample_rate;
    auto f = [&](const std::vector<double>& z, std::vector<double>& dz) {
        const double e = y - z[0];
        for (size_t i = 0; i < N; ++i) {
            dz[i] = cfg.gains_L[i] * e + (i + 1 < N ? z[i + 1] : 0.0);
            if (static_cast<int>(i) == cfg.n - 1)
                dz[i] += cfg.b0 * u;
        }
    };
    std::vector<double> k1(N), k2(N), k3(N), k4(N), t(N);
    f(st.z, k1);
    for (size_t i = 0; i < N; ++i)
        t[i] = st.z[i] + 0.5 * h * k1[i];
    f(t, k2);
    for (size_t i = 0; i < N; ++i)
        t[i] = st.z[i] + 0.5 * h * k2[i];
    f(t, k3);
    for (size_t i = 0; i < N; ++i)
        t[i] = st.z[i] + h * k3[i];
    f(t, k4);
    for (size_t i = 0; i < N; ++i)
        st.z[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    std::vector<double> dz(N);
    f(st.z, dz);
    st.dz1 = dz[0];
    st.q_hat = 0.0;
    st.f_hat = st.z.back();
    return {st.z, 0.0, st.f_hat, st.dz1};
}

EsoOutput eso_step(const ObserverConfig& cfg, ObserverState& st, double u, double y) {
    switch (cfg.kind) {
    case ObserverKind::IFO:
        return ifo_eso_step(cfg, st, u, y);
    case ObserverKind::FO:
        return fo_eso_step(cfg, st, u, y);
    case ObserverKind::IO:
        return io_eso_step(cfg, st, u, y);
    }
    throw InvalidArgument("eso_step: unknown kind");
}

} // namespace fadrc
