#include "fadrc/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fadrc/errors.hpp"

namespace fadrc {

SimulationTrace simulate(const AdrcLoop& loop, const ReferenceSignal& ref, const DisturbanceSignal& dist,
                         const SimConfig& cfg) {
    loop.validate();
    const double h = cfg.step;
    if (!(h > 0.0) || !(cfg.horizon > 0.0) || !(cfg.divergence_ratio > 0.0))
        throw InvalidArgument("simulate: step and horizon must be > 0");
    if (cfg.plant_substeps < 1)
        throw InvalidArgument("simulate: plant_substeps must be >= 1");
    const double steps = cfg.horizon / h;
    const long N = std::lround(steps);
    if (std::abs(steps - static_cast<double>(N)) > 1e-6)
        throw InvalidArgument(fmt::format("simulate: step {} does not divide horizon {}", h, cfg.horizon));
    if (std::abs(h * loop.observer.sample_rate - 1.0) > 1e-9)
        throw InvalidArgument(fmt::format("simulate: step {} does not match observer rate {}", h,
                                          loop.observer.sample_rate));

    ObserverState obs = make_observer_state(loop.observer);
    PlantState plant(loop.plant.order_m());
    const double hp = h / cfg.plant_substeps;

    SimulationTrace tr;
    tr.step = h;
    const auto cap = static_cast<size_t>(N + 1);
    tr.time.reserve(cap);
    tr.reference.reserve(cap);
    tr.output.reserve(cap);
    tr.control.reserve(cap);
    tr.aux_control.reserve(cap);
    tr.q_hat.reserve(cap);
    tr.f_hat.reserve(cap);
    tr.observer_states.reserve(cap);

    const double y_limit = cfg.divergence_ratio * std::max(1.0, std::abs(ref.amplitude));
    double u_prev = 0.0;
    for (long k = 0; k <= N; ++k) {
        const double t = static_cast<double>(k) * h;
        const double y = plant.output();
        const double r = ref.at(t);
        const EsoOutput est = eso_step(loop.observer, obs, u_prev, y);
        const double u0 = aux_output(loop.aux, {r, 0.0}, {est.z[0], est.dz1});
        const double u = adrc_control(u0, est.q_hat, est.f_hat, loop.b0);
        if (!obs.valid || !std::isfinite(u) || !std::isfinite(y)) {
            tr.diverged = true;
            tr.note = fmt::format("non-finite state at t={}", t);
            break;
        }
        if (std::abs(y) > y_limit) {
            tr.diverged = true;
            tr.note = fmt::format("|y| exceeded {} at t={}", y_limit, t);
            break;
        }
        tr.time.push_back(t);
        tr.reference.push_back(r);
        tr.output.push_back(y);
        tr.control.push_back(u);
        tr.aux_control.push_back(u0);
        tr.q_hat.push_back(est.q_hat);
        tr.f_hat.push_back(est.f_hat);
        tr.observer_states.push_back(est.z);
        if (k == N)
            break;
        bool finite = true;
        for (int j = 0; j < cfg.plant_substeps && finite; ++j)
            plant_step(loop.plant, plant, u + dist.at(t + j * hp), hp, &finite);
        u_prev = u;
        if (!finite) {
            tr.diverged = true;
            tr.note = fmt::format("plant state non-finite after t={}", t);
            break;
        }
    }
    return tr;
}

StepMetrics step_metrics(const SimulationTrace& tr, double ref, double band_pct) {
    StepMetrics m;
    if (tr.diverged || tr.output.empty())
        return m;
    if (ref == 0.0)
        throw InvalidArgument("step_metrics: reference value must be nonzero");
    m.valid = true;
    m.peak_value = *std::max_element(tr.output.begin(), tr.output.end());
    m.overshoot_pct = std::max(0.0, 100.0 * (m.peak_value - ref) / ref);
    m.steady_state_error = std::abs(ref - tr.output.back());
    const double band = std::abs(ref) * band_pct / 100.0;
    size_t last_out = tr.output.size();
    for (size_t i = tr.output.size(); i-- > 0;) {
        if (std::abs(tr.output[i] - ref) > band) {
            last_out = i;
            break;
        }
    }
    if (last_out == tr.output.size()) {
        m.settled = true;
        m.settling_time = tr.time.front();
    } else if (last_out + 1 < tr.output.size()) {
        m.settled = true;
        m.settling_time = tr.time[last_out + 1];
    } else {
        m.settling_time = tr.time.back();
    }
    return m;
}

double overshoot_fluctuation(const std::vector<double>& peaks, double reference) {
    if (peaks.empty())
        throw InvalidArgument("overshoot_fluctuation: no peaks");
    if (reference == 0.0)
        throw InvalidArgument("overshoot_fluctuation: reference must be nonzero");
    const auto [lo, hi] = std::minmax_element(peaks.begin(), peaks.end());
    return (*hi - *lo) / reference * 100.0;
}

unsigned sweep_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FADRC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            n = static_cast<unsigned>(v);
    }
    return n;
}

std::map<double, SimulationTrace> gain_sweep(const AdrcLoop& loop, const std::vector<double>& ks,
                                             const ReferenceSignal& ref, const DisturbanceSignal& dist,
                                             const SimConfig& cfg) {
    std::vector<SimulationTrace> out(ks.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next.fetch_add(1)) < ks.size();) {
            AdrcLoop l = loop;
            l.aux.k_p = loop.aux.k_p * ks[i];
            try {
                out[i] = simulate(l, ref, dist, cfg);
            } catch (const std::exception& e) {
                out[i].diverged = true;
                out[i].note = e.what();
            }
        }
    };
    const unsigned nt = std::min<unsigned>(sweep_threads(), static_cast<unsigned>(ks.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < nt; ++t)
            pool.emplace_back(worker);
        worker();
    }
    std::map<double, SimulationTrace> res;
    for (size_t i = 0; i < ks.size(); ++i)
        res.emplace(ks[i], std::move(out[i]));
    return res;
}

void write_trace_csv(const SimulationTrace& tr, std::ostream& os) {
    os << "t,r,y,u,u0,q_hat,f_hat\n";
    for (size_t i = 0; i < tr.size(); ++i)
        fmt::print(os, "{},{},{},{},{},{},{}\n", tr.time[i], tr.reference[i], tr.output[i], tr.control[i],
                   tr.aux_control[i], tr.q_hat[i], tr.f_hat[i]);
}

void write_metrics_text(const StepMetrics& m, std::ostream& os) {
    fmt::print(os, "valid={}\novershoot_pct={}\nsettling_time={}\nsettled={}\nsteady_state_error={}\npeak_value={}\n",
               m.valid, m.overshoot_pct, m.settling_time, m.settled, m.steady_state_error, m.peak_value);
}

} // namespace fadrc
