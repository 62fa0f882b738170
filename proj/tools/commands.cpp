#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fadrc/errors.hpp"
#include "fadrc/freqanal.hpp"
#include "fadrc/stability.hpp"

namespace fadrc::cli {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw ConfigError(fmt::format("cannot write '{}'", tmp.string()));
        f << content;
        f.flush();
        if (!f)
            throw ConfigError(fmt::format("write failed for '{}'", tmp.string()));
    }
    fs::rename(tmp, path);
}

namespace {

// gnuplot script next to the CSV; x on a log axis when logx is set.
void emit_plot(const RunConfig& rc, const std::string& csv, const std::vector<std::string>& columns, bool logx) {
    if (!rc.emit_plots)
        return;
    std::string gp = "set datafile separator ','\nset key autotitle columnhead\nset grid\n";
    if (logx)
        gp += "set logscale x\n";
    gp += fmt::format("set terminal pngcairo size 900,600\nset output '{}.png'\nplot ", fs::path(csv).stem().string());
    for (size_t i = 0; i < columns.size(); ++i)
        gp += fmt::format("{}'{}' using 1:'{}' with lines", i ? ", " : "", csv, columns[i]);
    gp += "\n";
    write_atomic(rc.out_dir / (fs::path(csv).stem().string() + ".gp"), gp);
}

LoopParams loop_params(const RunConfig& rc) {
    if (rc.plant.order_m() != 2)
        throw ConfigError("frequency-domain commands need a second-order plant");
    LoopParams lp;
    lp.a0 = rc.plant.denom_coeffs[0];
    lp.a1 = rc.plant.denom_coeffs[1];
    lp.b = rc.plant.gain_b;
    lp.b0 = rc.b0;
    lp.omega_o = rc.omega_o;
    lp.gamma = rc.gamma;
    return lp;
}

struct PdDesign {
    AuxController pd;
    CrossoverMargin target{};
    bool designed = false;
};

PdDesign resolve_pd(const RunConfig& rc) {
    PdDesign d;
    const LoopParams lp = loop_params(rc);
    if (rc.k_ip) {
        d.pd.kind = AuxController::Kind::PD;
        d.pd.k_p = *rc.k_ip;
        d.pd.k_d = {*rc.k_id};
        return d;
    }
    d.target = rc.target_wc ? CrossoverMargin{*rc.target_wc, *rc.target_pm}
                            : crossover_and_margin(open_loop_ifo(lp, rc.k_fp));
    d.pd = match_crossover_design(open_loop_io(lp, 1.0, 0.0), d.target.omega_c, d.target.phase_margin_deg);
    d.designed = true;
    return d;
}

AdrcLoop make_loop(const RunConfig& rc, ObserverKind kind, const AuxController& pd) {
    AdrcLoop l;
    l.plant = rc.plant;
    l.b0 = rc.b0;
    l.observer = rc.observer(kind);
    if (kind == ObserverKind::IO) {
        l.aux = pd;
    } else {
        l.aux.kind = AuxController::Kind::P;
        l.aux.k_p = rc.k_fp;
    }
    return l;
}

std::string kind_tag(ObserverKind k) {
    switch (k) {
    case ObserverKind::IFO:
        return "ifo";
    case ObserverKind::FO:
        return "fo";
    case ObserverKind::IO:
        return "io";
    }
    return "?";
}

std::string trace_csv(const SimulationTrace& tr) {
    std::ostringstream os;
    write_trace_csv(tr, os);
    return os.str();
}

std::string mse_csv(const MseCurve& c) {
    std::string s = "omega_rad_s,e_ifo,e_fo\n";
    for (size_t i = 0; i < c.omegas.size(); ++i)
        s += fmt::format("{},{},{}\n", c.omegas[i], c.e_ifo[i], c.e_fo[i]);
    return s;
}

size_t ordering_violations(const MseCurve& c) {
    size_t v = 0;
    for (size_t i = 0; i < c.omegas.size(); ++i)
        v += c.e_ifo[i] > c.e_fo[i] + 1e-12;
    return v;
}

std::string margin_line(const std::string& name, const FoTransferFunction& tf) {
    try {
        const auto cm = crossover_and_margin(tf);
        return fmt::format("{}.omega_c={}\n{}.phase_margin_deg={}\n", name, cm.omega_c, name, cm.phase_margin_deg);
    } catch (const BracketError& e) {
        return fmt::format("{}.crossover=none ({} crossings)\n", name, e.crossings.size());
    }
}

// Runs the IFO/FO/IO gain sweeps and writes one CSV per run plus a metrics file.
void sweep_and_write(const RunConfig& rc, const PlantModel& plant, const std::vector<double>& gains,
                     const std::string& prefix) {
    RunConfig local = rc;
    local.plant = plant;
    const PdDesign pd = resolve_pd(local);
    std::string metrics;
    const ReferenceSignal ref{rc.reference, 0.0};
    for (ObserverKind kind : {ObserverKind::IFO, ObserverKind::FO, ObserverKind::IO}) {
        const AdrcLoop loop = make_loop(local, kind, pd.pd);
        const auto runs = gain_sweep(loop, gains, ref, {}, rc.sim);
        std::vector<double> peaks;
        for (const auto& [k, tr] : runs) {
            const std::string name = fmt::format("{}_{}_K{}.csv", prefix, kind_tag(kind), k);
            write_atomic(rc.out_dir / name, trace_csv(tr));
            emit_plot(rc, name, {"y", "r"}, false);
            const StepMetrics m = step_metrics(tr, rc.reference, rc.settle_band_pct);
            std::ostringstream os;
            write_metrics_text(m, os);
            std::istringstream lines(os.str());
            for (std::string line; std::getline(lines, line);)
                metrics += fmt::format("{}.K{}.{}\n", kind_tag(kind), k, line);
            if (tr.diverged)
                metrics += fmt::format("{}.K{}.diverged={}\n", kind_tag(kind), k, tr.note);
            else
                peaks.push_back(m.peak_value);
        }
        if (peaks.size() == gains.size() && !peaks.empty())
            metrics += fmt::format("{}.overshoot_fluctuation_pct={}\n", kind_tag(kind),
                                   overshoot_fluctuation(peaks, rc.reference));
    }
    if (pd.designed)
        metrics += fmt::format("io.k_ip={}\nio.k_id={}\n", pd.pd.k_p, pd.pd.k_d[0]);
    write_atomic(rc.out_dir / (prefix + "_metrics.txt"), metrics);
}

} // namespace

int cmd_mse(const RunConfig& rc) {
    const auto grid = log_grid(rc.mse_lo, rc.mse_hi, rc.mse_points);
    const double a_o = rc.plant.denom_coeffs.size() >= 2 ? rc.plant.denom_coeffs[1] : 0.0;
    std::string summary;
    auto run = [&](const std::string& name, double a, double w, double g) {
        const MseCurve c = mse_curve(a, w, g, grid);
        write_atomic(rc.out_dir / name, mse_csv(c));
        emit_plot(rc, name, {"e_ifo", "e_fo"}, true);
        summary += fmt::format("{}: a_o={} omega_o={} gamma={} points={} ifo_above_fo={}\n", name, a, w, g,
                               c.omegas.size(), ordering_violations(c));
    };
    run("mse.csv", a_o, rc.omega_o, rc.gamma);
    for (double a : rc.sweep_a_o)
        run(fmt::format("mse_a_o_{}.csv", a), a, rc.omega_o, rc.gamma);
    for (double w : rc.sweep_omega_o)
        run(fmt::format("mse_omega_o_{}.csv", w), a_o, w, rc.gamma);
    for (double g : rc.sweep_gamma)
        run(fmt::format("mse_gamma_{}.csv", g), a_o, rc.omega_o, g);
    write_atomic(rc.out_dir / "mse_summary.txt", summary);
    return 0;
}

int cmd_bode(const RunConfig& rc) {
    const LoopParams lp = loop_params(rc);
    const PdDesign pd = resolve_pd(rc);
    const auto grid = log_grid(rc.bode_lo, rc.bode_hi, rc.bode_points);
    const auto ifo = open_loop_ifo(lp, rc.k_fp);
    const auto fo = open_loop_fo(lp, rc.k_fp);
    const auto io = open_loop_io(lp, pd.pd.k_p, pd.pd.k_d[0]);
    const BodeData bi = bode_curve(ifo, grid), bf = bode_curve(fo, grid), bo = bode_curve(io, grid);
    std::string csv = "omega_rad_s,ifo_mag_db,ifo_phase_deg,fo_mag_db,fo_phase_deg,io_mag_db,io_phase_deg\n";
    for (size_t i = 0; i < grid.size(); ++i)
        csv += fmt::format("{},{},{},{},{},{},{}\n", grid[i], bi.mag_db[i], bi.phase_deg[i], bf.mag_db[i],
                           bf.phase_deg[i], bo.mag_db[i], bo.phase_deg[i]);
    write_atomic(rc.out_dir / "bode.csv", csv);
    emit_plot(rc, "bode.csv", {"ifo_mag_db", "fo_mag_db", "io_mag_db"}, true);
    write_atomic(rc.out_dir / "margins.txt",
                 margin_line("ifo", ifo) + margin_line("fo", fo) + margin_line("io", io) +
                     fmt::format("io.k_ip={}\nio.k_id={}\n", pd.pd.k_p, pd.pd.k_d[0]));
    return 0;
}

int cmd_step(const RunConfig& rc) {
    sweep_and_write(rc, rc.plant, rc.gains, "step");
    return 0;
}

int cmd_pmsm(const RunConfig& rc) {
    if (!rc.pmsm)
        throw ConfigError("pmsm command needs a [pmsm] section");
    sweep_and_write(rc, pmsm_speed_plant(*rc.pmsm), {0.6, 1.0, 1.4}, "pmsm");
    return 0;
}

int cmd_design(const RunConfig& rc) {
    RunConfig local = rc;
    local.k_ip.reset();
    local.k_id.reset();
    const PdDesign d = resolve_pd(local);
    const auto achieved = crossover_and_margin(open_loop_io(loop_params(rc), d.pd.k_p, d.pd.k_d[0]));
    const std::string text =
        fmt::format("target_omega_c={}\ntarget_phase_margin_deg={}\nk_ip={}\nk_id={}\nachieved_omega_c={}\n"
                    "achieved_phase_margin_deg={}\n",
                    d.target.omega_c, d.target.phase_margin_deg, d.pd.k_p, d.pd.k_d[0], achieved.omega_c,
                    achieved.phase_margin_deg);
    write_atomic(rc.out_dir / "design.txt", text);
    std::cout << text;
    return 0;
}

int cmd_stability(const RunConfig& rc) {
    const ObserverConfig oc = rc.observer(ObserverKind::IFO);
    const auto betas = oc.gains_L;
    std::string text = "[eso]\n" + kharitonov_eso_check(betas, oc.n, oc.gamma, oc.nu()).to_text();
    AuxController p;
    p.k_p = rc.k_fp;
    try {
        const auto form = closed_loop_poly_w(rc.plant, p, betas, oc.n, oc.gamma, oc.nu());
        text += fmt::format("\n[closed_loop]\nw_base=1/{}\ndegree={}\n", form.base_denominator(),
                            form.w_polynomial.size() - 1);
        text += commensurate_root_test(form).to_text();
    } catch (const OrderApproximationError& e) {
        text += fmt::format("\n[closed_loop]\nskipped={}\n", e.what());
    }
    const auto& a = rc.plant.denom_coeffs;
    if (oc.m == 2 && oc.n == 2 && a[0] >= 0.0 && a[1] >= 0.0)
        text += "\n[proposition1]\n" + proposition1_certify(a[0], a[1], rc.k_fp, rc.omega_o).to_text();
    write_atomic(rc.out_dir / "stability.txt", text);
    std::cout << text;
    return 0;
}

} // namespace fadrc::cli
