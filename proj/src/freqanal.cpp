#include "fadrc/freqanal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "fadrc/errors.hpp"
#include "fadrc/fracops.hpp"

namespace fadrc {

namespace {
constexpr double kExpTol = 1e-12;
using Poly = std::vector<FoTerm>;
} // namespace

Poly fo_poly_normalize(Poly p) {
    std::sort(p.begin(), p.end(), [](const FoTerm& a, const FoTerm& b) { return a.exponent > b.exponent; });
    Poly out;
    for (const auto& t : p) {
        if (!out.empty() && std::abs(out.back().exponent - t.exponent) <= kExpTol)
            out.back().coef += t.coef;
        else
            out.push_back(t);
    }
    std::erase_if(out, [](const FoTerm& t) { return t.coef == 0.0; });
    return out;
}

Poly fo_poly_mul(const Poly& a, const Poly& b) {
    Poly out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a)
        for (const auto& y : b)
            out.push_back({x.coef * y.coef, x.exponent + y.exponent});
    return fo_poly_normalize(std::move(out));
}

Poly fo_poly_add(const Poly& a, const Poly& b) {
    Poly out = a;
    out.insert(out.end(), b.begin(), b.end());
    return fo_poly_normalize(std::move(out));
}

cplx fo_poly_eval(const Poly& p, double omega) {
    cplx acc = 0;
    for (const auto& t : p)
        acc += t.coef * s_power_response(t.exponent, omega);
    return acc;
}

cplx FoTransferFunction::eval(double omega) const {
    if (den.empty())
        throw InvalidArgument("FoTransferFunction: empty denominator");
    const cplx d = fo_poly_eval(den, omega);
    if (d == cplx(0.0, 0.0))
        throw PoleOnGrid(fmt::format("denominator vanishes at omega={}", omega), omega);
    return fo_poly_eval(num, omega) / d;
}

cplx eval_fotf(const FoTransferFunction& tf, double omega) { return tf.eval(omega); }

FoTransferFunction FoTransferFunction::operator*(const FoTransferFunction& o) const {
    return {fo_poly_mul(num, o.num), fo_poly_mul(den, o.den)};
}

FoTransferFunction FoTransferFunction::scaled(double k) const {
    FoTransferFunction r = *this;
    for (auto& t : r.num)
        t.coef *= k;
    return r;
}

FoTransferFunction FoTransferFunction::normalized() const {
    return {fo_poly_normalize(num), fo_poly_normalize(den)};
}

std::string FoTransferFunction::to_string() const {
    auto side = [](const Poly& p) {
        std::string s;
        for (const auto& t : p)
            s += fmt::format("{}{:.6g}*s^{:.6g}", s.empty() ? "" : " + ", t.coef, t.exponent);
        return s.empty() ? std::string("0") : s;
    };
    return "(" + side(num) + ") / (" + side(den) + ")";
}

// ---------------------------------------------------------------------------
// Closed forms, written term by term.

namespace {

Poly P(std::initializer_list<FoTerm> t) { return fo_poly_normalize(Poly(t)); }

// s^(2 gamma) + 3 w s^gamma + 3 w^2
Poly quad_q(double w, double g) { return P({{1, 2 * g}, {3 * w, g}, {3 * w * w, 0}}); }

// (s^gamma + w)^3
Poly cube_fo(double w, double g) { return P({{1, 3 * g}, {3 * w, 2 * g}, {3 * w * w, g}, {w * w * w, 0}}); }

// s^(2+gamma) + 3 w s^2 + 3 w^2 s^gamma + w^3
Poly ifo_char(double w, double g) { return P({{1, 2 + g}, {3 * w, 2}, {3 * w * w, g}, {w * w * w, 0}}); }

Poly scale(const Poly& p, double k) {
    Poly r = p;
    for (auto& t : r)
        t.coef *= k;
    return r;
}

} // namespace

FoTransferFunction build_p_ifo(double a_o, double b, double b0, double w, double g) {
    Poly n1 = scale(ifo_char(w, g), b);
    Poly d1 = fo_poly_mul(P({{b * w * w, g}}), P({{-3, 2}, {3, 2 * g}, {w, g}}));
    d1 = fo_poly_add(d1, fo_poly_mul(P({{a_o * b0, 1 + g}}), quad_q(w, g)));
    d1 = fo_poly_add(d1, fo_poly_mul(P({{b0, 2 + g}}), quad_q(w, g)));
    return {n1, d1};
}

FoTransferFunction build_p_fo(double a_o, double b, double b0, double w, double g) {
    Poly n2 = scale(cube_fo(w, g), b);
    Poly d2 = fo_poly_mul(P({{b * a_o, 1}, {b, 2}}), cube_fo(w, g));
    d2 = fo_poly_add(d2, P({{b * w * w * w, 2 * g}, {-b0 * w * w * w, 2}, {-a_o * b0 * w * w * w, 1}}));
    return {n2, d2};
}

FoTransferFunction build_p_io(double a_o, double w) {
    Poly cube = P({{1, 3}, {3 * w, 2}, {3 * w * w, 1}, {w * w * w, 0}});
    Poly d = fo_poly_mul(P({{a_o, 1}, {1, 2}}), cube);
    d = fo_poly_add(d, P({{-a_o * w * w * w, 1}}));
    return {cube, d};
}

FoTransferFunction z1_over_y_ifo(double a_o, double w, double g) {
    Poly den = ifo_char(w, g);
    Poly num = fo_poly_add(den, P({{a_o, 1 + g}}));
    return {num, den};
}

FoTransferFunction z1_over_y_io(double a_o, double w) {
    Poly den = P({{1, 3}, {3 * w, 2}, {3 * w * w, 1}, {w * w * w, 0}});
    Poly num = P({{1, 3}, {3 * w + a_o, 2}, {3 * w * w, 1}, {w * w * w, 0}});
    return {num, den};
}

// General plant. Obtained by solving the three observer channels, the control
// law and the plant for Y/U0 and Z1/Y with p = s^gamma and, for IFO, the
// channel-n operator s^chi = s^(2 - gamma).
FoTransferFunction compensated_plant(LoopKind kind, const LoopParams& lp) {
    const double a0 = lp.a0, a1 = lp.a1, b = lp.b, b0 = lp.b0, w = lp.omega_o, g = lp.gamma;
    const double w2 = w * w, w3 = w2 * w;
    const double q = kind == LoopKind::IO ? 1.0 : g; // exponent of p
    const double c = 2.0 - g;                        // exponent of s^chi (IFO only)
    switch (kind) {
    case LoopKind::IFO: {
        Poly num = P({{b, c + 2 * q}, {3 * b * w, c + q}, {3 * b * w2, q}, {b * w3, 0}});
        Poly den = P({{a0 * b0, 3 * q},
                      {3 * a0 * b0 * w, 2 * q},
                      {3 * a0 * b0 * w2, q},
                      {a1 * b0, 3 * q + 1},
                      {3 * a1 * b0 * w, 2 * q + 1},
                      {3 * a1 * b0 * w2, q + 1},
                      {-3 * b * w2, c + 2 * q},
                      {3 * b * w2, 3 * q},
                      {b * w3, 2 * q},
                      {b0, 3 * q + 2},
                      {3 * b0 * w, 2 * q + 2},
                      {3 * b0 * w2, q + 2}});
        return {num, den};
    }
    case LoopKind::FO:
    case LoopKind::IO: {
        Poly num = P({{b, 3 * q}, {3 * b * w, 2 * q}, {3 * b * w2, q}, {b * w3, 0}});
        Poly den = P({{a0 * b0, 3 * q},
                      {3 * a0 * b0 * w, 2 * q},
                      {3 * a0 * b0 * w2, q},
                      {a1 * b0, 3 * q + 1},
                      {3 * a1 * b0 * w, 2 * q + 1},
                      {3 * a1 * b0 * w2, q + 1},
                      {b * w3, 2 * q},
                      {b0, 3 * q + 2},
                      {3 * b0 * w, 2 * q + 2},
                      {3 * b0 * w2, q + 2}});
        return {num, den};
    }
    }
    throw InvalidArgument("compensated_plant: unknown kind");
}

FoTransferFunction z1_over_y(LoopKind kind, const LoopParams& lp) {
    const double a0 = lp.a0, a1 = lp.a1, b = lp.b, b0 = lp.b0, w = lp.omega_o, g = lp.gamma;
    const double w2 = w * w, w3 = w2 * w;
    const double q = kind == LoopKind::IO ? 1.0 : g;
    const double c = 2.0 - g;
    Poly den, num;
    if (kind == LoopKind::IFO) {
        den = P({{b, c + 2 * q}, {3 * b * w, c + q}, {3 * b * w2, q}, {b * w3, 0}});
        num = P({{a0 * b0, q}, {a1 * b0, q + 1}, {3 * b * w, c + q}, {3 * b * w2, q}, {b * w3, 0}, {b0, q + 2}});
    } else {
        den = P({{b, 3 * q}, {3 * b * w, 2 * q}, {3 * b * w2, q}, {b * w3, 0}});
        num = P({{a0 * b0, q}, {a1 * b0, q + 1}, {3 * b * w, 2 * q}, {3 * b * w2, q}, {b * w3, 0}, {b0, q + 2}});
    }
    return {num, den};
}

cplx delta_from_p(const FoTransferFunction& p, double gamma, double omega) {
    return 1.0 - s_power_response(2.0 * gamma, omega) * p.eval(omega);
}

std::function<cplx(double)> build_delta_ifo(double a_o, double w, double g) {
    return [=](double omega) {
        if (!(omega > 0.0))
            throw InvalidArgument("build_delta_ifo: omega must be > 0");
        const cplx jw(0.0, omega);
        const cplx p = s_power_response(g, omega);
        const cplx n3 = a_o * jw * (p * p + 3.0 * w * p + 3.0 * w * w);
        const cplx d3 = n3 + p * (s_power_response(2.0 + g, omega) + 3.0 * w * jw * jw + 3.0 * w * w * p + w * w * w);
        if (d3 == cplx(0.0, 0.0))
            throw PoleOnGrid("Delta_ifo denominator vanishes", omega);
        return n3 / d3;
    };
}

std::function<cplx(double)> build_delta_fo(double a_o, double w, double g) {
    return [=](double omega) {
        if (!(omega > 0.0))
            throw InvalidArgument("build_delta_fo: omega must be > 0");
        const cplx jw(0.0, omega);
        const cplx p = s_power_response(g, omega);
        const cplx q = p * p + 3.0 * w * p + 3.0 * w * w;
        const cplx w3p = w * w * w * p;
        const cplx n4 = w3p - p * std::pow(p + w, 3) + (a_o * jw + jw * jw) * q;
        const cplx d4 = w3p + (a_o * jw + jw * jw) * q;
        if (d4 == cplx(0.0, 0.0))
            throw PoleOnGrid("Delta_fo denominator vanishes", omega);
        return n4 / d4;
    };
}

MseCurve mse_curve(double a_o, double omega_o, double gamma, const std::vector<double>& grid) {
    const auto di = build_delta_ifo(a_o, omega_o, gamma);
    const auto df = build_delta_fo(a_o, omega_o, gamma);
    MseCurve c;
    c.omegas = grid;
    for (double w : grid) {
        c.e_ifo.push_back(std::norm(di(w)));
        c.e_fo.push_back(std::norm(df(w)));
    }
    return c;
}

// ---------------------------------------------------------------------------

namespace {
bool published_form_applies(const LoopParams& p) { return p.a0 == 0.0 && p.b == p.b0; }
} // namespace

FoTransferFunction open_loop_ifo(const LoopParams& p, double k_fp) {
    if (published_form_applies(p))
        return (build_p_ifo(p.a1, p.b, p.b0, p.omega_o, p.gamma) * z1_over_y_ifo(p.a1, p.omega_o, p.gamma))
            .scaled(k_fp);
    return (compensated_plant(LoopKind::IFO, p) * z1_over_y(LoopKind::IFO, p)).scaled(k_fp);
}

FoTransferFunction open_loop_fo(const LoopParams& p, double k_fp) {
    return (compensated_plant(LoopKind::FO, p) * z1_over_y(LoopKind::FO, p)).scaled(k_fp);
}

FoTransferFunction open_loop_io(const LoopParams& p, double k_ip, double k_id) {
    FoTransferFunction pd{{{k_ip * k_id, 1}, {k_ip, 0}}, {{1, 0}}};
    if (published_form_applies(p))
        return pd * build_p_io(p.a1, p.omega_o) * z1_over_y_io(p.a1, p.omega_o);
    return pd * compensated_plant(LoopKind::IO, p) * z1_over_y(LoopKind::IO, p);
}

std::vector<double> log_grid(double lo, double hi, int points) {
    if (!(lo > 0.0 && hi > lo) || points < 2)
        throw InvalidArgument("log_grid: need 0 < lo < hi and at least two points");
    std::vector<double> g(static_cast<size_t>(points));
    const double l0 = std::log10(lo), l1 = std::log10(hi);
    for (int i = 0; i < points; ++i)
        g[static_cast<size_t>(i)] = std::pow(10.0, l0 + (l1 - l0) * i / (points - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

namespace {

double unwrap_step(double prev, double next) {
    double d = next - prev;
    while (d > std::numbers::pi)
        d -= 2 * std::numbers::pi;
    while (d < -std::numbers::pi)
        d += 2 * std::numbers::pi;
    return prev + d;
}

// Principal phase at omega shifted by whole turns toward the low-frequency
// asymptote set by the lowest-order terms, so unwrapping starts on the right sheet.
double anchored_phase(const FoTransferFunction& tf, double omega) {
    const double raw = std::arg(tf.eval(omega));
    auto lowest = [](const Poly& p) {
        const FoTerm* m = nullptr;
        for (const auto& t : p)
            if (t.coef != 0.0 && (!m || t.exponent < m->exponent))
                m = &t;
        return m;
    };
    const FoTerm* n = lowest(tf.num);
    const FoTerm* d = lowest(tf.den);
    if (!n || !d)
        return raw;
    double asym = (n->exponent - d->exponent) * std::numbers::pi / 2;
    if ((n->coef < 0) != (d->coef < 0))
        asym -= std::numbers::pi;
    const double turns = std::round((asym - raw) / (2 * std::numbers::pi));
    return raw + turns * 2 * std::numbers::pi;
}

} // namespace

BodeData bode_curve(const FoTransferFunction& tf, const std::vector<double>& grid) {
    BodeData out;
    double ph = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || (i && grid[i] <= grid[i - 1]))
            throw InvalidArgument("bode_curve: grid must be positive and ascending");
        const cplx v = tf.eval(grid[i]);
        ph = i == 0 ? anchored_phase(tf, grid[0]) : unwrap_step(ph, std::arg(v));
        out.omegas.push_back(grid[i]);
        out.mag_db.push_back(20.0 * std::log10(std::abs(v)));
        out.phase_deg.push_back(ph * 180.0 / std::numbers::pi);
    }
    return out;
}

CrossoverMargin crossover_and_margin(const FoTransferFunction& tf, double lo, double hi) {
    if (!(lo > 0.0 && hi > lo))
        throw InvalidArgument("crossover_and_margin: need 0 < lo < hi");
    auto logmag = [&](double w) { return std::log(std::abs(tf.eval(w))); };
    const int per_decade = 400;
    const int n = std::max(16, static_cast<int>(std::ceil(per_decade * std::log10(hi / lo))));
    const auto grid = log_grid(lo, hi, n + 1);

    std::vector<double> crossings;
    std::vector<size_t> at;
    double prev = logmag(grid[0]);
    for (size_t i = 1; i < grid.size(); ++i) {
        const double cur = logmag(grid[i]);
        if ((prev > 0) != (cur > 0) || cur == 0.0) {
            crossings.push_back(std::sqrt(grid[i - 1] * grid[i]));
            at.push_back(i);
        }
        prev = cur;
    }
    if (crossings.size() != 1)
        throw BracketError(fmt::format("expected exactly one gain crossover in [{}, {}], found {}", lo, hi,
                                       crossings.size()),
                           crossings);

    double a = grid[at[0] - 1], b = grid[at[0]];
    const double fa = logmag(a);
    while (b / a - 1.0 > 1e-12) {
        const double mid = std::sqrt(a * b);
        const double fm = logmag(mid);
        if ((fm > 0) == (fa > 0))
            a = mid;
        else
            b = mid;
    }
    const double wc = std::sqrt(a * b);

    // unwrap phase from the bracket start up to the crossover
    double ph = anchored_phase(tf, grid[0]);
    for (size_t i = 1; i < at[0]; ++i)
        ph = unwrap_step(ph, std::arg(tf.eval(grid[i])));
    ph = unwrap_step(ph, std::arg(tf.eval(wc)));
    return {wc, 180.0 + ph * 180.0 / std::numbers::pi};
}

} // namespace fadrc
