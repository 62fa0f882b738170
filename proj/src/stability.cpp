#include "fadrc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "fadrc/errors.hpp"

namespace fadrc {

namespace {

constexpr double kMarginalBand = 1e-9;
constexpr int kMaxDegree = 2000;

void check_orders(int n, double gamma, double nu) {
    if (n < 1)
        throw InvalidArgument("n must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw InvalidArgument(fmt::format("gamma must lie in (0,1), got {}", gamma));
    if (!(nu > 0.0 && nu < gamma))
        throw InvalidArgument(fmt::format("need 0 < nu < gamma, got nu={} gamma={}", nu, gamma));
}

// Sparse polynomial in integer powers of w.
using WPoly = std::map<long, double>;

WPoly wmul(const WPoly& a, const WPoly& b) {
    WPoly out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b)
            out[ea + eb] += ca * cb;
    return out;
}

WPoly wadd(WPoly a, const WPoly& b) {
    for (const auto& [e, c] : b)
        a[e] += c;
    return a;
}

std::vector<double> wdesc(const WPoly& p) {
    long deg = 0;
    for (const auto& [e, c] : p)
        if (c != 0.0)
            deg = std::max(deg, e);
    std::vector<double> out(static_cast<size_t>(deg + 1), 0.0);
    for (const auto& [e, c] : p)
        if (e <= deg)
            out[static_cast<size_t>(deg - e)] += c;
    return out;
}

// Backward-error style residual: |P(r)| / sum |c_i| |r|^(d-i).
double scaled_residual(const std::vector<double>& c, cplx r) {
    const double ar = std::abs(r);
    double scale = 0.0;
    for (double ci : c)
        scale = scale * ar + std::abs(ci);
    return scale > 0.0 ? std::abs(polyval_desc(c, r)) / scale : 0.0;
}

void merge_sector(StabilityReport& rep, const std::vector<double>& c, double threshold, bool& first) {
    size_t lead = 0;
    while (lead < c.size() && c[lead] == 0.0)
        ++lead;
    if (lead == c.size()) {
        rep.note += "zero polynomial skipped; ";
        return;
    }
    if (c.size() - lead - 1 > static_cast<size_t>(kMaxDegree))
        throw InvalidArgument(fmt::format("polynomial degree {} exceeds the root-test cap of {}", c.size() - lead - 1,
                                          kMaxDegree));
    const auto roots = roots_desc(c);
    for (const auto& r : roots) {
        const double margin = std::abs(std::arg(r)) - threshold;
        const double res = scaled_residual(c, r);
        rep.max_residual = std::max(rep.max_residual, res);
        if (first || margin < rep.min_arg_margin) {
            rep.min_arg_margin = margin;
            rep.worst_root = r;
            first = false;
        }
        rep.roots.push_back(r);
    }
    if (rep.max_residual > 1e-4)
        throw NumericError("root finder did not converge", rep.max_residual);
}

void finish_verdict(StabilityReport& rep) {
    rep.low_confidence = rep.max_residual > 1e-8;
    rep.marginal = std::abs(rep.min_arg_margin) <= kMarginalBand;
    rep.stable = rep.min_arg_margin > kMarginalBand;
}

} // namespace

const char* to_string(StabilityReport::Method m) {
    switch (m) {
    case StabilityReport::Method::kharitonov:
        return "kharitonov";
    case StabilityReport::Method::direct_root:
        return "direct-root";
    case StabilityReport::Method::routh:
        return "routh";
    }
    return "?";
}

std::string StabilityReport::to_text() const {
    std::string s;
    s += fmt::format("method = {}\n", fadrc::to_string(method));
    s += fmt::format("verdict = {}\n", stable ? "stable" : (marginal ? "marginal" : "unstable"));
    s += fmt::format("roots = {}\n", roots.size());
    if (!roots.empty()) {
        s += fmt::format("worst_root = {:.10g} {:+.10g}j\n", worst_root.real(), worst_root.imag());
        s += fmt::format("margin_rad = {:.10g}\n", min_arg_margin);
        s += fmt::format("max_residual = {:.3g}\n", max_residual);
    }
    if (!routh.empty()) {
        s += "routh_first_column =";
        for (const auto& row : routh)
            s += fmt::format(" {:.10g}", row.empty() ? 0.0 : row[0]);
        s += "\n";
    }
    if (low_confidence)
        s += "low_confidence = true\n";
    if (!note.empty())
        s += fmt::format("note = {}\n", note);
    return s;
}

std::vector<FoTerm> eso_char_poly(const std::vector<double>& betas, int n, double gamma, double nu) {
    check_orders(n, gamma, nu);
    if (static_cast<int>(betas.size()) != n + 1)
        throw InvalidArgument(fmt::format("eso_char_poly: expected {} gains, got {}", n + 1, betas.size()));
    std::vector<FoTerm> p{{1.0, nu + gamma + n * gamma}};
    for (int i = 1; i <= n - 1; ++i)
        p.push_back({betas[static_cast<size_t>(i - 1)], nu + gamma + (n - i) * gamma});
    p.push_back({betas[static_cast<size_t>(n - 1)], gamma});
    p.push_back({betas[static_cast<size_t>(n)], 0.0});
    return fo_poly_normalize(p);
}

StabilityReport arg_sector_test(const std::vector<double>& c, double threshold, StabilityReport::Method method) {
    StabilityReport rep;
    rep.method = method;
    bool first = true;
    merge_sector(rep, c, threshold, first);
    if (first)
        throw InvalidArgument("arg_sector_test: polynomial has no roots");
    finish_verdict(rep);
    return rep;
}

StabilityReport kharitonov_eso_check(const std::vector<double>& betas, int n, double gamma, double nu) {
    // The boundary test itself only needs positive orders; nu >= gamma still gives a valid sector.
    if (n < 1 || !(gamma > 0.0 && gamma < 1.0) || !(nu > 0.0))
        throw InvalidArgument(fmt::format("kharitonov_eso_check: bad orders n={} gamma={} nu={}", n, gamma, nu));
    if (static_cast<int>(betas.size()) != n + 1)
        throw InvalidArgument(fmt::format("kharitonov_eso_check: expected {} gains, got {}", n + 1, betas.size()));
    double s = 1.0;
    for (int i = 0; i < n - 1; ++i)
        s += betas[static_cast<size_t>(i)];
    const std::vector<double> l1{s, betas[static_cast<size_t>(n - 1)] + betas[static_cast<size_t>(n)]};
    std::vector<double> l2{1.0};
    l2.insert(l2.end(), betas.begin(), betas.end());

    StabilityReport rep;
    rep.method = StabilityReport::Method::kharitonov;
    const double thr = std::numbers::pi / (2.0 * (nu + gamma));
    bool first = true;
    merge_sector(rep, l1, thr, first);
    merge_sector(rep, l2, thr, first);
    finish_verdict(rep);
    return rep;
}

std::pair<int, int> rationalize_order(double x, int max_den) {
    if (!std::isfinite(x) || x <= 0.0)
        throw OrderApproximationError(fmt::format("order {} is not a positive finite number", x));
    for (int q = 1; q <= max_den; ++q) {
        const double p = std::round(x * q);
        if (std::abs(x - p / q) <= 1e-12 * std::max(1.0, x)) {
            const int pi = static_cast<int>(p);
            const int g = std::gcd(pi, q);
            return {pi / g, q / g};
        }
    }
    throw OrderApproximationError(
        fmt::format("order {} has no rational form with denominator <= {}; rationalize it first", x, max_den));
}

CommensurateForm closed_loop_poly_w(const PlantModel& plant, const AuxController& aux, const std::vector<double>& betas,
                                    int n, double gamma, double nu, int max_den) {
    check_orders(n, gamma, nu);
    plant.validate();
    aux.validate();
    if (static_cast<int>(betas.size()) != n + 1)
        throw InvalidArgument(fmt::format("closed_loop_poly_w: expected {} gains, got {}", n + 1, betas.size()));

    CommensurateForm f;
    std::tie(f.p1, f.q1) = rationalize_order(nu, max_den);
    std::tie(f.p2, f.q2) = rationalize_order(gamma, max_den);
    const long Q = static_cast<long>(f.q1) * f.q2;
    const long g = static_cast<long>(f.p2) * f.q1; // s^gamma
    const long v = static_cast<long>(f.p1) * f.q2; // s^nu
    const int m = plant.order_m();

    WPoly A;
    for (int i = 0; i < m; ++i)
        A[g + i * Q] += plant.denom_coeffs[static_cast<size_t>(i)];

    WPoly K{{0, aux.k_p}};
    if (aux.kind == AuxController::Kind::PD)
        K[Q] += aux.k_p * aux.k_d[0];
    else if (aux.kind == AuxController::Kind::full_state)
        for (size_t i = 0; i < aux.k_d.size(); ++i)
            K[static_cast<long>(i + 1) * Q] += aux.k_d[i];

    WPoly E1{{n * g, 1.0}};
    for (int i = 1; i <= n; ++i)
        E1[(n - i) * g] += betas[static_cast<size_t>(i - 1)];

    WPoly inner{{n * g, 1.0}};
    for (int i = 1; i <= n - 1; ++i)
        inner[(n - i) * g] += betas[static_cast<size_t>(i - 1)];
    WPoly E2 = wmul(WPoly{{v + g, 1.0}}, inner);
    E2[g] += betas[static_cast<size_t>(n - 1)];
    E2[0] += betas[static_cast<size_t>(n)];

    const WPoly P = wadd(wmul(A, wadd(K, E1)), wmul(wadd(WPoly{{n * g, 1.0}}, K), E2));
    f.w_polynomial = wdesc(P);
    if (f.w_polynomial.size() - 1 > static_cast<size_t>(kMaxDegree))
        throw OrderApproximationError(fmt::format("commensurate degree {} exceeds {}; use coarser rational orders",
                                                  f.w_polynomial.size() - 1, kMaxDegree));
    return f;
}

StabilityReport commensurate_root_test(const CommensurateForm& form) {
    if (form.w_polynomial.size() < 2)
        throw InvalidArgument("commensurate_root_test: degree must be >= 1");
    if (form.w_polynomial.size() - 1 > static_cast<size_t>(kMaxDegree))
        throw InvalidArgument(fmt::format("commensurate_root_test: degree {} exceeds {}", form.w_polynomial.size() - 1,
                                          kMaxDegree));
    const double thr = std::numbers::pi / (2.0 * form.base_denominator());
    return arg_sector_test(form.w_polynomial, thr, StabilityReport::Method::direct_root);
}

RouthResult routh_table(const std::vector<double>& c_in) {
    size_t lead = 0;
    while (lead < c_in.size() && c_in[lead] == 0.0)
        ++lead;
    if (lead == c_in.size())
        throw InvalidArgument("routh_table: zero polynomial");
    const std::vector<double> c(c_in.begin() + static_cast<long>(lead), c_in.end());
    if (c[0] < 0.0)
        throw InvalidArgument("routh_table: leading coefficient must be positive");
    const size_t deg = c.size() - 1;
    const size_t width = deg / 2 + 1;
    // An entry counts as zero when it is lost in the rounding of the products
    // that formed it, so the test is relative to a per-entry magnitude scale.
    constexpr double rel_tol = 1e-10;

    RouthResult out;
    bool eps_used = false;
    auto& T = out.table;
    T.assign(deg + 1, std::vector<double>(width, 0.0));
    std::vector<std::vector<double>> S(deg + 1, std::vector<double>(width, 0.0));
    for (size_t j = 0; j < c.size(); ++j) {
        T[j % 2][j / 2] = c[j];
        S[j % 2][j / 2] = std::abs(c[j]);
    }
    auto row_max = [&](size_t i) {
        double m = 0.0;
        for (double x : T[i])
            m = std::max(m, std::abs(x));
        return m;
    };

    for (size_t i = 1; i <= deg; ++i) {
        if (i >= 2) {
            for (size_t j = 0; j + 1 < width; ++j) {
                const double p = T[i - 1][0], q = T[i - 2][j + 1], r = T[i - 2][0], u = T[i - 1][j + 1];
                T[i][j] = (p * q - r * u) / p;
                S[i][j] = (std::abs(p) * S[i - 2][j + 1] + S[i - 2][0] * std::abs(u) +
                           std::abs(r) * S[i - 1][j + 1]) / std::abs(p);
            }
        }
        for (size_t j = 0; j < width; ++j)
            if (std::abs(T[i][j]) <= rel_tol * S[i][j])
                T[i][j] = 0.0;
        const bool all_zero = std::all_of(T[i].begin(), T[i].end(), [](double x) { return x == 0.0; });
        if (all_zero) {
            // Auxiliary polynomial from the row above, of order deg - (i - 1).
            const long k = static_cast<long>(deg - (i - 1));
            for (size_t j = 0; j < width; ++j) {
                T[i][j] = T[i - 1][j] * static_cast<double>(k - 2 * static_cast<long>(j));
                S[i][j] = std::abs(T[i][j]);
            }
            out.marginal = true;
        }
        if (T[i][0] == 0.0) {
            const double m = std::max(row_max(i), row_max(i - 1));
            T[i][0] = m > 0.0 ? 1e-12 * m : 1e-300;
            S[i][0] = std::abs(T[i][0]);
            eps_used = true;
        }
    }
    out.stable = !out.marginal && !eps_used;
    for (const auto& row : T)
        if (!(row[0] > 0.0))
            out.stable = false;
    return out;
}

std::vector<double> proposition1_p1(double a0, double a1, double kp, double w) {
    const double k1 = 1.0 + kp;
    const double a0c = k1 + 3 * w;
    return {k1 * (1 + 3 * w), a1 * (a0c + 3 * w * w), a0 * (a0c + 3 * w * w) + k1 * (3 * w * w + w * w * w)};
}

std::vector<double> proposition1_p2(double a0, double a1, double kp, double w) {
    // s (a0 + a1 s)(kp + s^2 + b1 s + b2) + (s^2 + kp)(s^3 + b1 s^2 + b2 s + b3), ascending in s
    const double b1 = 3 * w, b2 = 3 * w * w, b3 = w * w * w;
    std::vector<double> left = poly_mul({0.0, a0, a1}, {kp + b2, b1, 1.0});
    std::vector<double> right = poly_mul({kp, 0.0, 1.0}, {b3, b2, b1, 1.0});
    left.resize(6, 0.0);
    right.resize(6, 0.0);
    std::vector<double> desc(6);
    for (size_t i = 0; i < 6; ++i)
        desc[5 - i] = left[i] + right[i];
    return desc;
}

StabilityReport proposition1_certify(double a0, double a1, double kp, double w) {
    if (!(a0 >= 0.0 && a1 >= 0.0))
        throw InvalidArgument("proposition1_certify: need a0 >= 0 and a1 >= 0");
    if (!(kp > 0.0 && w > 0.0))
        throw InvalidArgument("proposition1_certify: need k_p > 0 and omega_o > 0");
    const auto p1 = proposition1_p1(a0, a1, kp, w);
    const auto p2 = proposition1_p2(a0, a1, kp, w);
    const auto r1 = routh_table(p1);
    const auto r2 = routh_table(p2);

    StabilityReport rep;
    rep.method = StabilityReport::Method::routh;
    bool first = true;
    merge_sector(rep, p1, std::numbers::pi / 2, first);
    merge_sector(rep, p2, std::numbers::pi / 2, first);
    rep.low_confidence = rep.max_residual > 1e-8;
    rep.routh = r2.table;
    rep.marginal = r1.marginal || r2.marginal;
    rep.stable = r1.stable && r2.stable;
    if (!r1.stable)
        rep.note = "first boundary polynomial fails the Routh test";
    else if (!r2.stable)
        rep.note = r2.marginal ? "second boundary polynomial has an all-zero Routh row"
                               : "second boundary polynomial fails the Routh test";
    return rep;
}

} // namespace fadrc
