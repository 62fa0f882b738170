#include "fadrc/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "fadrc/errors.hpp"

namespace fadrc {

FractionalOrder::FractionalOrder(double v) : v_(v) {
    if (!std::isfinite(v) || v <= 0.0)
        throw InvalidArgument(fmt::format("fractional order must be finite and > 0, got {}", v));
}

cplx s_power_response(double order, double omega) {
    if (!(omega > 0.0))
        throw InvalidArgument(fmt::format("s_power_response: omega must be > 0, got {}", omega));
    const double mag = std::pow(omega, order);
    const double ph = order * std::numbers::pi / 2.0;
    return {mag * std::cos(ph), mag * std::sin(ph)};
}

std::vector<double> gl_weights(double alpha, std::size_t count) {
    std::vector<double> w(count);
    if (count == 0)
        return w;
    w[0] = 1.0;
    for (std::size_t j = 1; j < count; ++j)
        w[j] = w[j - 1] * (1.0 - (alpha + 1.0) / static_cast<double>(j));
    return w;
}

std::vector<double> caputo_gl_oracle(std::span<const double> samples, FractionalOrder order, double step) {
    if (!(step > 0.0))
        throw InvalidArgument("caputo_gl_oracle: step must be > 0");
    if (samples.size() < 2)
        throw InvalidArgument("caputo_gl_oracle: need at least two samples");
    const double a = order.value();
    const auto w = gl_weights(a, samples.size());
    const double scale = std::pow(step, -a);
    std::vector<double> out(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= k; ++j)
            acc += w[j] * samples[k - j];
        out[k] = acc * scale;
    }
    return out;
}

// ---------------------------------------------------------------------------

DiscreteFilter::DiscreteFilter(std::vector<double> num, std::vector<double> den, double sample_rate,
                               double approximated_order)
    : fs_(sample_rate), order_(approximated_order) {
    if (num.empty() || den.empty() || den[0] == 0.0)
        throw InvalidArgument("DiscreteFilter: empty coefficients or zero leading denominator");
    if (!(fs_ > 0.0))
        throw InvalidArgument("DiscreteFilter: sample rate must be > 0");
    Section s{std::move(num), std::move(den), {}};
    const double a0 = s.a[0];
    for (auto& v : s.b)
        v /= a0;
    for (auto& v : s.a)
        v /= a0;
    const std::size_t n = std::max(s.b.size(), s.a.size());
    s.b.resize(n, 0.0);
    s.a.resize(n, 0.0);
    s.state.assign(n - 1, 0.0);
    sec_.push_back(std::move(s));
}

DiscreteFilter DiscreteFilter::cascade(const std::vector<DiscreteFilter>& parts, double approximated_order) {
    if (parts.empty())
        throw InvalidArgument("DiscreteFilter::cascade: no parts");
    DiscreteFilter f;
    f.fs_ = parts[0].fs_;
    f.order_ = approximated_order;
    for (const auto& p : parts) {
        if (p.fs_ != f.fs_)
            throw InvalidArgument("DiscreteFilter::cascade: sample rates differ");
        f.sec_.insert(f.sec_.end(), p.sec_.begin(), p.sec_.end());
    }
    return f;
}

double DiscreteFilter::Section::step(double x) {
    const double y = b[0] * x + (state.empty() ? 0.0 : state[0]);
    const std::size_t m = state.size();
    for (std::size_t i = 0; i + 1 < m; ++i)
        state[i] = state[i + 1] + b[i + 1] * x - a[i + 1] * y;
    if (m > 0)
        state[m - 1] = b[m] * x - a[m] * y;
    return y;
}

double DiscreteFilter::step(double x) {
    for (auto& s : sec_)
        x = s.step(x);
    return x;
}

double DiscreteFilter::free_response() const {
    double y = 0.0;
    for (const auto& s : sec_)
        y = s.b[0] * y + (s.state.empty() ? 0.0 : s.state[0]);
    return y;
}

double DiscreteFilter::feedthrough() const {
    double g = 1.0;
    for (const auto& s : sec_)
        g *= s.b[0];
    return g;
}

void DiscreteFilter::reset() {
    for (auto& s : sec_)
        std::fill(s.state.begin(), s.state.end(), 0.0);
}

cplx DiscreteFilter::response(double omega) const {
    const cplx zi = std::exp(cplx(0.0, -omega / fs_));
    cplx h = 1.0;
    for (const auto& s : sec_) {
        cplx num = 0, den = 0, p = 1;
        for (std::size_t k = 0; k < s.b.size(); ++k) {
            num += s.b[k] * p;
            den += s.a[k] * p;
            p *= zi;
        }
        h *= num / den;
    }
    return h;
}

std::vector<cplx> DiscreteFilter::poles() const {
    std::vector<cplx> out;
    for (const auto& s : sec_) {
        std::vector<double> d = s.a;
        while (d.size() > 1 && d.back() == 0.0)
            d.pop_back();
        if (d.size() < 2)
            continue;
        // a_0 z^n + a_1 z^(n-1) + ... is the same list read in descending powers of z
        const auto r = roots_desc(d);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

bool DiscreteFilter::stable(double margin) const {
    for (auto p : poles())
        if (std::abs(p) >= 1.0 - margin)
            return false;
    return true;
}

DiscreteFilter DiscreteFilter::inverse() const {
    if (feedthrough() == 0.0)
        throw InvalidArgument("DiscreteFilter::inverse: zero feedthrough, inverse is not causal");
    std::vector<DiscreteFilter> parts;
    for (auto it = sec_.rbegin(); it != sec_.rend(); ++it)
        parts.emplace_back(it->a, it->b, fs_);
    return cascade(parts, -order_);
}

std::vector<double> DiscreteFilter::numerator() const {
    std::vector<double> p{1.0};
    for (const auto& s : sec_)
        p = poly_mul(p, s.b);
    return p;
}

std::vector<double> DiscreteFilter::denominator() const {
    std::vector<double> p{1.0};
    for (const auto& s : sec_)
        p = poly_mul(p, s.a);
    return p;
}

std::string DiscreteFilter::serialize() const {
    auto line = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i)
                s += ' ';
            s += fmt::format("{:.17g}", v[i]);
        }
        return s;
    };
    return line(numerator()) + "\n" + line(denominator()) + "\n" + fmt::format("{:.17g}", fs_) + "\n";
}

DiscreteFilter DiscreteFilter::parse(const std::string& text) {
    std::istringstream in(text);
    std::string l1, l2, l3;
    if (!std::getline(in, l1) || !std::getline(in, l2) || !std::getline(in, l3))
        throw InvalidArgument("DiscreteFilter::parse: expected three lines");
    auto nums = [](const std::string& l) {
        std::istringstream s(l);
        std::vector<double> v;
        double x;
        while (s >> x)
            v.push_back(x);
        if (!s.eof())
            throw InvalidArgument("DiscreteFilter::parse: bad number in '" + l + "'");
        return v;
    };
    auto fsv = nums(l3);
    if (fsv.size() != 1)
        throw InvalidArgument("DiscreteFilter::parse: line 3 must hold the sample rate");
    return DiscreteFilter(nums(l1), nums(l2), fsv[0]);
}

double filter_step(DiscreteFilter& filter, double input) { return filter.step(input); }

// ---------------------------------------------------------------------------

std::pair<double, double> band_error(const DiscreteFilter& f, double order, double lo_hz, double hi_hz,
                                     int points) {
    double mag = 0.0, ph = 0.0;
    for (int i = 0; i < points; ++i) {
        const double fr = lo_hz * std::pow(hi_hz / lo_hz, static_cast<double>(i) / (points - 1));
        const double w = 2.0 * std::numbers::pi * fr;
        const cplx ratio = f.response(w) / s_power_response(order, w);
        mag = std::max(mag, std::abs(20.0 * std::log10(std::abs(ratio))));
        ph = std::max(ph, std::abs(std::arg(ratio)) * 180.0 / std::numbers::pi);
    }
    return {mag, ph};
}

namespace {

struct Band {
    double lo, hi, seconds;
};

Band resolve_band(double fs, const IriOptions& opt) {
    Band b{opt.band_lo_hz > 0 ? opt.band_lo_hz : fs / 8000.0, opt.band_hi_hz > 0 ? opt.band_hi_hz : fs / 20.0, 0};
    if (!(b.lo < b.hi) || b.hi >= fs / 2)
        throw InvalidArgument(fmt::format("IRI band [{}, {}] Hz invalid for fs={}", b.lo, b.hi, fs));
    b.seconds = opt.impulse_seconds > 0 ? opt.impulse_seconds : 0.5 / b.lo;
    return b;
}

void check_fit(DiscreteFilter& f, double order, const Band& band, const IriOptions& opt, const char* what) {
    auto [mag, ph] = band_error(f, order, band.lo, band.hi);
    f.band_error_db = mag;
    f.band_error_deg = ph;
    if (!f.stable())
        throw SynthesisError(fmt::format("{}: fit of order {} is unstable", what, order), mag, ph);
    if (mag > opt.max_mag_err_db || ph > opt.max_phase_err_deg)
        throw SynthesisError(fmt::format("{}: order {} band error {:.3g} dB / {:.3g} deg exceeds bound", what, order,
                                         mag, ph),
                             mag, ph);
}

} // namespace

DiscreteFilter iri_integrator(double r, double sample_rate, int approx_order, const IriOptions& opt) {
    if (!(r > 0.0 && r < 1.0))
        throw InvalidArgument(fmt::format("iri_integrator: order must lie in (0,1), got {}", r));
    if (!(sample_rate > 0.0))
        throw InvalidArgument("iri_integrator: sample rate must be > 0");
    if (approx_order < 1)
        throw InvalidArgument("iri_integrator: approx_order must be >= 1");
    const Band band = resolve_band(sample_rate, opt);
    const double T = 1.0 / sample_rate;
    const auto L = static_cast<Eigen::Index>(std::ceil(band.seconds * sample_rate));

    // Sampled impulse response T*t^(r-1)/Gamma(r); the singular first sample is
    // replaced by the exact integral over the first half sample.
    Eigen::VectorXd h(L);
    h(0) = std::pow(T / 2.0, r) / std::tgamma(r + 1.0);
    for (Eigen::Index n = 1; n < L; ++n)
        h(n) = T * std::pow(static_cast<double>(n) * T, r - 1.0) / std::tgamma(r);

    // Real poles exp(-x T), x log-spaced a decade below to 5x above the band.
    const int N = approx_order;
    const double xlo = 2.0 * std::numbers::pi * band.lo / 10.0;
    const double xhi = 2.0 * std::numbers::pi * std::min(band.hi * 5.0, 0.45 * sample_rate);
    std::vector<double> poles(static_cast<size_t>(N));
    for (int k = 0; k < N; ++k) {
        const double t = N == 1 ? 0.5 : static_cast<double>(k) / (N - 1);
        poles[static_cast<size_t>(k)] = std::exp(-xlo * std::pow(xhi / xlo, t) * T);
    }

    // h[n] ~ d0*delta[n] + sum_k r_k p_k^n with d0, r_k >= 0
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L, N + 1);
    A(0, 0) = 1.0;
    for (int k = 0; k < N; ++k) {
        double p = 1.0;
        for (Eigen::Index n = 0; n < L; ++n) {
            A(n, k + 1) = p;
            p *= poles[static_cast<size_t>(k)];
        }
    }
    const Eigen::VectorXd sol = nnls(A, h);

    // Keep only poles the fit actually uses, ascending.
    std::vector<std::pair<double, double>> pr; // (pole, residue)
    for (int k = 0; k < N; ++k)
        if (sol(k + 1) > 0.0)
            pr.emplace_back(poles[static_cast<size_t>(k)], sol(k + 1));
    std::sort(pr.begin(), pr.end());
    const double d0 = sol(0);
    double gain = d0;
    for (auto [p, res] : pr)
        gain += res;
    if (pr.empty() || !(gain > 0.0))
        throw SynthesisError(fmt::format("iri_integrator: degenerate fit for order {}", r), 0.0, 0.0);

    // With positive residues H(z) = d0 + sum r_k z/(z - p_k) is decreasing between
    // poles, so one zero sits in each gap and one in [0, p_min). Bisection on the
    // partial fractions finds them without forming the expanded polynomial.
    auto H = [&](double z) {
        double v = d0;
        for (auto [p, res] : pr)
            v += res * z / (z - p);
        return v;
    };
    auto bisect = [&](double lo, double hi) {
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            (H(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    std::vector<DiscreteFilter> sections;
    for (size_t k = 0; k < pr.size(); ++k) {
        const double lo = k == 0 ? 0.0 : pr[k - 1].first;
        const double c = (k == 0 && d0 == 0.0) ? 0.0 : bisect(lo, pr[k].first);
        const double g = k == 0 ? gain : 1.0;
        sections.emplace_back(std::vector<double>{g, -g * c}, std::vector<double>{1.0, -pr[k].first}, sample_rate);
    }
    DiscreteFilter f = DiscreteFilter::cascade(sections, -r);
    check_fit(f, -r, band, opt, "iri_integrator");
    // The inverse must be usable as a differentiator, so the zeros must be stable too.
    if (!f.inverse().stable())
        throw SynthesisError(fmt::format("iri_integrator: fit of order {} is not minimum phase", r), f.band_error_db,
                             f.band_error_deg);
    return f;
}

DiscreteFilter iri_discretize(FractionalOrder order, double sample_rate, int approx_order, const IriOptions& opt) {
    if (!(sample_rate > 0.0))
        throw InvalidArgument("iri_discretize: sample rate must be > 0");
    if (approx_order < 1)
        throw InvalidArgument("iri_discretize: approx_order must be >= 1");
    const double g = order.value();
    const double whole = std::floor(g + 1e-12);
    const double frac = g - whole;
    const double T = 1.0 / sample_rate;

    std::vector<DiscreteFilter> parts;
    for (int k = 0; k < static_cast<int>(whole); ++k)
        parts.emplace_back(std::vector<double>{1.0 / T, -1.0 / T}, std::vector<double>{1.0}, sample_rate, 1.0);
    if (frac > 1e-12)
        parts.push_back(iri_integrator(frac, sample_rate, approx_order, opt).inverse());
    DiscreteFilter f = DiscreteFilter::cascade(parts, g);
    const Band band = resolve_band(sample_rate, opt);
    auto [mag, ph] = band_error(f, g, band.lo, band.hi);
    f.band_error_db = mag;
    f.band_error_deg = ph;
    return f;
}

// ---------------------------------------------------------------------------

GlOperator::GlOperator(double alpha, double step) : alpha_(alpha), scale_(std::pow(step, -alpha)) {
    if (!(step > 0.0))
        throw InvalidArgument("GlOperator: step must be > 0");
}

void GlOperator::grow(std::size_t need) {
    std::size_t cap = std::max<std::size_t>(cap_ ? cap_ * 2 : 1024, need);
    const auto w = gl_weights(alpha_, cap + 1);
    wrev_.assign(cap, 0.0);
    // wrev_[cap - j] = w_j for j = 1..cap
    for (std::size_t j = 1; j <= cap; ++j)
        wrev_[cap - j] = w[j] * scale_;
    cap_ = cap;
    hist_.reserve(cap);
}

double GlOperator::free_response() const {
    const std::size_t k = hist_.size();
    if (k == 0)
        return 0.0;
    // sum_{j=1..k} w_j x[k-j] = sum_{i=0..k-1} x[i] w_{k-i}
    const double* w = wrev_.data() + (cap_ - k);
    return std::inner_product(hist_.begin(), hist_.end(), w, 0.0);
}

double GlOperator::step(double x) {
    if (hist_.size() + 1 > cap_)
        grow(hist_.size() + 1);
    const double y = scale_ * x + free_response();
    hist_.push_back(x);
    return y;
}

void GlOperator::reset() { hist_.clear(); }

} // namespace fadrc
