#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fadrc/errors.hpp"
#include "fadrc/fracops.hpp"

using namespace fadrc;

namespace {

// y[k] = sum b_i x[k-i] - sum_{i>0} a_i y[k-i], written out directly.
std::vector<double> direct_difference(const std::vector<double>& b, const std::vector<double>& a,
                                      const std::vector<double>& x) {
    std::vector<double> y(x.size(), 0.0);
    for (size_t k = 0; k < x.size(); ++k) {
        double acc = 0.0;
        for (size_t i = 0; i < b.size() && i <= k; ++i)
            acc += b[i] * x[k - i];
        for (size_t i = 1; i < a.size() && i <= k; ++i)
            acc -= a[i] * y[k - i];
        y[k] = acc / a[0];
    }
    return y;
}

std::vector<double> random_signal(size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    std::vector<double> x(n);
    for (auto& v : x)
        v = d(rng);
    return x;
}

} // namespace

TEST_CASE("fractional order must be finite and positive") {
    CHECK_THROWS_AS(FractionalOrder(0.0), InvalidArgument);
    CHECK_THROWS_AS(FractionalOrder(-0.5), InvalidArgument);
    CHECK_THROWS_AS(FractionalOrder(std::nan("")), InvalidArgument);
    CHECK(FractionalOrder(0.75).value() == 0.75);
}

TEST_CASE("s power response matches polar form") {
    for (double a : {0.3, 0.75, 1.0, 1.6}) {
        for (double w : {0.1, 10.0, 2000.0}) {
            const cplx v = s_power_response(a, w);
            CHECK(std::abs(v) == doctest::Approx(std::pow(w, a)).epsilon(1e-12));
            CHECK(std::arg(v) == doctest::Approx(a * std::numbers::pi / 2).epsilon(1e-12));
        }
    }
    CHECK(std::abs(s_power_response(1.0, 3.0) - cplx(0, 3)) < 1e-12);
    CHECK_THROWS_AS(s_power_response(0.5, 0.0), InvalidArgument);
}

TEST_CASE("GL weights of integer orders are binomial rows") {
    const auto d1 = gl_weights(1.0, 4);
    CHECK(d1 == std::vector<double>{1.0, -1.0, 0.0, 0.0});
    const auto d2 = gl_weights(2.0, 4);
    CHECK(d2 == std::vector<double>{1.0, -2.0, 1.0, 0.0});
    for (double w : gl_weights(-1.0, 6))
        CHECK(w == 1.0);
}

TEST_CASE("GL oracle against closed-form Caputo derivatives") {
    const double h = 1e-4;
    const size_t n = 10001;
    std::vector<double> t1(n), t2(n);
    for (size_t k = 0; k < n; ++k) {
        const double t = k * h;
        t1[k] = t;
        t2[k] = t * t;
    }
    for (double a : {0.5, 0.75}) {
        const auto d1 = caputo_gl_oracle(t1, FractionalOrder(a), h);
        const auto d2 = caputo_gl_oracle(t2, FractionalOrder(a), h);
        CHECK(d1.back() == doctest::Approx(1.0 / std::tgamma(2.0 - a)).epsilon(1e-2));
        CHECK(d2.back() == doctest::Approx(2.0 / std::tgamma(3.0 - a)).epsilon(1e-2));
    }
}

TEST_CASE("discrete filter matches the direct difference equation") {
    const std::vector<double> b{0.2, -0.1, 0.05}, a{2.0, -0.8, 0.1};
    DiscreteFilter f(b, a, 1000.0);
    const auto x = random_signal(200, 3);
    const auto ref = direct_difference(b, a, x);
    for (size_t k = 0; k < x.size(); ++k)
        CHECK(f.step(x[k]) == doctest::Approx(ref[k]).epsilon(1e-12));
    f.reset();
    CHECK(f.free_response() == 0.0);
}

TEST_CASE("filter serialization round-trips bit-exactly") {
    const auto f = iri_discretize(FractionalOrder(0.75), 8000, 7);
    const auto g = DiscreteFilter::parse(f.serialize());
    CHECK(g.numerator() == f.numerator());
    CHECK(g.denominator() == f.denominator());
    CHECK(g.sample_rate() == f.sample_rate());
    CHECK_THROWS(DiscreteFilter::parse("garbage"));
}

TEST_CASE("impulse-response-invariant operator stays within the band tolerance") {
    const auto f = iri_discretize(FractionalOrder(0.75), 8000, 7);
    CHECK(f.stable());
    const auto [mag, ph] = band_error(f, 0.75, 1.0, 400.0);
    CHECK(mag <= 1.0);
    CHECK(ph <= 3.0);
    // independent spot checks against (j w)^0.75
    for (double hz : {1.0, 20.0, 150.0, 400.0}) {
        const double w = 2 * std::numbers::pi * hz;
        const cplx ratio = f.response(w) / std::pow(cplx(0, w), 0.75);
        CHECK(std::abs(20 * std::log10(std::abs(ratio))) < 1.0);
        CHECK(std::abs(std::arg(ratio)) * 180 / std::numbers::pi < 3.0);
    }
}

TEST_CASE("fractional integrator step response follows t^r / Gamma(r+1)") {
    const double fs = 8000, r = 0.25;
    auto f = iri_integrator(r, fs, 7);
    double y = 0.0;
    const int n = static_cast<int>(0.1 * fs);
    for (int k = 0; k <= n; ++k)
        y = f.step(1.0);
    CHECK(y == doctest::Approx(std::pow(0.1, r) / std::tgamma(r + 1)).epsilon(0.03));
}

TEST_CASE("differentiator and integrator invert each other") {
    const auto d = iri_discretize(FractionalOrder(0.5), 8000, 7);
    auto fwd = d;
    auto back = d.inverse();
    CHECK(back.stable());
    const auto x = random_signal(500, 11);
    for (double v : x)
        CHECK(std::abs(back.step(fwd.step(v)) - v) < 1e-9);
}

TEST_CASE("orders above one combine differences with the fractional part") {
    const auto f = iri_discretize(FractionalOrder(1.25), 8000, 7);
    const auto [mag, ph] = band_error(f, 1.25, 1.0, 400.0);
    CHECK(mag < 1.0);
    // the backward difference lags by half a sample: 9 deg at 400 Hz
    const double lag = 0.5 * 2 * std::numbers::pi * 400.0 / 8000.0 * 180 / std::numbers::pi;
    CHECK(ph < lag + 3.0);
    for (double hz : {1.0, 10.0, 100.0, 400.0}) {
        CAPTURE(hz);
        const double w = 2 * std::numbers::pi * hz;
        const cplx z1 = std::exp(cplx(0, -w / 8000));
        const cplx bd = (1.0 - z1) * 8000.0;
        const cplx frac = f.response(w) / bd / s_power_response(0.25, w);
        CHECK(std::abs(20 * std::log10(std::abs(frac))) < 1.0);
        CHECK(std::abs(std::arg(frac)) * 180 / std::numbers::pi < 3.0);
    }
}

TEST_CASE("unattainable fit tolerance is reported") {
    IriOptions opt;
    opt.max_mag_err_db = 1e-9;
    CHECK_THROWS_AS(iri_integrator(0.5, 8000, 2, opt), SynthesisError);
    CHECK_THROWS_AS(iri_integrator(1.5, 8000, 7), InvalidArgument);
}

TEST_CASE("GL operator equals direct weighted convolution") {
    const double T = 1e-3;
    for (double alpha : {-0.75, -1.25, 0.5}) {
        GlOperator op(alpha, T);
        const auto x = random_signal(2500, 5); // crosses the internal capacity doubling
        const auto w = gl_weights(alpha, x.size());
        for (size_t k = 0; k < x.size(); ++k) {
            const double pred = op.free_response() + op.feedthrough() * x[k];
            const double got = op.step(x[k]);
            if (k % 97 == 0 || k + 1 == x.size()) {
                double acc = 0.0;
                for (size_t j = 0; j <= k; ++j)
                    acc += w[j] * x[k - j];
                acc *= std::pow(T, -alpha);
                CHECK(got == doctest::Approx(acc).epsilon(1e-9));
            }
            CHECK(pred == doctest::Approx(got).epsilon(1e-12));
        }
        CHECK(op.samples() == x.size());
    }
}

TEST_CASE("GL integrator of order one is a running rectangle sum") {
    GlOperator op(-1.0, 0.5);
    double acc = 0.0;
    for (int k = 1; k <= 10; ++k) {
        acc += 0.5 * k;
        CHECK(op.step(k) == doctest::Approx(acc));
    }
}
