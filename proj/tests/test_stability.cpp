#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fadrc/errors.hpp"
#include "fadrc/observers.hpp"
#include "fadrc/stability.hpp"

using namespace fadrc;

namespace {

// The m = n = 2 closed-loop polynomial written out term by term in s.
cplx closed_loop_s(double a0, double a1, double kp, const std::vector<double>& b, double g, double nu, cplx s) {
    auto sp = [&](double e) { return std::pow(s, e); };
    const cplx left = sp(g) * (a0 + a1 * s) * (kp + sp(2 * g) + b[0] * sp(g) + b[1]);
    const cplx right = (sp(2 * g) + kp) * (sp(nu + g) * (sp(2 * g) + b[0] * sp(g)) + b[1] * sp(g) + b[2]);
    return left + right;
}

std::vector<double> random_int_poly(std::mt19937& rng, int deg) {
    std::uniform_int_distribution<int> d(-3, 9);
    std::vector<double> c(static_cast<size_t>(deg + 1));
    c[0] = 1 + std::abs(d(rng));
    for (size_t i = 1; i < c.size(); ++i)
        c[i] = d(rng);
    return c;
}

} // namespace

TEST_CASE("ESO characteristic polynomial terms") {
    const auto p = eso_char_poly({3, 3, 1}, 2, 0.75, 0.5);
    REQUIRE(p.size() == 4);
    const double exps[] = {2.75, 2.0, 0.75, 0.0};
    const double coefs[] = {1, 3, 3, 1};
    for (size_t i = 0; i < 4; ++i) {
        CHECK(p[i].exponent == doctest::Approx(exps[i]));
        CHECK(p[i].coef == doctest::Approx(coefs[i]));
    }
    const auto z = eso_char_poly({0, 0, 0}, 2, 0.75, 0.5);
    REQUIRE(z.size() == 1);
    CHECK(z[0].exponent == doctest::Approx(2.75));
    CHECK_THROWS_AS(eso_char_poly({1, 1, 1}, 2, 0.6, 0.8), InvalidArgument);
    CHECK_THROWS_AS(eso_char_poly({1, 1}, 2, 0.75, 0.5), InvalidArgument);
}

TEST_CASE("Kharitonov boundary roots with bandwidth gains") {
    const double wo = 700;
    const auto rep = kharitonov_eso_check(bandwidth_gains(wo, 2), 2, 0.75, 0.5);
    CHECK(rep.stable);
    CHECK(rep.method == StabilityReport::Method::kharitonov);
    REQUIRE(rep.roots.size() == 4);
    // first boundary polynomial is linear; its root is -(beta_n + beta_{n+1}) / (1 + beta_1)
    const double expected_l1 = -(3 * wo * wo + wo * wo * wo) / (1 + 3 * wo);
    CHECK(rep.roots[0].real() == doctest::Approx(expected_l1).epsilon(1e-12));
    for (size_t i = 1; i < 4; ++i) {
        CHECK(std::abs(rep.roots[i] - cplx(-wo, 0)) / wo < 1e-6);
    }
    // unit bandwidth: second boundary polynomial is (w + 1)^3
    const auto unit = kharitonov_eso_check(bandwidth_gains(1.0, 2), 2, 0.75, 0.5);
    for (size_t i = 1; i < 4; ++i)
        CHECK(std::abs(unit.roots[i] + 1.0) < 1e-6);
}

TEST_CASE("Kharitonov check holds across bandwidths and orders") {
    for (double wo : {10.0, 100.0, 700.0, 2000.0})
        for (double g : {0.6, 0.75, 0.9}) {
            const auto rep = kharitonov_eso_check(bandwidth_gains(wo, 2), 2, g, 2 - 2 * g);
            CAPTURE(wo);
            CAPTURE(g);
            CHECK(rep.stable);
        }
}

TEST_CASE("negative observer gain is caught") {
    const auto rep = kharitonov_eso_check({-1, 0, 0}, 2, 0.75, 0.5);
    CHECK_FALSE(rep.stable);
}

TEST_CASE("order rationalization") {
    CHECK(rationalize_order(0.75) == std::pair{3, 4});
    CHECK(rationalize_order(0.5) == std::pair{1, 2});
    CHECK(rationalize_order(1.25) == std::pair{5, 4});
    CHECK_THROWS_AS(rationalize_order(std::numbers::pi / 4), OrderApproximationError);
    CHECK_THROWS_AS(rationalize_order(1.0 / 65.0), OrderApproximationError);
    CHECK(rationalize_order(1.0 / 65.0, 100) == std::pair{1, 65});
}

TEST_CASE("commensurate polynomial equals the s-domain closed loop") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double a0 = 100 * U(rng), a1 = 50 * U(rng), kp = 1 + 10 * U(rng), wo = 1 + 5 * U(rng);
        AuxController p;
        p.k_p = kp;
        const auto betas = bandwidth_gains(wo, 2);
        const auto form = closed_loop_poly_w(PlantModel{{a0, a1}, 1.0}, p, betas, 2, 0.75, 0.5);
        REQUIRE(form.base_denominator() == 8);
        for (int j = 0; j < 3; ++j) {
            const cplx s = std::polar(0.3 + 2 * U(rng), (U(rng) - 0.5) * 2.0);
            const cplx w = std::pow(s, 1.0 / 8.0);
            const cplx want = closed_loop_s(a0, a1, kp, betas, 0.75, 0.5, s);
            const cplx got = polyval_desc(form.w_polynomial, w);
            CHECK(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("plant-free closed loop factors into controller and observer parts") {
    AuxController p;
    p.k_p = 2.0;
    const auto betas = bandwidth_gains(1.5, 2);
    const auto form = closed_loop_poly_w(PlantModel{{0.0, 0.0}, 1.0}, p, betas, 2, 0.75, 0.5);
    const auto rep = commensurate_root_test(form);
    // every root of w^12 + 2 is a root of the full polynomial
    for (int k = 0; k < 12; ++k) {
        const cplx r = std::polar(std::pow(2.0, 1.0 / 12), (2 * k + 1) * std::numbers::pi / 12);
        CHECK(std::abs(polyval_desc(form.w_polynomial, r)) < 1e-8);
    }
    CHECK(rep.roots.size() == form.w_polynomial.size() - 1);
}

TEST_CASE("direct root test on small forms") {
    CommensurateForm f;
    f.p1 = 1;
    f.q1 = 2;
    f.p2 = 1;
    f.q2 = 2;
    f.w_polynomial = {1, 1};
    const auto s = commensurate_root_test(f);
    CHECK(s.stable);
    CHECK(s.min_arg_margin == doctest::Approx(std::numbers::pi - std::numbers::pi / 8));
    f.w_polynomial = {1, -1};
    CHECK_FALSE(commensurate_root_test(f).stable);
    f.w_polynomial = {1};
    CHECK_THROWS_AS(commensurate_root_test(f), InvalidArgument);
    f.w_polynomial.assign(2002, 1.0);
    CHECK_THROWS_AS(commensurate_root_test(f), InvalidArgument);
}

TEST_CASE("nominal closed loop passes the commensurate root test") {
    AuxController p;
    p.k_p = 356;
    const auto form = closed_loop_poly_w(example_plant(), p, bandwidth_gains(700, 2), 2, 0.75, 0.5);
    const auto rep = commensurate_root_test(form);
    CHECK(rep.stable);
    CHECK_FALSE(rep.low_confidence);
    CHECK_THROWS_AS(closed_loop_poly_w(example_plant(), p, bandwidth_gains(700, 2), 2, 0.75, 0.5, 2),
                    OrderApproximationError);
}

TEST_CASE("Routh table basics") {
    const auto a = routh_table({1, 2, 1});
    CHECK(a.stable);
    const auto b = routh_table({1, 1, -1, 1});
    CHECK_FALSE(b.stable);
    const auto c = routh_table({1, 1, 1, 1}); // (s + 1)(s^2 + 1)
    CHECK_FALSE(c.stable);
    CHECK(c.marginal);
    const auto d = routh_table({1, 6, 11, 6});
    CHECK(d.stable);
    CHECK(d.table[2][0] == doctest::Approx(10.0));
    CHECK_THROWS_AS(routh_table({-1, 2}), InvalidArgument);
    CHECK_THROWS_AS(routh_table({0, 0}), InvalidArgument);
}

TEST_CASE("Routh verdict agrees with the roots on random integer polynomials") {
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> deg(1, 6);
    int stable_count = 0;
    for (int i = 0; i < 100; ++i) {
        const auto c = random_int_poly(rng, deg(rng));
        bool left = true;
        for (const auto& r : roots_desc(c))
            left = left && r.real() < -1e-9;
        const auto rt = routh_table(c);
        CAPTURE(i);
        CHECK(rt.stable == left);
        stable_count += left;
    }
    // random draws are mostly unstable; add polynomials built from left-half-plane roots
    std::mt19937 rng2(1);
    for (int i = 0; i < 30; ++i) {
        std::vector<double> roots;
        std::uniform_real_distribution<double> u(0.1, 5.0);
        for (int k = 0; k < 5; ++k)
            roots.push_back(-u(rng2));
        auto asc = poly_from_roots(roots); // coefficients of prod (1 - r z^-1) = monic descending in s
        CHECK(routh_table(asc).stable);
    }
    CHECK(stable_count > 0);
}

TEST_CASE("proposition boundary polynomials match the printed coefficients") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double a0 = 1000 * U(rng), a1 = 100 * U(rng), kp = 1000 * U(rng), w = 1000 * U(rng);
        const auto p2 = proposition1_p2(a0, a1, kp, w);
        const double B[] = {1,
                            a1 + 3 * w,
                            a0 + kp + 3 * a1 * w + 3 * w * w,
                            a1 * kp + 3 * a0 * w + 3 * kp * w + 3 * a1 * w * w + w * w * w,
                            a0 * kp + 3 * a0 * w * w + 3 * kp * w * w,
                            kp * w * w * w};
        for (size_t k = 0; k < 6; ++k)
            CHECK(p2[k] == doctest::Approx(B[k]).epsilon(1e-12));
        const auto p1 = proposition1_p1(a0, a1, kp, w);
        CHECK(p1[0] == doctest::Approx(1 + kp + 3 * (1 + kp) * w));
        CHECK(p1[1] == doctest::Approx(a1 * (1 + kp + 3 * w + 3 * w * w)));
        CHECK(p1[2] == doctest::Approx(a0 * (1 + kp + 3 * w + 3 * w * w) + 3 * (1 + kp) * w * w +
                                       (1 + kp) * w * w * w));
    }
}

TEST_CASE("proposition certification") {
    const auto rep = proposition1_certify(3819.7, 138.1, 750, 700);
    CHECK(rep.stable);
    REQUIRE(rep.routh.size() == 6);
    for (const auto& row : rep.routh)
        CHECK(row[0] > 0.0);
    // last first-column entry is k_p omega_o^3
    CHECK(rep.routh[5][0] == doctest::Approx(750 * 700.0 * 700.0 * 700.0));

    // a0 = a1 = 0: first boundary polynomial is A0 s^2 + A2, marginal
    const auto z = proposition1_certify(0, 0, 1, 1);
    CHECK_FALSE(z.stable);
    CHECK(z.marginal);
    CHECK_THROWS_AS(proposition1_certify(-1, 0, 1, 1), InvalidArgument);
}

TEST_CASE("third Routh row against the closed-form ratio") {
    const double a0 = 3819.7, a1 = 138.1, kp = 750, w = 700;
    const auto rep = proposition1_certify(a0, a1, kp, w);
    const double N5 = a0 * a1 + 3 * a1 * a1 * w + 9 * a1 * w * w + 8 * w * w * w;
    CHECK(rep.routh[2][0] == doctest::Approx(N5 / (a1 + 3 * w)).epsilon(1e-10));
}

TEST_CASE("large bandwidth eventually certifies") {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double a0 = 5000 * U(rng), a1 = 300 * U(rng), kp = 1 + 2000 * U(rng);
        CHECK(proposition1_certify(a0, a1, kp, 1e5).stable);
    }
}

TEST_CASE("proposition and commensurate root test agree for large bandwidth") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int agree = 0;
    for (int i = 0; i < 50; ++i) {
        const double a0 = 5000 * U(rng), a1 = 300 * U(rng), kp = 1 + 2000 * U(rng);
        const double wo = std::pow(10.0, 2 + 1.5 * U(rng));
        AuxController p;
        p.k_p = kp;
        const auto form = closed_loop_poly_w(PlantModel{{a0, a1}, 1.0}, p, bandwidth_gains(wo, 2), 2, 0.75, 0.5);
        agree += commensurate_root_test(form).stable == proposition1_certify(a0, a1, kp, wo).stable;
    }
    CHECK(agree == 50);
}

TEST_CASE("proposition certification implies the root test") {
    std::mt19937 rng(78);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        const double a0 = 5000 * U(rng), a1 = 300 * U(rng), kp = 1 + 2000 * U(rng);
        const double wo = std::pow(10.0, 3.5 * U(rng));
        if (!proposition1_certify(a0, a1, kp, wo).stable)
            continue;
        AuxController p;
        p.k_p = kp;
        const auto form = closed_loop_poly_w(PlantModel{{a0, a1}, 1.0}, p, bandwidth_gains(wo, 2), 2, 0.75, 0.5);
        CHECK(commensurate_root_test(form).stable);
    }
}

TEST_CASE("report serialization") {
    const auto rep = kharitonov_eso_check(bandwidth_gains(700, 2), 2, 0.75, 0.5);
    const auto text = rep.to_text();
    CHECK(text.find("method = kharitonov") != std::string::npos);
    CHECK(text.find("verdict = stable") != std::string::npos);
    CHECK(text.find("margin_rad") != std::string::npos);
}
