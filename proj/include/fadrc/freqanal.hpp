#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fadrc/numeric.hpp"

namespace fadrc {

struct FoTerm {
    double coef;
    double exponent;
};

// Ratio of generalized polynomials sum c_i s^(alpha_i).
struct FoTransferFunction {
    std::vector<FoTerm> num;
    std::vector<FoTerm> den;

    cplx eval(double omega) const;
    FoTransferFunction operator*(const FoTransferFunction& o) const;
    FoTransferFunction scaled(double k) const;
    // Merge equal exponents, drop zero coefficients, sort descending.
    FoTransferFunction normalized() const;
    std::string to_string() const;
};

// Generalized polynomial helpers.
std::vector<FoTerm> fo_poly_mul(const std::vector<FoTerm>& a, const std::vector<FoTerm>& b);
std::vector<FoTerm> fo_poly_add(const std::vector<FoTerm>& a, const std::vector<FoTerm>& b);
std::vector<FoTerm> fo_poly_normalize(std::vector<FoTerm> p);
cplx fo_poly_eval(const std::vector<FoTerm>& p, double omega);

cplx eval_fotf(const FoTransferFunction& tf, double omega);

// Closed forms for the second-order loop b/(s(s + a_o)) with n = m = 2 and
// bandwidth gains. These are the published structures, valid for a_0 = 0.
FoTransferFunction build_p_ifo(double a_o, double b, double b0, double omega_o, double gamma);
FoTransferFunction build_p_fo(double a_o, double b, double b0, double omega_o, double gamma);
FoTransferFunction build_p_io(double a_o, double omega_o);
FoTransferFunction z1_over_y_ifo(double a_o, double omega_o, double gamma);
FoTransferFunction z1_over_y_io(double a_o, double omega_o);

// General second-order plant b/(s^2 + a1 s + a0), model gain b0, derived by
// eliminating the observer equations. Reduces to the forms above at a0 = 0, b = b0.
enum class LoopKind { IFO, FO, IO };
struct LoopParams {
    double a0 = 0.0;
    double a1 = 26.08;
    double b = 383.635;
    double b0 = 383.635;
    double omega_o = 700.0;
    double gamma = 0.75;
};
FoTransferFunction compensated_plant(LoopKind kind, const LoopParams& p);
FoTransferFunction z1_over_y(LoopKind kind, const LoopParams& p);

// Delta = 1 - (j w)^(2 gamma) P(j w): the closed-loop model error against 1/s^(2 gamma).
cplx delta_from_p(const FoTransferFunction& p, double gamma, double omega);
std::function<cplx(double)> build_delta_ifo(double a_o, double omega_o, double gamma);
std::function<cplx(double)> build_delta_fo(double a_o, double omega_o, double gamma);

struct MseCurve {
    std::vector<double> omegas;
    std::vector<double> e_ifo;
    std::vector<double> e_fo;
};
MseCurve mse_curve(double a_o, double omega_o, double gamma, const std::vector<double>& grid);

// Open loops C(s) * P(s) * Z1(s)/Y(s).
FoTransferFunction open_loop_ifo(const LoopParams& p, double k_fp);
FoTransferFunction open_loop_fo(const LoopParams& p, double k_fp);
FoTransferFunction open_loop_io(const LoopParams& p, double k_ip, double k_id);

struct CrossoverMargin {
    double omega_c;
    double phase_margin_deg;
};
CrossoverMargin crossover_and_margin(const FoTransferFunction& tf, double lo = 1e-2, double hi = 1e5);

struct BodeData {
    std::vector<double> omegas;
    std::vector<double> mag_db;
    std::vector<double> phase_deg;
};
BodeData bode_curve(const FoTransferFunction& tf, const std::vector<double>& grid);

std::vector<double> log_grid(double lo, double hi, int points);

} // namespace fadrc
