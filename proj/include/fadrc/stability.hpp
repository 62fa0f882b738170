#pragma once

#include <string>
#include <vector>

#include "fadrc/adrc.hpp"
#include "fadrc/freqanal.hpp"
#include "fadrc/numeric.hpp"
#include "fadrc/plants.hpp"

namespace fadrc {

// Polynomial in w = s^(1/(q1 q2)), descending integer powers.
struct CommensurateForm {
    int p1 = 0, q1 = 1; // nu = p1/q1
    int p2 = 0, q2 = 1; // gamma = p2/q2
    std::vector<double> w_polynomial;

    int base_denominator() const { return q1 * q2; }
};

struct StabilityReport {
    enum class Method { kharitonov, direct_root, routh };
    Method method = Method::direct_root;
    bool stable = false;
    bool marginal = false;
    bool low_confidence = false; // root residual above 1e-8 * ||coeffs||
    std::vector<cplx> roots;
    double min_arg_margin = 0.0; // radians, min |arg w| - threshold
    cplx worst_root{};
    double max_residual = 0.0;
    std::vector<std::vector<double>> routh; // routh method only
    std::string note;

    std::string to_text() const;
};

const char* to_string(StabilityReport::Method m);

// lambda(s) = s^(nu+gamma) (s^(n gamma) + sum_{i<n} beta_i s^((n-i) gamma)) + beta_n s^gamma + beta_{n+1}
std::vector<FoTerm> eso_char_poly(const std::vector<double>& betas, int n, double gamma, double nu);

StabilityReport kharitonov_eso_check(const std::vector<double>& betas, int n, double gamma, double nu);

// Smallest p/q with q <= max_den matching x to 1e-12; OrderApproximationError otherwise.
std::pair<int, int> rationalize_order(double x, int max_den = 64);

CommensurateForm closed_loop_poly_w(const PlantModel& plant, const AuxController& aux, const std::vector<double>& betas,
                                    int n, double gamma, double nu, int max_den = 64);

StabilityReport commensurate_root_test(const CommensurateForm& form);

// Generic arg-sector test on a descending polynomial: stable iff all roots
// satisfy |arg w| > threshold (strictly, with a 1e-9 marginal band).
StabilityReport arg_sector_test(const std::vector<double>& coeffs_desc, double threshold,
                                StabilityReport::Method method);

struct RouthResult {
    std::vector<std::vector<double>> table;
    bool stable = false;
    bool marginal = false; // an all-zero row was replaced by its auxiliary derivative
};
RouthResult routh_table(const std::vector<double>& coeffs_desc);

// Boundary polynomials of the m = n = 2 closed loop with bandwidth gains.
std::vector<double> proposition1_p1(double a0, double a1, double k_p, double omega_o);
std::vector<double> proposition1_p2(double a0, double a1, double k_p, double omega_o);
StabilityReport proposition1_certify(double a0, double a1, double k_p, double omega_o);

} // namespace fadrc
