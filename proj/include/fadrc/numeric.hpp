#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace fadrc {

using cplx = std::complex<double>;

// Lawson-Hanson non-negative least squares: argmin ||Ax - b||, x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 0);

// Polynomials in this header are ascending in z^-1 (DSP convention) unless the
// name says "desc": coefficient k multiplies z^-k.
std::vector<double> poly_from_roots(const std::vector<double>& roots);
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b);

// Roots of a real polynomial with coefficients in descending powers, via the
// balanced companion matrix followed by a few Newton steps in long double.
std::vector<cplx> roots_desc(const std::vector<double>& coeffs);

// Horner evaluation, descending powers.
cplx polyval_desc(const std::vector<double>& coeffs, cplx x);

} // namespace fadrc
