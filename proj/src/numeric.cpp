#include "fadrc/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fadrc/errors.hpp"

namespace fadrc {

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter) {
    const Eigen::Index n = A.cols();
    if (A.rows() != b.size())
        throw InvalidArgument("nnls: row mismatch");
    if (max_iter <= 0)
        max_iter = static_cast<int>(3 * n + 30);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<size_t>(n), false);
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.cwiseAbs().maxCoeff() *
                       static_cast<double>(std::max(A.rows(), n));

    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j)
            if (passive[static_cast<size_t>(j)])
                idx.push_back(j);
        Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
        for (size_t k = 0; k < idx.size(); ++k)
            Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
        Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
        z.setZero(n);
        for (size_t k = 0; k < idx.size(); ++k)
            z(idx[k]) = zp(static_cast<Eigen::Index>(k));
    };

    Eigen::VectorXd w = A.transpose() * (b - A * x);
    for (int outer = 0; outer < max_iter; ++outer) {
        Eigen::Index best = -1;
        double wmax = tol;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!passive[static_cast<size_t>(j)] && w(j) > wmax) {
                wmax = w(j);
                best = j;
            }
        if (best < 0)
            break;
        passive[static_cast<size_t>(best)] = true;

        Eigen::VectorXd z;
        for (int inner = 0; inner < max_iter; ++inner) {
            solve_passive(z);
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<size_t>(j)] && z(j) <= 0)
                    feasible = false;
            if (feasible)
                break;
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<size_t>(j)] && z(j) <= 0)
                    alpha = std::min(alpha, x(j) / (x(j) - z(j)));
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[static_cast<size_t>(j)] && x(j) <= tol) {
                    passive[static_cast<size_t>(j)] = false;
                    x(j) = 0;
                }
        }
        x = z;
        w = A.transpose() * (b - A * x);
    }
    return x;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty())
        return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> poly_from_roots(const std::vector<double>& roots) {
    std::vector<double> p{1.0};
    for (double r : roots)
        p = poly_mul(p, {1.0, -r});
    return p;
}

cplx polyval_desc(const std::vector<double>& coeffs, cplx x) {
    cplx acc = 0;
    for (double c : coeffs)
        acc = acc * x + c;
    return acc;
}

namespace {

std::complex<long double> polyval_desc_ld(const std::vector<double>& c, std::complex<long double> x) {
    std::complex<long double> acc = 0;
    for (double v : c)
        acc = acc * x + static_cast<long double>(v);
    return acc;
}

std::complex<long double> dpolyval_desc_ld(const std::vector<double>& c, std::complex<long double> x) {
    std::complex<long double> acc = 0;
    const size_t deg = c.size() - 1;
    for (size_t i = 0; i < deg; ++i)
        acc = acc * x + static_cast<long double>(c[i]) * static_cast<long double>(deg - i);
    return acc;
}

std::vector<double> derivative_desc(const std::vector<double>& c) {
    std::vector<double> d;
    const size_t deg = c.size() - 1;
    for (size_t i = 0; i < deg; ++i)
        d.push_back(c[i] * static_cast<double>(deg - i));
    return d;
}

// Eigenvalues of a multiple root scatter on a small circle; their mean is far
// more accurate, and Newton on the (m-1)th derivative then converges quadratically.
void refine_clusters(const std::vector<double>& c, std::vector<cplx>& roots) {
    const size_t n = roots.size();
    std::vector<int> group(n, -1);
    int groups = 0;
    for (size_t i = 0; i < n; ++i) {
        if (group[i] >= 0)
            continue;
        group[i] = groups;
        for (size_t j = i + 1; j < n; ++j)
            if (group[j] < 0 && std::abs(roots[i] - roots[j]) <= 1e-4 * std::max(1.0, std::abs(roots[i])))
                group[j] = groups;
        ++groups;
    }
    for (int g = 0; g < groups; ++g) {
        std::vector<size_t> members;
        cplx mean = 0;
        for (size_t i = 0; i < n; ++i)
            if (group[i] == g) {
                members.push_back(i);
                mean += roots[i];
            }
        if (members.size() < 2)
            continue;
        mean /= static_cast<double>(members.size());
        std::vector<double> d = c;
        for (size_t k = 1; k < members.size(); ++k)
            d = derivative_desc(d);
        std::complex<long double> z(mean.real(), mean.imag());
        for (int it = 0; it < 30; ++it) {
            auto dd = dpolyval_desc_ld(d, z);
            if (std::abs(dd) == 0.0L)
                break;
            auto step = polyval_desc_ld(d, z) / dd;
            z -= step;
            if (std::abs(step) <= 1e-18L * std::max(1.0L, std::abs(z)))
                break;
        }
        // keep the merge only if it does not worsen the residual
        long double worst = 0;
        for (size_t i : members)
            worst = std::max(worst, std::abs(polyval_desc_ld(c, {roots[i].real(), roots[i].imag()})));
        if (std::abs(polyval_desc_ld(c, z)) <= worst) {
            if (std::abs(mean.imag()) < 1e-12 * std::max(1.0, std::abs(mean)))
                z.imag(0.0L);
            for (size_t i : members)
                roots[i] = cplx(static_cast<double>(z.real()), static_cast<double>(z.imag()));
        }
    }
}

} // namespace

std::vector<cplx> roots_desc(const std::vector<double>& coeffs_in) {
    // strip leading zeros, count trailing zeros (roots at the origin)
    size_t lead = 0;
    while (lead < coeffs_in.size() && coeffs_in[lead] == 0.0)
        ++lead;
    if (lead == coeffs_in.size())
        throw InvalidArgument("roots_desc: zero polynomial");
    std::vector<double> c(coeffs_in.begin() + static_cast<long>(lead), coeffs_in.end());
    size_t zeros = 0;
    while (c.size() > 1 && c.back() == 0.0) {
        c.pop_back();
        ++zeros;
    }
    const size_t deg = c.size() - 1;
    std::vector<cplx> out;
    if (deg > 0) {
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
        for (size_t j = 0; j < deg; ++j)
            comp(0, static_cast<Eigen::Index>(j)) = -c[j + 1] / c[0];
        for (size_t i = 1; i < deg; ++i)
            comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;

        // Parlett-Reinsch balancing, radix 2
        Eigen::VectorXd scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(deg));
        for (bool done = false; !done;) {
            done = true;
            for (Eigen::Index i = 0; i < comp.rows(); ++i) {
                double r = 0, cn = 0;
                for (Eigen::Index j = 0; j < comp.rows(); ++j)
                    if (j != i) {
                        cn += std::abs(comp(j, i));
                        r += std::abs(comp(i, j));
                    }
                if (cn == 0 || r == 0)
                    continue;
                double f = 1.0;
                const double s = cn + r;
                while (cn < r / 2) {
                    cn *= 2;
                    r /= 2;
                    f *= 2;
                }
                while (cn >= r * 2) {
                    cn /= 2;
                    r *= 2;
                    f /= 2;
                }
                if ((cn + r) / f < 0.95 * s) {
                    done = false;
                    scale(i) *= f;
                    comp.row(i) /= f;
                    comp.col(i) *= f;
                }
            }
        }
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
        if (es.info() != Eigen::Success)
            throw NumericError("roots_desc: eigen-solve failed", 0.0);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            std::complex<long double> z(es.eigenvalues()(i).real(), es.eigenvalues()(i).imag());
            for (int it = 0; it < 8; ++it) {
                auto d = dpolyval_desc_ld(c, z);
                if (std::abs(d) == 0.0L)
                    break;
                auto step = polyval_desc_ld(c, z) / d;
                auto cand = z - step;
                if (std::abs(polyval_desc_ld(c, cand)) >= std::abs(polyval_desc_ld(c, z)))
                    break;
                z = cand;
            }
            out.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
        }
        refine_clusters(c, out);
    }
    for (size_t i = 0; i < zeros; ++i)
        out.emplace_back(0.0, 0.0);
    return out;
}

} // namespace fadrc
