#ifndef SVSPEC_TESTS_ORACLE_FD_HPP
#define SVSPEC_TESTS_ORACLE_FD_HPP

// Independent eigenvalue oracle: second-order finite-difference discretization
// of -psi'' + V psi on a uniform grid, eigenvalues by inertia-count bisection
// on the block-tridiagonal matrix (no shooting, no contour integrals).

#include <cmath>
#include <vector>

#include "svspec/potential.hpp"

namespace svspec_tests {

using svspec::Mat;
using svspec::MatrixPotential;

// number of eigenvalues of the FD matrix below sigma (Sylvester inertia via
// sequential block LDL*)
inline int fd_inertia(const std::vector<Mat>& diag, double inv_h4, double sigma) {
    int n = diag.front().rows();
    int neg = 0;
    Mat s = diag[0] - Mat::identity(n) * sigma;
    for (size_t i = 0;; ++i) {
        svspec::HermEig e = svspec::herm_eig(s);
        for (double v : e.values)
            if (v < 0) ++neg;
        if (i + 1 == diag.size()) break;
        // guard: exactly singular pivot block -> nudge handled by caller
        s = diag[i + 1] - Mat::identity(n) * sigma - svspec::inverse(s) * inv_h4;
        s = s.hermitize();
    }
    return neg;
}

// first `count` eigenvalues at grid size m (m-1 interior points)
inline std::vector<double> fd_eigenvalues(const MatrixPotential& v, int m, int count) {
    int n = v.dim();
    double h = 1.0 / m;
    std::vector<Mat> diag;
    diag.reserve(m - 1);
    for (int i = 1; i < m; ++i)
        diag.push_back(v.evaluate(static_cast<double>(i) / m) + Mat::identity(n) * (2.0 / (h * h)));
    double inv_h4 = 1.0 / (h * h * h * h);

    double w = v.sup_op_norm();
    std::vector<double> out;
    for (int k = 1; k <= count; ++k) {
        double lo = -w - 1;
        int shell = (k + n - 1) / n;
        double hi = svspec::PI2 * (shell + 1) * (shell + 1) + w + 10;
        for (int it = 0; it < 200 && hi - lo > 1e-11 * std::max(1.0, std::abs(hi)); ++it) {
            double mid = 0.5 * (lo + hi);
            if (fd_inertia(diag, inv_h4, mid) >= k)
                hi = mid;
            else
                lo = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

// Richardson extrapolation over grids m and 2m (second-order stencil)
inline std::vector<double> fd_eigenvalues_richardson(const MatrixPotential& v, int m, int count) {
    std::vector<double> c = fd_eigenvalues(v, m, count);
    std::vector<double> f = fd_eigenvalues(v, 2 * m, count);
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = (4 * f[i] - c[i]) / 3;
    return out;
}

}  // namespace svspec_tests

#endif
