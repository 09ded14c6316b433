#ifndef SVSPEC_LINALG_HPP
#define SVSPEC_LINALG_HPP

#include <cassert>
#include <initializer_list>
#include <vector>

#include "svspec/common.hpp"

namespace svspec {

/// Dense complex matrix, row-major. Dimensions here are tiny (N <= 8), so all
/// algorithms favour robustness over speed.
class Mat {
public:
    Mat() : r_(0), c_(0) {}
    Mat(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<size_t>(rows) * cols) {}
    Mat(int rows, int cols, std::initializer_list<cplx> vals) : Mat(rows, cols) {
        assert(static_cast<int>(vals.size()) == rows * cols);
        std::copy(vals.begin(), vals.end(), a_.begin());
    }

    static Mat identity(int n);
    static Mat zeros(int rows, int cols) { return Mat(rows, cols); }
    static Mat diag(const std::vector<double>& d);
    static Mat diag(const std::vector<cplx>& d);

    int rows() const { return r_; }
    int cols() const { return c_; }
    bool empty() const { return a_.empty(); }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * c_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * c_ + j]; }
    cplx* data() { return a_.data(); }
    const cplx* data() const { return a_.data(); }

    Mat operator+(const Mat& o) const;
    Mat operator-(const Mat& o) const;
    Mat operator*(const Mat& o) const;
    Mat operator*(cplx s) const;
    Mat operator*(double s) const { return (*this) * cplx(s, 0); }
    Mat operator-() const { return (*this) * cplx(-1, 0); }
    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);

    Mat adjoint() const;    ///< conjugate transpose
    Mat transpose() const;
    Mat conj() const;

    Mat block(int i0, int j0, int nr, int nc) const;
    void set_block(int i0, int j0, const Mat& b);
    Mat col(int j) const { return block(0, j, r_, 1); }
    Mat row(int i) const { return block(i, 0, 1, c_); }

    double fro() const;      ///< Frobenius norm
    double max_abs() const;  ///< max entry modulus
    cplx trace() const;

    bool is_hermitian(double tol, double* worst = nullptr) const;
    Mat hermitize() const { return ((*this) + adjoint()) * 0.5; }

private:
    int r_, c_;
    std::vector<cplx> a_;
};

inline Mat operator*(cplx s, const Mat& m) { return m * s; }
inline Mat operator*(double s, const Mat& m) { return m * cplx(s, 0); }

/// LU with partial pivoting. Throws Error(Internal) on exactly singular input.
Mat solve(const Mat& a, const Mat& rhs);
Mat inverse(const Mat& a);
cplx det(const Mat& a);

struct HermEig {
    std::vector<double> values;  ///< ascending
    Mat vectors;                 ///< columns are orthonormal eigenvectors
};
/// Cyclic complex Jacobi for Hermitian input (not checked beyond symmetrization).
HermEig herm_eig(const Mat& a);

struct Svd {
    Mat u;                        ///< full square left factor (rows x rows)
    std::vector<double> sigma;    ///< descending, length min(rows, cols)
    Mat v;                        ///< full square right factor (cols x cols)
};
/// One-sided Jacobi SVD; a = u * diag(sigma) * v^*.
Svd svd(const Mat& a);

double op_norm(const Mat& a);                 ///< largest singular value
double cond_number(const Mat& a);             ///< sigma_max / sigma_min (inf if singular)
Mat herm_sqrt(const Mat& a);                  ///< principal sqrt of Hermitian PSD input
Mat unitary_log(const Mat& u);                ///< log via series in (u - I); needs ||u-I|| < 1

struct Polar {
    Mat u;  ///< unitary
    Mat s;  ///< Hermitian positive factor, y = u*s
};
Polar polar_decompose(const Mat& y);

/// Largest principal angle (radians) between the column spans of a and b
/// (columns need not be orthonormal; spans must have equal dimension).
double max_principal_angle(const Mat& a, const Mat& b);

/// Orthonormal basis of the span of the columns of a (rank detected at rel_tol).
Mat orthonormal_range(const Mat& a, double rel_tol = 1e-10);
/// Orthonormal basis of the orthogonal complement of the span of the columns of a.
Mat orthonormal_complement(const Mat& a, double rel_tol = 1e-10);

}  // namespace svspec

#endif
