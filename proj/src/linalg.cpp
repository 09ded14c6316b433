#include "svspec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace svspec {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::diag(const std::vector<double>& d) {
    Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return m;
}

Mat Mat::diag(const std::vector<cplx>& d) {
    Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return m;
}

Mat Mat::operator+(const Mat& o) const {
    assert(r_ == o.r_ && c_ == o.c_);
    Mat m(r_, c_);
    for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] + o.a_[i];
    return m;
}

Mat Mat::operator-(const Mat& o) const {
    assert(r_ == o.r_ && c_ == o.c_);
    Mat m(r_, c_);
    for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] - o.a_[i];
    return m;
}

Mat Mat::operator*(const Mat& o) const {
    assert(c_ == o.r_);
    Mat m(r_, o.c_);
    for (int i = 0; i < r_; ++i)
        for (int k = 0; k < c_; ++k) {
            cplx aik = (*this)(i, k);
            if (aik == cplx(0, 0)) continue;
            for (int j = 0; j < o.c_; ++j) m(i, j) += aik * o(k, j);
        }
    return m;
}

Mat Mat::operator*(cplx s) const {
    Mat m(r_, c_);
    for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] * s;
    return m;
}

Mat& Mat::operator+=(const Mat& o) {
    assert(r_ == o.r_ && c_ == o.c_);
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    assert(r_ == o.r_ && c_ == o.c_);
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

Mat Mat::adjoint() const {
    Mat m(c_, r_);
    for (int i = 0; i < r_; ++i)
        for (int j = 0; j < c_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
}

Mat Mat::transpose() const {
    Mat m(c_, r_);
    for (int i = 0; i < r_; ++i)
        for (int j = 0; j < c_; ++j) m(j, i) = (*this)(i, j);
    return m;
}

Mat Mat::conj() const {
    Mat m(r_, c_);
    for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = std::conj(a_[i]);
    return m;
}

Mat Mat::block(int i0, int j0, int nr, int nc) const {
    assert(i0 >= 0 && j0 >= 0 && i0 + nr <= r_ && j0 + nc <= c_);
    Mat m(nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) m(i, j) = (*this)(i0 + i, j0 + j);
    return m;
}

void Mat::set_block(int i0, int j0, const Mat& b) {
    assert(i0 + b.rows() <= r_ && j0 + b.cols() <= c_);
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) (*this)(i0 + i, j0 + j) = b(i, j);
}

double Mat::fro() const {
    double s = 0;
    for (const cplx& z : a_) s += std::norm(z);
    return std::sqrt(s);
}

double Mat::max_abs() const {
    double s = 0;
    for (const cplx& z : a_) s = std::max(s, std::abs(z));
    return s;
}

cplx Mat::trace() const {
    cplx t = 0;
    for (int i = 0; i < std::min(r_, c_); ++i) t += (*this)(i, i);
    return t;
}

bool Mat::is_hermitian(double tol, double* worst) const {
    if (r_ != c_) return false;
    double w = 0;
    for (int i = 0; i < r_; ++i)
        for (int j = i; j < c_; ++j)
            w = std::max(w, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    if (worst) *worst = w;
    return w <= tol;
}

// ---------------------------------------------------------------------------
// LU with partial pivoting

namespace {
struct Lu {
    Mat lu;
    std::vector<int> piv;
    int sign = 1;
    bool singular = false;
};

Lu lu_factor(const Mat& a) {
    assert(a.rows() == a.cols());
    int n = a.rows();
    Lu f{a, std::vector<int>(n), 1, false};
    std::iota(f.piv.begin(), f.piv.end(), 0);
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(f.lu(k, k));
        for (int i = k + 1; i < n; ++i) {
            double v = std::abs(f.lu(i, k));
            if (v > best) { best = v; p = i; }
        }
        if (best == 0.0) { f.singular = true; continue; }
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(f.lu(p, j), f.lu(k, j));
            std::swap(f.piv[p], f.piv[k]);
            f.sign = -f.sign;
        }
        for (int i = k + 1; i < n; ++i) {
            cplx m = f.lu(i, k) / f.lu(k, k);
            f.lu(i, k) = m;
            for (int j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
        }
    }
    return f;
}
}  // namespace

Mat solve(const Mat& a, const Mat& rhs) {
    assert(a.rows() == rhs.rows());
    Lu f = lu_factor(a);
    if (f.singular) fail(ErrorCode::Internal, "singular matrix in solve()");
    int n = a.rows(), m = rhs.cols();
    Mat x(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) x(i, j) = rhs(f.piv[i], j);
    for (int k = 0; k < n; ++k)
        for (int i = k + 1; i < n; ++i)
            for (int j = 0; j < m; ++j) x(i, j) -= f.lu(i, k) * x(k, j);
    for (int k = n - 1; k >= 0; --k) {
        for (int j = 0; j < m; ++j) x(k, j) /= f.lu(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < m; ++j) x(i, j) -= f.lu(i, k) * x(k, j);
    }
    return x;
}

Mat inverse(const Mat& a) { return solve(a, Mat::identity(a.rows())); }

cplx det(const Mat& a) {
    Lu f = lu_factor(a);
    if (f.singular) return 0.0;
    cplx d = static_cast<double>(f.sign);
    for (int i = 0; i < a.rows(); ++i) d *= f.lu(i, i);
    return d;
}

// ---------------------------------------------------------------------------
// Hermitian Jacobi eigensolver

HermEig herm_eig(const Mat& a_in) {
    assert(a_in.rows() == a_in.cols());
    int n = a_in.rows();
    Mat a = a_in.hermitize();
    Mat v = Mat::identity(n);
    double scale = a.fro();
    if (scale == 0) scale = 1;
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (std::sqrt(off) <= 1e-15 * scale) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                cplx apq = a(p, q);
                double abeta = std::abs(apq);
                if (abeta <= 1e-300) continue;
                cplx phase = apq / abeta;  // a_pq = |a_pq| * phase
                double app = a(p, p).real(), aqq = a(q, q).real();
                double tau = (app - aqq) / (2 * abeta);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
                double c = 1 / std::sqrt(1 + t * t);
                double s = t * c;
                // unitary J: J(p,p)=c, J(p,q)=-s e^{i phi}, J(q,p)=s e^{-i phi},
                // J(q,q)=c, zeroing (J^* A J)(p,q)
                for (int i = 0; i < n; ++i) {  // A <- A J
                    cplx aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip + s * std::conj(phase) * aiq;
                    a(i, q) = -s * phase * aip + c * aiq;
                }
                for (int j = 0; j < n; ++j) {  // A <- J^* A
                    cplx apj = a(p, j), aqj = a(q, j);
                    a(p, j) = c * apj + s * phase * aqj;
                    a(q, j) = -s * std::conj(phase) * apj + c * aqj;
                }
                for (int i = 0; i < n; ++i) {  // V <- V J
                    cplx vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip + s * std::conj(phase) * viq;
                    v(i, q) = -s * phase * vip + c * viq;
                }
            }
        }
    }
    HermEig res;
    res.values.resize(n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return d[x] < d[y]; });
    res.vectors = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        res.values[j] = d[order[j]];
        for (int i = 0; i < n; ++i) res.vectors(i, j) = v(i, order[j]);
    }
    return res;
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD

Svd svd(const Mat& a_in) {
    bool transposed = a_in.rows() < a_in.cols();
    Mat a = transposed ? a_in.adjoint() : a_in;  // rows >= cols
    int m = a.rows(), n = a.cols();
    Mat v = Mat::identity(n);
    double scale = a.fro();
    auto coldot = [&](int p, int q) {  // <col_q, col_p> = col_p^* col_q
        cplx s = 0;
        for (int i = 0; i < m; ++i) s += std::conj(a(i, p)) * a(i, q);
        return s;
    };
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                cplx cpq = coldot(p, q);
                double app = 0, aqq = 0;
                for (int i = 0; i < m; ++i) { app += std::norm(a(i, p)); aqq += std::norm(a(i, q)); }
                double abeta = std::abs(cpq);
                if (abeta <= 1e-30 * scale * scale || abeta * abeta <= 1e-60) continue;
                if (abeta <= 1e-16 * std::sqrt(app * aqq) + 1e-300) continue;
                rotated = true;
                cplx phase = cpq / abeta;
                double tau = (app - aqq) / (2 * abeta);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
                double c = 1 / std::sqrt(1 + t * t);
                double s = t * c;
                // gram G = A^* A receives J^* G J with the same J as in herm_eig
                for (int i = 0; i < m; ++i) {
                    cplx aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip + s * std::conj(phase) * aiq;
                    a(i, q) = -s * phase * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    cplx vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip + s * std::conj(phase) * viq;
                    v(i, q) = -s * phase * vip + c * viq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sig(n);
    for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int i = 0; i < m; ++i) s += std::norm(a(i, j));
        sig[j] = std::sqrt(s);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return sig[x] > sig[y]; });

    Mat u(m, m);
    Mat vs(n, n);
    std::vector<double> sigma(n);
    for (int j = 0; j < n; ++j) {
        int o = order[j];
        sigma[j] = sig[o];
        for (int i = 0; i < n; ++i) vs(i, j) = v(i, o);
        if (sig[o] > 0) {
            for (int i = 0; i < m; ++i) u(i, j) = a(i, o) / sig[o];
        }
    }
    // complete U to a unitary basis (rank-deficient or rectangular cases)
    int have = 0;
    for (int j = 0; j < n; ++j)
        if (sigma[j] > 1e-14 * (sigma.empty() ? 1.0 : sigma[0]) && sigma[j] > 0) have = j + 1;
    for (int j = have; j < m; ++j) {
        // find a canonical vector with large residual against current columns
        Mat best(m, 1);
        double bestn = -1;
        for (int e = 0; e < m; ++e) {
            Mat cand(m, 1);
            cand(e, 0) = 1;
            for (int k = 0; k < j; ++k) {
                cplx proj = 0;
                for (int i = 0; i < m; ++i) proj += std::conj(u(i, k)) * cand(i, 0);
                for (int i = 0; i < m; ++i) cand(i, 0) -= proj * u(i, k);
            }
            double nn = cand.fro();
            if (nn > bestn) { bestn = nn; best = cand; }
        }
        // re-orthogonalize once for stability
        for (int k = 0; k < j; ++k) {
            cplx proj = 0;
            for (int i = 0; i < m; ++i) proj += std::conj(u(i, k)) * best(i, 0);
            for (int i = 0; i < m; ++i) best(i, 0) -= proj * u(i, k);
        }
        double nn = best.fro();
        for (int i = 0; i < m; ++i) u(i, j) = best(i, 0) / nn;
    }
    Svd out;
    if (!transposed) {
        out.u = u;
        out.v = vs;
        out.sigma = std::move(sigma);
    } else {
        out.u = vs;
        out.v = u;
        out.sigma = std::move(sigma);
    }
    return out;
}

double op_norm(const Mat& a) {
    if (a.empty()) return 0;
    Svd s = svd(a);
    return s.sigma.empty() ? 0 : s.sigma.front();
}

double cond_number(const Mat& a) {
    Svd s = svd(a);
    if (s.sigma.empty() || s.sigma.back() == 0) return std::numeric_limits<double>::infinity();
    return s.sigma.front() / s.sigma.back();
}

Mat herm_sqrt(const Mat& a) {
    HermEig e = herm_eig(a);
    int n = a.rows();
    Mat d(n, n);
    for (int i = 0; i < n; ++i) {
        double v = e.values[i];
        if (v < 0) v = 0;  // clip roundoff
        d(i, i) = std::sqrt(v);
    }
    return e.vectors * d * e.vectors.adjoint();
}

Mat unitary_log(const Mat& u) {
    int n = u.rows();
    Mat x = u - Mat::identity(n);
    double nx = op_norm(x);
    if (nx >= 1.0) fail(ErrorCode::LogDivergent, "||U - I|| >= 1, log series diverges");
    Mat term = x;
    Mat acc = x;
    for (int k = 2; k <= 400; ++k) {
        term = term * x;
        Mat add = term * (((k % 2 == 0) ? -1.0 : 1.0) / k);
        acc += add;
        if (add.max_abs() < 1e-16 * (1 + acc.max_abs())) break;
    }
    return acc;
}

Polar polar_decompose(const Mat& y) {
    Mat s = herm_sqrt(y.adjoint() * y);
    Mat u = y * inverse(s);
    return Polar{u, s};
}

double max_principal_angle(const Mat& a, const Mat& b) {
    Mat qa = orthonormal_range(a);
    Mat qb = orthonormal_range(b);
    if (qa.cols() != qb.cols())
        return PI / 2;  // different dimensions: treat as maximally apart
    if (qa.cols() == 0) return 0;
    Svd s = svd(qa.adjoint() * qb);
    double cmin = 1;
    for (double sv : s.sigma) cmin = std::min(cmin, sv);
    cmin = std::min(1.0, std::max(-1.0, cmin));
    return std::acos(cmin);
}

Mat orthonormal_range(const Mat& a, double rel_tol) {
    if (a.cols() == 0) return Mat(a.rows(), 0);
    Svd s = svd(a);
    int rank = 0;
    for (double sv : s.sigma)
        if (sv > rel_tol * (s.sigma.empty() ? 1.0 : s.sigma[0])) ++rank;
    return s.u.block(0, 0, a.rows(), rank);
}

Mat orthonormal_complement(const Mat& a, double rel_tol) {
    int m = a.rows();
    if (a.cols() == 0) return Mat::identity(m);
    Svd s = svd(a);
    int rank = 0;
    for (double sv : s.sigma)
        if (sv > rel_tol * (s.sigma.empty() ? 1.0 : s.sigma[0])) ++rank;
    return s.u.block(0, rank, m, m - rank);
}

}  // namespace svspec
