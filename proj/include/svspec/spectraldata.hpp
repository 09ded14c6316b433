#ifndef SVSPEC_SPECTRALDATA_HPP
#define SVSPEC_SPECTRALDATA_HPP

#include <optional>

#include "svspec/spectrum.hpp"

namespace svspec {

/// One spectral datum: eigenvalue, kernel basis, projector, normalizing matrix
/// and residue B = h g^{-1} h^*.
struct EigenRecord {
    double lambda = 0;
    int k = 1;
    Mat h;  // N x k orthonormal kernel basis of phi(1, lambda)
    Mat P;  // h h^*
    Mat g;  // k x k Hermitian positive
    Mat B;  // N x N Hermitian, rank k
    std::optional<std::pair<int, int>> index;  // (n, j), j in 1..N, for alpha > alpha_diamond
};

struct SpectralDataset {
    int N = 0;
    std::vector<double> v0;
    int n_diamond = 1;
    int alpha_diamond = 0;  // number of records before the double-indexed range
    std::vector<EigenRecord> records;

    const EigenRecord& at(int n, int j) const;  // j in 1..N
    int max_shell() const;
};

/// Condition-(B) tail sequences and their decay diagnostics.
struct TailDiagnostics {
    std::vector<int> shells;
    // per shell: max over j of |lambda_{n,j} - pi^2 n^2 - v_j|, etc.
    std::vector<double> a_seq, b_seq, c_seq, d_seq;
    double a_slope = 0, c_slope = 0;
    double b_cauchy = 0, d_cauchy = 0;  // relative growth of partial l2 sums over the last half
    bool a_pass = false, b_pass = false, c_pass = false, d_pass = false;
    bool pass() const { return a_pass && b_pass && c_pass && d_pass; }
};

struct EquivalenceReport {
    std::vector<int> shells;
    std::vector<double> sum_proj_err;   // ||sum_j P_{n,j} - I||
    std::vector<double> cross_inner;    // max_{j!=k} |<h_j, h_k>|
    std::vector<double> bn_err;         // ||B_n - 2 pi^2 n^2 I||
    std::vector<double> hn_gram_err;    // ||H_n^* H_n - 2 pi^2 n^2 I||
    double ratio_lo = 1, ratio_hi = 1;  // observed range of sum_proj_err / cross_inner
    bool bounded = true;                // ratios within [1/C, C]
};

struct BnAsymptoteReport {
    std::vector<int> n_list;
    std::vector<double> r;  // remainder norms
    double exponent = 0;    // fitted slope of log r vs log n
    bool pass = false;      // exponent <= -1.8
};

EigenRecord build_record(const MatrixPotential& v, const EigenLocation& loc,
                         const SpectrumConfig& cfg = {});

/// -(1/2 pi i) * contour integral of M over |lambda - center| = radius.
Mat residue_via_contour(const MatrixPotential& v, double center, double radius,
                        const OdeConfig& ode = {}, double tol = 1e-9);

/// Full dataset in the mean-diagonalized frame (v0 strictly increasing).
SpectralDataset assemble_dataset(const MatrixPotential& v, const std::vector<double>& v0,
                                 double lambda_max, const SpectrumConfig& cfg = {});

TailDiagnostics check_condition_B(const SpectralDataset& ds);
EquivalenceReport projector_equivalence(const SpectralDataset& ds);
BnAsymptoteReport check_Bn_asymptote(const MatrixPotential& v, const SpectralDataset& ds,
                                     const std::vector<int>& n_list);

/// Least-squares slope of log|y| against log x (pairs with y below `floor` are
/// skipped; returns 0 and sets *all_tiny when nothing remains).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                    double floor = 1e-11, bool* all_tiny = nullptr);

}  // namespace svspec

#endif
