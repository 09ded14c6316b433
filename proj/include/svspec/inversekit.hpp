#ifndef SVSPEC_INVERSEKIT_HPP
#define SVSPEC_INVERSEKIT_HPP

#include <map>

#include "svspec/weylm.hpp"

namespace svspec {

/// Diagonal reference potential with its merged spectrum and channel structure.
struct ReferenceFrame {
    int N = 0;
    std::vector<MatrixPotential> channels;                   ///< scalar potentials v_jj
    MatrixPotential v_diamond = MatrixPotential::zero(1);    ///< assembled diagonal potential
    std::vector<double> v0;                                  ///< channel means

    struct Level {
        double lambda = 0;
        std::vector<int> I;          ///< channels (0-based) owning this eigenvalue
        std::vector<int> chan_index; ///< per entry of I: the shell index n (1-based) in that channel
    };
    std::vector<Level> levels;  ///< ascending
    double d_diamond = 0;       ///< half the minimal spectral gap
    int shells = 0;             ///< eigenvalues computed per channel

    int k_of(int level) const { return static_cast<int>(levels[level].I.size()); }
    /// level index holding the n-th eigenvalue of channel j (both 1-based n, 0-based j)
    int level_of(int n, int j) const;
    std::vector<int> complement(int level) const;  ///< channels outside I(level)
};

struct FrameConfig {
    SpectrumConfig spectrum;
    double coincide_tol = 1e-9;
    double gap_min = 1e-8;  ///< distinct-means precondition
};

ReferenceFrame make_reference(const std::vector<MatrixPotential>& channels, int shells,
                              const FrameConfig& cfg = {});

struct InverseConfig {
    OdeConfig ode;
    double cond_guard = 1e10;   ///< conditioning proxy for "inside the neighborhood"
    int kernel_segments = 4096; ///< quadrature grid for gradient kernels
    double residue_tol = 1e-9;
};

/// Schur-complement isospectrality detector: vanishes exactly when the
/// reference eigenvalue persists in V with its full multiplicity.
Mat tilde_A(const ReferenceFrame& frame, const MatrixPotential& v, int level,
            const InverseConfig& cfg = {});

/// Residue sum over the reference disk; continues B analytically through
/// eigenvalue splittings.
Mat tilde_B(const ReferenceFrame& frame, const MatrixPotential& v, int level,
            const InverseConfig& cfg = {});

/// Unique factorization B~ = (p* + q* E) C (p + E* q); returns (C, E).
std::pair<Mat, Mat> factor_CE(const ReferenceFrame& frame, const Mat& b_tilde, int level,
                              const InverseConfig& cfg = {});

struct ModifiedShellData {
    std::vector<double> a;   ///< 2 pi^2 n^2 A~_{n,j}
    std::vector<double> c;   ///< sqrt(C_{n,j} / 2 pi^2 n^2)
    std::vector<Mat> e;      ///< e_j + E_{n,j} e_j, unit j-th component
    Mat y, u, s;             ///< Y_n = U_n S_n polar factors
    Mat phi2_log_u;          ///< -i log U_n
    Mat phi2_s;              ///< 2 pi n (S_n - I)
};

ModifiedShellData modified_shell(const ReferenceFrame& frame, const MatrixPotential& v, int n,
                                 const InverseConfig& cfg = {});

/// Sampled Frechet-derivative kernel for one matrix entry, built from the
/// chi solutions of the two scalar channels at the level eigenvalue.
struct GradientKernel {
    int level = 0;
    int j = 0, k = 0;           ///< channel pair (0-based)
    bool shared = false;        ///< true: lambda in both channel spectra; carries u and u_tilde
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> u_tilde;  ///< only when shared
};

GradientKernel gradient_kernels(const ReferenceFrame& frame, int level, int j, int k,
                                const InverseConfig& cfg = {});

struct LevelDerivatives {
    Mat dA, dC, dE;
};
struct ShellDerivatives {
    Mat dY, dS, dU;
};

/// Precomputes kernels once and applies them to many directions W.
class FrechetOperator {
public:
    FrechetOperator(const ReferenceFrame& frame, std::vector<int> levels, std::vector<int> shells,
                    const InverseConfig& cfg = {});
    LevelDerivatives level_derivative(int level, const MatrixPotential& w) const;
    ShellDerivatives shell_derivative(int n, const MatrixPotential& w) const;

private:
    const ReferenceFrame& frame_;
    InverseConfig cfg_;
    std::vector<int> levels_, shells_;
    std::map<std::pair<int, std::pair<int, int>>, GradientKernel> kernels_;
    void require_mean_zero(const MatrixPotential& w) const;
    cplx inner_entry(const std::vector<double>& u, const MatrixPotential& w, int row, int col) const;
};

/// Evaluates both sides of the chi/phi product identity underlying the
/// biorthogonal family, including the coincident-level limit variants.
/// Returns the absolute gap.
double biortho_identity_check(const ReferenceFrame& frame, int alpha, int beta, int j, int k,
                              const InverseConfig& cfg = {});

struct ForbiddenSubspace {
    Mat basis;              ///< orthonormal basis of F_beta = [S_beta(E_beta)]^perp
    double cross_angle = 0; ///< principal angle against the xi-route computation
};

ForbiddenSubspace forbidden_subspace(const MatrixPotential& v, const EigenRecord& rec,
                                     const InverseConfig& cfg = {});

struct CondCResult {
    Mat t;            ///< Nm x Nm Hermitian block-Hankel matrix
    bool holds = false;
    double min_eig = 0;
    std::vector<double> lambdas;  ///< exceptional eigenvalues, order of A
    std::vector<Mat> f_at;        ///< F(lambda_alpha) diagonal matrices
};

/// Data for the finite condition-(C) criterion: per channel the retained
/// unperturbed eigenvalues (coordinate projectors), plus the exceptional
/// eigenvalue/projector pairs replacing N m of them.
struct CondCInput {
    std::vector<double> v0;                     ///< channel means (model tails)
    std::vector<std::vector<double>> retained;  ///< per channel, ascending
    std::vector<double> exc_lambda;
    std::vector<Mat> exc_proj;  ///< Hermitian projectors, total rank N m
};

CondCResult condition_C_finite(const CondCInput& in, double pd_tol = 1e-10);

/// Builds the criterion input from a reference frame: levels in `a_levels`
/// become exceptional with the given replacement projectors.
CondCInput condc_input_from_frame(const ReferenceFrame& frame, const std::vector<int>& a_levels,
                                  const std::vector<Mat>& p_repl);

}  // namespace svspec

#endif
