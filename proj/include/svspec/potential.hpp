#ifndef SVSPEC_POTENTIAL_HPP
#define SVSPEC_POTENTIAL_HPP

#include <string>
#include <vector>

#include "svspec/linalg.hpp"

namespace svspec {

constexpr double TOL_HERM = 1e-12;

/// One Fourier harmonic of the potential, V-hat at frequency n.
struct Harmonic {
    int n;
    Mat m;
};

/// Self-adjoint N x N matrix potential on [0,1], stored either as a truncated
/// real-trigonometric series
///     V(x) = V0 + 2 sum_n (Vc_n cos 2 pi n x + Vs_n sin 2 pi n x)
/// or as M+1 uniform grid samples with cubic interpolation.
class MatrixPotential {
public:
    enum class Repr { Fourier, Grid };
    enum class CoefKind { Mean, Cos, Sin, WeightedSin };

    static MatrixPotential zero(int dim);
    static MatrixPotential constant(const Mat& m, bool hermitian = true);
    static MatrixPotential fourier(Mat mean, std::vector<Harmonic> cos_h,
                                   std::vector<Harmonic> sin_h, bool hermitian = true);
    static MatrixPotential grid(std::vector<Mat> samples, bool hermitian = true);
    /// Scalar potential q(x) = q0 + 2 sum (qc_n cos + qs_n sin); harmonics indexed from 1.
    static MatrixPotential scalar_fourier(double mean, const std::vector<double>& cos_coef,
                                          const std::vector<double>& sin_coef);

    int dim() const { return dim_; }
    Repr repr() const { return repr_; }
    bool hermitian() const { return hermitian_; }
    int grid_size() const { return repr_ == Repr::Grid ? static_cast<int>(samples_.size()) - 1 : 0; }

    Mat evaluate(double x) const;
    /// Allocation-free evaluation into a preallocated dim x dim matrix (hot path
    /// of the ODE right-hand side).
    void evaluate_into(double x, Mat& out) const;
    Mat fourier_coefficient(CoefKind kind, int n) const;
    MatrixPotential reflect() const;

    /// U^* V(x) U applied to every stored matrix.
    MatrixPotential conjugated(const Mat& u) const;
    MatrixPotential shifted(double c) const;  ///< V + c I
    MatrixPotential scaled(double s) const;
    /// Sum of two Fourier-representation potentials of equal dimension.
    MatrixPotential plus(const MatrixPotential& w) const;
    /// Extract channel (j,j) as a scalar potential (Fourier repr only).
    MatrixPotential diagonal_channel(int j) const;

    /// sup over a fine grid of the operator norm of V(x).
    double sup_op_norm() const;

    const Mat& mean() const { return mean_; }
    const std::vector<Harmonic>& cos_harmonics() const { return cos_; }
    const std::vector<Harmonic>& sin_harmonics() const { return sin_; }

private:
    MatrixPotential() = default;
    void check_hermitian() const;

    int dim_ = 0;
    Repr repr_ = Repr::Fourier;
    bool hermitian_ = true;
    Mat mean_;
    std::vector<Harmonic> cos_, sin_;
    std::vector<Mat> samples_;  // grid repr: values at i/M, i = 0..M
};

/// Result of the mean-diagonalizing change of basis, Remark 1.2.
struct DiagonalizedPotential {
    MatrixPotential potential = MatrixPotential::zero(1);  ///< U^* V U, mean = diag(v0)
    Mat unitary;
    std::vector<double> v0;  ///< strictly increasing
};

DiagonalizedPotential diagonalize_mean(const MatrixPotential& v, double gap_min = 1e-8);

MatrixPotential load_potential(const std::string& path);
void save_potential(const MatrixPotential& v, const std::string& path);
MatrixPotential potential_from_json_text(const std::string& text);
std::string potential_to_json_text(const MatrixPotential& v);

/// Nodes/weights of the composite Gauss-Legendre rule (panel order `order`,
/// `panels` panels on [a,b]).
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace svspec

#endif
