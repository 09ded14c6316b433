#ifndef SVSPEC_SPECTRUM_HPP
#define SVSPEC_SPECTRUM_HPP

#include "svspec/matode.hpp"

namespace svspec {

/// Closed zero-counting contour for det chi(0, . , V) in the lambda plane.
struct CountingContour {
    enum class Shape { Disk, Rectangle };
    Shape shape = Shape::Disk;
    cplx center;                       // disk
    double radius = 1;                 // disk
    double re_lo = 0, re_hi = 1;       // rectangle
    double im_lo = -1, im_hi = 1;      // rectangle
    int nodes = 64;

    static CountingContour disk(cplx center, double radius, int nodes = 64);
    static CountingContour rect(double re_lo, double re_hi, double im_lo, double im_hi,
                                int nodes = 64);
};

struct SpectrumConfig {
    OdeConfig ode;
    double sv_threshold = 1e-7;    ///< relative SVD threshold for kernel detection
    double det_floor_rel = 1e-10;  ///< relative floor of |det| along contours
    int max_contour_nodes = 16384;
    double newton_tol = 1e-12;     ///< relative step tolerance in root refinement
};

struct EigenLocation {
    double lambda = 0;
    int multiplicity = 1;
    bool certified_count = false;
    double residual = 0;  ///< smallest singular value of phi(1, lambda)
};

/// Winding number of det chi(0, . , V) along the contour (number of enclosed
/// eigenvalues, with multiplicities).
int count_zeros(const MatrixPotential& v, const CountingContour& c, const SpectrumConfig& cfg = {});

/// All Dirichlet eigenvalues up to lambda_max with certified window counts.
std::vector<EigenLocation> locate_all(const MatrixPotential& v, double lambda_max,
                                      const SpectrumConfig& cfg = {});

/// Kernel dimension and orthonormal kernel basis of phi(1, lambda).
std::pair<int, Mat> multiplicity(const MatrixPotential& v, double lambda,
                                 const SpectrumConfig& cfg = {});

}  // namespace svspec

#endif
