#ifndef SVSPEC_MATODE_HPP
#define SVSPEC_MATODE_HPP

#include <optional>

#include "svspec/potential.hpp"

namespace svspec {

struct OdeConfig {
    double rel_tol = 1e-10;
    double max_step_factor = 0.5;  ///< step bound h <= c / max(1, sqrt(|lambda|))
    long max_steps = 2000000;
};

struct SolveWant {
    bool lambda_derivs = false;
    bool second_lambda_deriv = false;  ///< needed by the xi kernels (chi-double-dot)
    bool gram = false;                 ///< int_0^1 phi^* phi dx, real lambda only
};

/// Endpoint data of the fundamental solutions at one lambda.
/// phi solves -y'' + V y = lambda y with phi(0)=0, phi'(0)=I (values taken at x=1);
/// chi is normalized at the right end, chi(1)=0, chi'(1)=-I (values taken at x=0).
struct SolutionBundle {
    cplx lambda;
    Mat phi1, dphi1;
    Mat chi0, dchi0;
    Mat phi1_dot, dphi1_dot;    // d/dlambda
    Mat chi0_dot, dchi0_dot;
    Mat phi1_ddot, chi0_ddot;   // d^2/dlambda^2 (only if requested)
    Mat gram;                   // S(lambda)
    double est_error = 0;
};

/// Which endpoint passes to run; contour scans need only the chi data.
enum class Pass { Both, PhiOnly, ChiOnly };

SolutionBundle solve_bundle(const MatrixPotential& v, cplx lambda, const OdeConfig& cfg = {},
                            const SolveWant& want = {}, Pass pass = Pass::Both);

enum class Direction { Phi, Chi };

/// Solution recorded on a uniform grid of `segments`+1 nodes, including the
/// x-derivative and (optionally) lambda-derivative states at every node.
struct GridSolution {
    cplx lambda;
    std::vector<double> t;
    std::vector<Mat> y, yp;          // value and x-derivative
    std::vector<Mat> yd, ydp;        // lambda-derivative states
    std::vector<Mat> ydd, yddp;      // second lambda-derivative states
    double est_error = 0;
};

GridSolution solve_on_grid(const MatrixPotential& v, cplx lambda, Direction dir, int segments,
                           const OdeConfig& cfg = {}, const SolveWant& want = {});

/// Two explicit terms of the large-|z| expansion of phi(1, z^2):
/// sin(z)/z I + z^{-2} int_0^1 sin z(1-t) V(t) sin(zt) dt.
Mat free_solution_asymptote(const MatrixPotential& v, cplx z);

}  // namespace svspec

#endif
