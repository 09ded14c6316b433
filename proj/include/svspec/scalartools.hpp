#ifndef SVSPEC_SCALARTOOLS_HPP
#define SVSPEC_SCALARTOOLS_HPP

#include "svspec/matode.hpp"

namespace svspec {

/// Scalar (N=1) spectral data in the three classical parametrizations.
/// Sequences are 1-based in the math; stored 0-based (entry 0 = n=1).
struct ScalarSpectra {
    std::vector<double> dirichlet;  ///< lambda_n
    std::vector<double> mixed;      ///< mu_n of y(0)=y'(1)=0, optional
    std::vector<double> alpha;      ///< normalizing constants, optional
    std::vector<double> nu;         ///< norming constants, optional

    void validate() const;  ///< monotonicity, interlacing, positivity
};

enum class ScalarParam { Mu, Alpha, Nu };

struct HadamardEval {
    double f = 0;  ///< phi(1, lambda) from the Dirichlet product
    double g = 0;  ///< phi'(1, lambda) from the mixed product
};

/// Truncated canonical products with a model tail (lambda_m ~ pi^2 m^2 + q0).
HadamardEval hadamard_products(const ScalarSpectra& s, double lambda);

/// d/dlambda phi(1, .) at the n-th Dirichlet eigenvalue (n is 1-based).
double f_dot_at(const ScalarSpectra& s, int n);

/// phi(1, lambda) with the n-th factor removed (used by f_dot_at and mu search).
double hadamard_f(const ScalarSpectra& s, double lambda);

ScalarSpectra convert(const ScalarSpectra& s, ScalarParam from, ScalarParam to);

struct ScalarCharacterization {
    double q0 = 0;
    double lambda_slope = 0;   ///< log-log decay of lambda_n - pi^2 n^2 - q0
    double alpha_cauchy = 0;   ///< tail growth of the weighted alpha sequence
    bool monotone = true;
    bool pass = false;
};

ScalarCharacterization check_scalar_characterization(const ScalarSpectra& s);

enum class HilbertKind { HalfShifted, FullInteger };

/// Dense split-form discrete Hilbert transforms of Lemma-type B.2.
std::vector<double> discrete_hilbert(const std::vector<double>& a, HilbertKind kind,
                                     std::size_t out_len);

/// Mixed spectrum (y(0) = y'(1) = 0) of a scalar potential via the ODE solver;
/// wiring helper for building ScalarSpectra from a potential.
std::vector<double> mixed_spectrum(const MatrixPotential& q, int count, const OdeConfig& ode = {});

double estimate_q0(const std::vector<double>& dirichlet);

}  // namespace svspec

#endif
