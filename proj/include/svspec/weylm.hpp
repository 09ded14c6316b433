#ifndef SVSPEC_WEYLM_HPP
#define SVSPEC_WEYLM_HPP

#include "svspec/spectraldata.hpp"

namespace svspec {

struct WeylEvaluation {
    cplx lambda;
    Mat m;
    double cond = 0;  // condition number of chi(0, lambda)
};

struct SeriesConfig {
    int n_max = 200;           ///< shells summed explicitly
    bool estimate_tail = true; ///< attach a remainder estimate
    double tail_tol = 0;       ///< >0: throw TailTooLarge when the estimate exceeds it
};

/// Direct evaluation M = chi' chi^{-1} (0, lambda).
WeylEvaluation evaluate_M(const MatrixPotential& v, cplx lambda, const OdeConfig& ode = {});

/// Entire extension of sqrt(mu) cot sqrt(mu).
cplx sqrt_cot(cplx mu);

struct SeriesResult {
    Mat m;
    double tail_estimate = 0;
};

/// Regularized pole series for M from spectral data (shell pairing intact).
SeriesResult reconstruct_M(const SpectralDataset& ds, cplx lambda, const SeriesConfig& cfg);

/// N=1 specialization.
cplx scalar_m(const SpectralDataset& ds, cplx lambda, const SeriesConfig& cfg);

}  // namespace svspec

#endif
