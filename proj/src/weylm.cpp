#include "svspec/weylm.hpp"

#include <cmath>
#include <limits>

namespace svspec {

WeylEvaluation evaluate_M(const MatrixPotential& v, cplx lambda, const OdeConfig& ode) {
    SolutionBundle b = solve_bundle(v, lambda, ode, SolveWant{}, Pass::ChiOnly);
    WeylEvaluation w;
    w.lambda = lambda;
    // effective conditioning: smallest singular value against the free-solution
    // magnitude 1/|z|, so the guard works for N = 1 as well
    Svd s = svd(b.chi0);
    double scale = std::max(s.sigma.front(), 1.0 / std::max(1.0, std::sqrt(std::abs(lambda))));
    w.cond = s.sigma.back() > 0 ? scale / s.sigma.back() : std::numeric_limits<double>::infinity();
    if (w.cond > 1e9)
        fail(ErrorCode::NearPole, "chi(0,lambda) nearly singular; lambda close to an eigenvalue");
    w.m = b.dchi0 * inverse(b.chi0);
    return w;
}

cplx sqrt_cot(cplx mu) {
    if (std::abs(mu) < 1e-4) {
        // sqrt(mu) cot sqrt(mu) = 1 - mu/3 - mu^2/45 - 2 mu^3/945 - mu^4/4725 - ...
        cplx m2 = mu * mu;
        return 1.0 - mu / 3.0 - m2 / 45.0 - 2.0 * mu * m2 / 945.0 - m2 * m2 / 4725.0;
    }
    cplx s = std::sqrt(mu);
    // cot s stable against overflow of e^{|Im s|}
    if (s.imag() >= 0) {
        cplx e = std::exp(cplx(0, 2) * s);
        return s * cplx(0, 1) * (e + 1.0) / (e - 1.0);
    }
    cplx e = std::exp(cplx(0, -2) * s);
    return s * cplx(0, 1) * (1.0 + e) / (1.0 - e);
}

SeriesResult reconstruct_M(const SpectralDataset& ds, cplx lambda, const SeriesConfig& cfg) {
    int nch = ds.N;
    int avail = ds.max_shell();
    int nmax = std::min(cfg.n_max, avail);
    if (cfg.n_max < ds.n_diamond + 10)
        fail(ErrorCode::InsufficientShells, "n_max must be at least n_diamond + 10");
    if (nmax < cfg.n_max && !cfg.estimate_tail)
        fail(ErrorCode::InsufficientShells, "dataset holds fewer shells than requested");

    Mat acc = Mat::zeros(nch, nch);
    // finite part: low multiplets and their counter-terms
    for (int a = 0; a < ds.alpha_diamond; ++a) {
        const EigenRecord& r = ds.records[a];
        acc += r.B * (1.0 / (r.lambda - lambda));
    }
    for (int n = 1; n < ds.n_diamond; ++n)
        for (int j = 0; j < nch; ++j) {
            Mat pj = Mat::zeros(nch, nch);
            pj(j, j) = 1;
            acc -= pj * (2 * PI2 * n * n / (PI2 * n * n + ds.v0[j] - lambda));
        }
    // paired shell series, summed in increasing n with the pairing intact
    Mat last_pair = Mat::zeros(nch, nch);
    for (int n = ds.n_diamond; n <= nmax; ++n) {
        Mat pair = Mat::zeros(nch, nch);
        for (int j = 1; j <= nch; ++j) {
            const EigenRecord& r = ds.at(n, j);
            pair += r.B * (1.0 / (r.lambda - lambda));
            Mat pj = Mat::zeros(nch, nch);
            pj(j - 1, j - 1) = 1;
            pair -= pj * (2 * PI2 * n * n / (PI2 * n * n + ds.v0[j - 1] - lambda));
        }
        acc += pair;
        last_pair = pair;
    }
    // cotangent counter-terms of the left side
    for (int j = 0; j < nch; ++j) {
        Mat pj = Mat::zeros(nch, nch);
        pj(j, j) = 1;
        acc -= pj * sqrt_cot(lambda - ds.v0[j]);
    }

    SeriesResult out;
    out.m = acc;
    if (cfg.estimate_tail) {
        // remainder bounded by the last shell magnitude times sum over the
        // remaining 1 / |n^2 - lambda / pi^2|
        double mag = last_pair.max_abs() * nmax;
        double s = 0;
        cplx lp = lambda / PI2;
        for (int n = nmax + 1; n <= nmax + 100000; ++n) {
            double term = 1.0 / std::abs(static_cast<double>(n) * n - lp);
            s += term;
            if (term < 1e-18) break;
        }
        out.tail_estimate = mag * s;
        if (cfg.tail_tol > 0 && out.tail_estimate > cfg.tail_tol)
            fail(ErrorCode::TailTooLarge, "estimated truncation error above requested tolerance");
    }
    return out;
}

cplx scalar_m(const SpectralDataset& ds, cplx lambda, const SeriesConfig& cfg) {
    if (ds.N != 1) fail(ErrorCode::BadKind, "scalar_m needs an N=1 dataset");
    return reconstruct_M(ds, lambda, cfg).m(0, 0);
}

}  // namespace svspec
