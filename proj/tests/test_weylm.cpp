#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "svspec/weylm.hpp"

using namespace svspec;

namespace {
cplx free_m(cplx lambda) {  // -sqrt(lambda) cot sqrt(lambda)
    return -sqrt_cot(lambda);
}

MatrixPotential small_trig2() {
    Mat mean(2, 2, {1.0, 0, 0, 2.0});
    Mat mc(2, 2, {0.15, cplx(0.1, 0.05), cplx(0.1, -0.05), -0.1});
    Mat ms(2, 2, {0.05, cplx(0.0, 0.08), cplx(0.0, -0.08), 0.1});
    return MatrixPotential::fourier(mean, {{1, mc}}, {{2, ms}});
}
}  // namespace

TEST_CASE("sqrt_cot basics") {
    // entire across 0
    CHECK(std::abs(sqrt_cot(cplx(0, 0)) - cplx(1, 0)) < 1e-12);
    // negative axis: sqrt(-1) cot(sqrt(-1)) = coth(1)
    CHECK(std::abs(sqrt_cot(cplx(-1, 0)) - cplx(1.0 / std::tanh(1.0), 0)) < 1e-12);
    // series branch matches the closed form just above the switchover scale
    for (cplx mu : {cplx(9.9e-5, 0), cplx(-8e-5, 3e-5)}) {
        cplx s = std::sqrt(mu);
        cplx direct = s * std::cos(s) / std::sin(s);
        CHECK(std::abs(sqrt_cot(mu) - direct) < 1e-13);
    }
    // no overflow at large negative real part
    CHECK(std::isfinite(sqrt_cot(cplx(-4e6, 0)).real()));
}

TEST_CASE("evaluate_M free potential") {
    MatrixPotential z1 = MatrixPotential::zero(1);
    WeylEvaluation w = evaluate_M(z1, -1.0);
    CHECK(std::abs(w.m(0, 0) - cplx(-1.0 / std::tanh(1.0), 0)) < 1e-10);
    CHECK(std::abs(w.m(0, 0).real() + 1.3130) < 1e-4);

    // constant diagonal: M = -diag sqrt(lambda - v_j) cot sqrt(lambda - v_j)
    Mat d(2, 2);
    d(0, 0) = 1;
    d(1, 1) = 4;
    MatrixPotential v = MatrixPotential::constant(d);
    for (cplx lam : {cplx(-3, 0), cplx(17.2, 0.5)}) {
        WeylEvaluation wv = evaluate_M(v, lam);
        CHECK(std::abs(wv.m(0, 0) - (-sqrt_cot(lam - 1.0))) < 1e-9);
        CHECK(std::abs(wv.m(1, 1) - (-sqrt_cot(lam - 4.0))) < 1e-9);
        CHECK(std::abs(wv.m(0, 1)) < 1e-10);
    }

    CHECK_THROWS_WITH_AS(evaluate_M(z1, PI2 + 1e-9), doctest::Contains("NearPole"), Error);
}

TEST_CASE("conjugate symmetry and Herglotz positivity") {
    MatrixPotential v = small_trig2();
    for (cplx lam : {cplx(5, 2), cplx(-3, 1), cplx(40, 4)}) {
        WeylEvaluation a = evaluate_M(v, lam);
        WeylEvaluation b = evaluate_M(v, std::conj(lam));
        CHECK((b.m - a.m.adjoint()).max_abs() < 1e-9);
        // (M - M^*) / (2i) is PSD in the upper half plane
        Mat im = (a.m - a.m.adjoint()) * (cplx(0, -0.5));
        HermEig e = herm_eig(im);
        CHECK(e.values.front() > -1e-8);
    }
}

TEST_CASE("reconstruct_M free scalar: counter-terms cancel exactly") {
    // build the free dataset directly: lambda_n = pi^2 n^2, B_n = 2 pi^2 n^2
    SpectralDataset ds;
    ds.N = 1;
    ds.v0 = {0.0};
    ds.n_diamond = 1;
    ds.alpha_diamond = 0;
    for (int n = 1; n <= 250; ++n) {
        EigenRecord r;
        r.lambda = PI2 * n * n;
        r.k = 1;
        r.h = Mat::identity(1);
        r.P = Mat::identity(1);
        r.g = Mat::identity(1) * (1.0 / (2 * PI2 * n * n));
        r.B = Mat::identity(1) * (2 * PI2 * n * n);
        r.index = std::make_pair(n, 1);
        ds.records.push_back(r);
    }
    SeriesConfig cfg;
    cfg.n_max = 250;
    cplx m5 = scalar_m(ds, -5.0, cfg);
    CHECK(std::abs(m5 - free_m(cplx(-5, 0))) < 1e-12);  // identically zero series
    // residue at lambda_1: alpha_1 = 1/(2 pi^2)
    cplx near = scalar_m(ds, PI2 - 1e-4, cfg);
    CHECK(std::abs(near * cplx(-1e-4, 0) - cplx(-2 * PI2, 0) * cplx(1e-4) / cplx(1e-4)) <
          2 * PI2 * 1e-2);
}

TEST_CASE("reconstruct_M matches evaluate_M for constant diagonal") {
    Mat d(2, 2);
    d(0, 0) = 1;
    d(1, 1) = 2;
    MatrixPotential v = MatrixPotential::constant(d);
    SpectralDataset ds = assemble_dataset(v, {1.0, 2.0}, PI2 * 200.5 * 200.5);
    SeriesConfig cfg;
    cfg.n_max = 200;
    for (cplx lam : {cplx(-3, 0), cplx(5.5, 1.0)}) {
        SeriesResult r = reconstruct_M(ds, lam, cfg);
        WeylEvaluation w = evaluate_M(v, lam);
        CHECK((r.m - w.m).max_abs() < 1e-6);
    }
}

TEST_CASE("reconstruct_M convergence for the trig potential") {
    MatrixPotential v = small_trig2();
    DiagonalizedPotential dg = diagonalize_mean(v);
    SpectralDataset ds = assemble_dataset(dg.potential, dg.v0, PI2 * 120.5 * 120.5);
    cplx lam(10, 0);  // |lambda| = 10, off poles
    WeylEvaluation w = evaluate_M(dg.potential, lam);
    SeriesConfig c60, c120;
    c60.n_max = 60;
    c120.n_max = 120;
    double gap60 = (reconstruct_M(ds, lam, c60).m - w.m).max_abs();
    double gap120 = (reconstruct_M(ds, lam, c120).m - w.m).max_abs();
    CHECK(gap60 < 2e-3);
    // tail decays like 1/n_max: doubling halves the gap (within tolerance)
    CHECK(gap120 / gap60 > 0.35);
    CHECK(gap120 / gap60 < 0.65);
    // pole/residue consistency: (lambda - lambda_a) M -> -B_a
    const EigenRecord& r0 = ds.records[0];
    double eps = 1e-5 * std::max(1.0, r0.lambda);
    SeriesConfig cr;
    cr.n_max = 120;
    Mat approx = reconstruct_M(ds, r0.lambda + eps, cr).m * (-eps);
    CHECK((approx - r0.B).max_abs() < 1e-3 * r0.B.max_abs());
}

TEST_CASE("tail estimate and TailTooLarge guard") {
    Mat d(2, 2);
    d(0, 0) = 1;
    d(1, 1) = 2;
    MatrixPotential v = MatrixPotential::constant(d);
    SpectralDataset ds = assemble_dataset(v, {1.0, 2.0}, PI2 * 30.5 * 30.5);
    SeriesConfig cfg;
    cfg.n_max = 25;
    cfg.tail_tol = 1e-30;  // impossible tolerance: the estimate must trip it
    CHECK_THROWS_WITH_AS(reconstruct_M(ds, cplx(-4, 0), cfg), doctest::Contains("TailTooLarge"),
                         Error);
    cfg.tail_tol = 0;
    SeriesResult r = reconstruct_M(ds, cplx(-4, 0), cfg);
    WeylEvaluation w = evaluate_M(v, cplx(-4, 0));
    // reported estimate bounds the actual truncation error (constant data:
    // pair terms cancel to roundoff, so both sides are tiny)
    CHECK((r.m - w.m).max_abs() <= std::max(r.tail_estimate * 10, 1e-8));
}
