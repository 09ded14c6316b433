#include "svspec/matode.hpp"

#include <algorithm>
#include <cmath>

namespace svspec {

namespace {

// Dormand-Prince 8(5,3) coefficients (DOP853 tableau).
constexpr double c2 = 0.05260015195876773187856, c3 = 0.07890022793815159781784,
                 c4 = 0.11835034190722739672676, c5 = 0.28164965809277260327324,
                 c6 = 0.33333333333333333333333, c7 = 0.25,
                 c8 = 0.30769230769230769230769, c9 = 0.65128205128205128205128,
                 c10 = 0.6, c11 = 0.85714285714285714285714;
constexpr double a21 = 0.05260015195876773187856;
constexpr double a31 = 0.01972505698453789945446, a32 = 0.05917517095361369836338;
constexpr double a41 = 0.02958758547680684918169, a43 = 0.08876275643042054754507;
constexpr double a51 = 0.24136513415926668550237, a53 = -0.88454947932828608534486,
                 a54 = 0.92483400326179200311574;
constexpr double a61 = 0.03703703703703703703704, a64 = 0.17082860872947387127960,
                 a65 = 0.12546768756682242501669;
constexpr double a71 = 0.037109375, a74 = 0.17025221101954403931498,
                 a75 = 0.06021653898045596068502, a76 = -0.017578125;
constexpr double a81 = 0.03709200011850479271088, a84 = 0.17038392571223999381021,
                 a85 = 0.10726203044637328465181, a86 = -0.01531943774862440175279,
                 a87 = 0.00827378916381402288758;
constexpr double a91 = 0.62411095871607571711443, a94 = -3.36089262944694129406857,
                 a95 = -0.86821934684172600681819, a96 = 27.5920996994467083049416,
                 a97 = 20.1540675504778934086187, a98 = -43.4898841810699588477366;
constexpr double a101 = 0.47766253643826436589043, a104 = -2.48811461997166764192642,
                 a105 = -0.59029082683684299637145, a106 = 21.2300514481811942347289,
                 a107 = 15.2792336328824235832597, a108 = -33.2882109689848629194453,
                 a109 = -0.02033120170850862613582;
constexpr double a111 = -0.93714243008598732571704, a114 = 5.18637242884406370830024,
                 a115 = 1.09143734899672957818500, a116 = -8.14978701074692612513997,
                 a117 = -18.5200656599969598641566, a118 = 22.7394870993505042818970,
                 a119 = 2.49360555267965238987089, a1110 = -3.04676447189821950038237;
constexpr double a121 = 2.27331014751653820792360, a124 = -10.5344954667372501984067,
                 a125 = -2.00087205822486249909676, a126 = -17.9589318631187989172766,
                 a127 = 27.9488845294199600508500, a128 = -2.85899827713502369474066,
                 a129 = -8.87285693353062954433549, a1210 = 12.3605671757943030647266,
                 a1211 = 0.64339274601576353035597;
constexpr double b1 = 0.05429373411656876223805, b6 = 4.45031289275240888144114,
                 b7 = 1.89151789931450038304282, b8 = -5.80120396001058478146721,
                 b9 = 0.31116436695781989440892, b10 = -0.15216094966251607855618,
                 b11 = 0.20136540080403034837478, b12 = 0.04471061572777259051769;
constexpr double bhh1 = 0.24409448818897637795276, bhh2 = 0.73384668828161185734136,
                 bhh3 = 0.02205882352941176470588;
constexpr double er1 = 0.01312004499419488073250, er6 = -1.22515644637620444072057,
                 er7 = -0.49575894965725019152141, er8 = 1.66437718245498653696153,
                 er9 = -0.35032884874997368168865, er10 = 0.33417911871301747902973,
                 er11 = 0.08192320648511571246571, er12 = -0.02235530786388629525884;

using State = std::vector<cplx>;

/// Second-order system -y'' + V(x) y = lambda y stacked with its lambda-derivative
/// chains and (optionally) the Gram accumulator. Block layout, nn = N*N entries each:
///   [y, y', ydot, ydot', yddot, yddot', gram]
struct SLSystem {
    const MatrixPotential* v;
    cplx lambda;
    int n;
    int levels;  // 1 (y), 2 (+ydot), or 3 (+yddot)
    bool gram;
    mutable Mat vx_scratch;

    int nn() const { return n * n; }
    int size() const { return nn() * (2 * levels + (gram ? 1 : 0)); }

    void eval(double x, const State& s, State& ds) const {
        v->evaluate_into(x, vx_scratch);
        const Mat& vx = vx_scratch;
        const int m = nn();
        for (int i = 0; i < m; ++i) ds[i] = s[m + i];
        mul_vl(vx, &s[0], &ds[m]);
        if (levels >= 2) {
            for (int i = 0; i < m; ++i) ds[2 * m + i] = s[3 * m + i];
            mul_vl(vx, &s[2 * m], &ds[3 * m]);
            for (int i = 0; i < m; ++i) ds[3 * m + i] -= s[i];
        }
        if (levels >= 3) {
            for (int i = 0; i < m; ++i) ds[4 * m + i] = s[5 * m + i];
            mul_vl(vx, &s[4 * m], &ds[5 * m]);
            for (int i = 0; i < m; ++i) ds[5 * m + i] -= 2.0 * s[2 * m + i];
        }
        if (gram) {
            // G' = y^* y (real-lambda usage)
            const cplx* y = &s[0];
            cplx* g = &ds[2 * levels * m];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    cplx acc = 0;
                    for (int k = 0; k < n; ++k) acc += std::conj(y[k * n + i]) * y[k * n + j];
                    g[i * n + j] = acc;
                }
        }
    }

private:
    // out = (vx - lambda I) * Y, Y row-major n x n at yblock
    void mul_vl(const Mat& vx, const cplx* yblock, cplx* out) const {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx acc = -lambda * yblock[i * n + j];
                for (int k = 0; k < n; ++k) acc += vx(i, k) * yblock[k * n + j];
                out[i * n + j] = acc;
            }
    }
};

struct Stepper {
    SLSystem sys;
    OdeConfig cfg;
    double hmax;
    State k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, kc, yt;
    double est_error = 0;
    long steps = 0;

    Stepper(SLSystem s, const OdeConfig& c) : sys(std::move(s)), cfg(c) {
        if (!(cfg.rel_tol > 1e-14 && cfg.rel_tol < 1e-3))
            fail(ErrorCode::ToleranceNotMet, "rel_tol outside (1e-14, 1e-3)");
        double zl = std::sqrt(std::abs(sys.lambda));
        hmax = cfg.max_step_factor / std::max(1.0, zl);
        int sz = sys.size();
        sys.vx_scratch = Mat(sys.n, sys.n);
        for (State* st : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &k8, &k9, &k10, &k11, &k12, &kc, &yt})
            st->assign(sz, cplx(0, 0));
    }

    /// Advance y from x to x_end (either direction). h persists across calls.
    void integrate(State& y, double x, double x_end, double& h) {
        const int sz = sys.size();
        double dir = x_end >= x ? 1.0 : -1.0;
        if (h == 0 || h * dir < 0) h = dir * std::min(hmax, 1e-3);
        h = dir * std::min(std::abs(h), hmax);
        while (dir * (x_end - x) > 1e-15) {
            if (++steps > cfg.max_steps)
                fail(ErrorCode::StepLimitExceeded, "too many integration steps");
            double hstep = (dir * (x + h - x_end) > 0) ? (x_end - x) : h;
            sys.eval(x, y, k1);
            stages(y, x, hstep);
            double err3 = 0, err5 = 0;
            for (int i = 0; i < sz; ++i) {
                double sk = 1e-14 + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(yt[i]));
                cplx e3 = kc[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i];
                cplx e5 = er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] +
                          er10 * k10[i] + er11 * k11[i] + er12 * k12[i];
                err3 += std::norm(e3 / sk);
                err5 += std::norm(e5 / sk);
            }
            double den = std::sqrt(sz * (err5 + 0.01 * err3));
            double err = den == 0 ? 0 : err5 * std::abs(hstep) / den;
            double fac = std::pow(std::max(err, 1e-32), 0.125);
            if (err <= 1.0) {
                x += hstep;
                std::swap(y, yt);
                est_error += err * cfg.rel_tol;
                double grow = std::min(6.0, 0.9 / fac);
                h = dir * std::min(hmax, std::abs(hstep) * std::max(0.1, grow));
            } else {
                h = dir * std::abs(hstep) * std::max(0.333, 0.9 / fac);
                if (std::abs(h) < 1e-14) fail(ErrorCode::ToleranceNotMet, "step size underflow");
            }
        }
    }

private:
    void comb(State& out, const State& y, double h,
              std::initializer_list<std::pair<double, const State*>> terms) {
        const int sz = sys.size();
        for (int i = 0; i < sz; ++i) {
            cplx acc = 0;
            for (const auto& t : terms) acc += t.first * (*t.second)[i];
            out[i] = y[i] + h * acc;
        }
    }

    void stages(const State& y, double x, double h) {
        comb(yt, y, h, {{a21, &k1}});
        sys.eval(x + c2 * h, yt, k2);
        comb(yt, y, h, {{a31, &k1}, {a32, &k2}});
        sys.eval(x + c3 * h, yt, k3);
        comb(yt, y, h, {{a41, &k1}, {a43, &k3}});
        sys.eval(x + c4 * h, yt, k4);
        comb(yt, y, h, {{a51, &k1}, {a53, &k3}, {a54, &k4}});
        sys.eval(x + c5 * h, yt, k5);
        comb(yt, y, h, {{a61, &k1}, {a64, &k4}, {a65, &k5}});
        sys.eval(x + c6 * h, yt, k6);
        comb(yt, y, h, {{a71, &k1}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        sys.eval(x + c7 * h, yt, k7);
        comb(yt, y, h, {{a81, &k1}, {a84, &k4}, {a85, &k5}, {a86, &k6}, {a87, &k7}});
        sys.eval(x + c8 * h, yt, k8);
        comb(yt, y, h, {{a91, &k1}, {a94, &k4}, {a95, &k5}, {a96, &k6}, {a97, &k7}, {a98, &k8}});
        sys.eval(x + c9 * h, yt, k9);
        comb(yt, y, h,
             {{a101, &k1}, {a104, &k4}, {a105, &k5}, {a106, &k6}, {a107, &k7}, {a108, &k8}, {a109, &k9}});
        sys.eval(x + c10 * h, yt, k10);
        comb(yt, y, h,
             {{a111, &k1}, {a114, &k4}, {a115, &k5}, {a116, &k6}, {a117, &k7}, {a118, &k8},
              {a119, &k9}, {a1110, &k10}});
        sys.eval(x + c11 * h, yt, k11);
        comb(yt, y, h,
             {{a121, &k1}, {a124, &k4}, {a125, &k5}, {a126, &k6}, {a127, &k7}, {a128, &k8},
              {a129, &k9}, {a1210, &k10}, {a1211, &k11}});
        sys.eval(x + h, yt, k12);
        const int sz = sys.size();
        for (int i = 0; i < sz; ++i) {
            cplx inc = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] +
                       b10 * k10[i] + b11 * k11[i] + b12 * k12[i];
            kc[i] = inc;
            yt[i] = y[i] + h * inc;
        }
    }
};

Mat block_to_mat(const State& s, int offset, int n) {
    Mat m(n, n);
    for (int i = 0; i < n * n; ++i) m.data()[i] = s[offset + i];
    return m;
}

void mat_to_block(const Mat& m, State& s, int offset) {
    for (int i = 0; i < m.rows() * m.cols(); ++i) s[offset + i] = m.data()[i];
}

int levels_for(const SolveWant& w) { return w.second_lambda_deriv ? 3 : (w.lambda_derivs ? 2 : 1); }

State initial_state(const SLSystem& sys, Direction dir) {
    State s(sys.size(), cplx(0, 0));
    Mat dy0 = Mat::identity(sys.n) * (dir == Direction::Phi ? 1.0 : -1.0);
    mat_to_block(dy0, s, sys.nn());
    return s;
}

void guard_lambda(cplx lambda) {
    if (std::abs(lambda) > 1e8) fail(ErrorCode::StepLimitExceeded, "|lambda| above 1e8 guard");
}

}  // namespace

SolutionBundle solve_bundle(const MatrixPotential& v, cplx lambda, const OdeConfig& cfg,
                            const SolveWant& want, Pass pass) {
    guard_lambda(lambda);
    if (want.gram && std::abs(lambda.imag()) > 1e-8 * std::max(1.0, std::abs(lambda)))
        fail(ErrorCode::BadKind, "gram integral is defined for real lambda only");
    int n = v.dim();
    int lv = levels_for(want);
    SolutionBundle out;
    out.lambda = lambda;
    int m = n * n;
    if (pass != Pass::ChiOnly) {
        SLSystem sys{&v, lambda, n, lv, want.gram, Mat()};
        Stepper st(std::move(sys), cfg);
        State y = initial_state(st.sys, Direction::Phi);
        double h = 0;
        st.integrate(y, 0.0, 1.0, h);
        out.phi1 = block_to_mat(y, 0, n);
        out.dphi1 = block_to_mat(y, m, n);
        if (lv >= 2) {
            out.phi1_dot = block_to_mat(y, 2 * m, n);
            out.dphi1_dot = block_to_mat(y, 3 * m, n);
        }
        if (lv >= 3) out.phi1_ddot = block_to_mat(y, 4 * m, n);
        if (want.gram) out.gram = block_to_mat(y, 2 * lv * m, n);
        out.est_error = st.est_error;
    }
    if (pass != Pass::PhiOnly) {
        SLSystem sys{&v, lambda, n, lv, false, Mat()};
        Stepper st(std::move(sys), cfg);
        State y = initial_state(st.sys, Direction::Chi);
        double h = 0;
        st.integrate(y, 1.0, 0.0, h);
        out.chi0 = block_to_mat(y, 0, n);
        out.dchi0 = block_to_mat(y, m, n);
        if (lv >= 2) {
            out.chi0_dot = block_to_mat(y, 2 * m, n);
            out.dchi0_dot = block_to_mat(y, 3 * m, n);
        }
        if (lv >= 3) out.chi0_ddot = block_to_mat(y, 4 * m, n);
        out.est_error = std::max(out.est_error, st.est_error);
    }
    return out;
}

GridSolution solve_on_grid(const MatrixPotential& v, cplx lambda, Direction dir, int segments,
                           const OdeConfig& cfg, const SolveWant& want) {
    guard_lambda(lambda);
    int n = v.dim();
    int lv = levels_for(want);
    SLSystem sys{&v, lambda, n, lv, false, Mat()};
    Stepper st(std::move(sys), cfg);
    State y = initial_state(st.sys, dir);
    GridSolution g;
    g.lambda = lambda;
    g.t.resize(segments + 1);
    g.y.resize(segments + 1);
    g.yp.resize(segments + 1);
    if (lv >= 2) {
        g.yd.resize(segments + 1);
        g.ydp.resize(segments + 1);
    }
    if (lv >= 3) {
        g.ydd.resize(segments + 1);
        g.yddp.resize(segments + 1);
    }
    int m = n * n;
    auto record = [&](int idx) {
        g.t[idx] = static_cast<double>(idx) / segments;
        g.y[idx] = block_to_mat(y, 0, n);
        g.yp[idx] = block_to_mat(y, m, n);
        if (lv >= 2) {
            g.yd[idx] = block_to_mat(y, 2 * m, n);
            g.ydp[idx] = block_to_mat(y, 3 * m, n);
        }
        if (lv >= 3) {
            g.ydd[idx] = block_to_mat(y, 4 * m, n);
            g.yddp[idx] = block_to_mat(y, 5 * m, n);
        }
    };
    double h = 0;
    if (dir == Direction::Phi) {
        record(0);
        for (int i = 1; i <= segments; ++i) {
            st.integrate(y, static_cast<double>(i - 1) / segments, static_cast<double>(i) / segments, h);
            record(i);
        }
    } else {
        record(segments);
        for (int i = segments - 1; i >= 0; --i) {
            st.integrate(y, static_cast<double>(i + 1) / segments, static_cast<double>(i) / segments, h);
            record(i);
        }
    }
    g.est_error = st.est_error;
    return g;
}

Mat free_solution_asymptote(const MatrixPotential& v, cplx z) {
    int n = v.dim();
    cplx sz = z == cplx(0, 0) ? cplx(1, 0) : std::sin(z) / z;
    Mat out = Mat::identity(n) * sz;
    int panels = std::max(16, static_cast<int>(std::ceil(std::abs(z) / 2)));
    std::vector<double> gx, gw;
    gauss_legendre(16, gx, gw);
    Mat integral = Mat::zeros(n, n);
    double h = 1.0 / panels;
    Mat vx(n, n);
    for (int p = 0; p < panels; ++p) {
        double a = p * h;
        for (size_t q = 0; q < gx.size(); ++q) {
            double t = a + h * gx[q];
            cplx w = std::sin(z * (1 - t)) * std::sin(z * t) * (h * gw[q]);
            v.evaluate_into(t, vx);
            integral += vx * w;
        }
    }
    out += integral * (1.0 / (z * z));
    return out;
}

}  // namespace svspec
