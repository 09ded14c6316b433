#include "svspec/spectraldata.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace svspec {

const EigenRecord& SpectralDataset::at(int n, int j) const {
    for (const auto& r : records)
        if (r.index && r.index->first == n && r.index->second == j) return r;
    fail(ErrorCode::Internal, "no record with index (" + std::to_string(n) + "," + std::to_string(j) + ")");
}

int SpectralDataset::max_shell() const {
    int m = 0;
    for (const auto& r : records)
        if (r.index) m = std::max(m, r.index->first);
    return m;
}

EigenRecord build_record(const MatrixPotential& v, const EigenLocation& loc,
                         const SpectrumConfig& cfg) {
    auto [k, h] = multiplicity(v, loc.lambda, cfg);
    SolveWant want;
    want.gram = true;
    SolutionBundle b = solve_bundle(v, loc.lambda, cfg.ode, want, Pass::PhiOnly);
    EigenRecord rec;
    rec.lambda = loc.lambda;
    rec.k = k;
    rec.h = h;
    rec.P = h * h.adjoint();
    rec.g = (h.adjoint() * b.gram * h).hermitize();
    HermEig ge = herm_eig(rec.g);
    if (ge.values.front() <= 0)
        fail(ErrorCode::GramNotPositive,
             "normalizing matrix not positive at lambda=" + std::to_string(loc.lambda));
    rec.B = h * solve(rec.g, h.adjoint());
    rec.B = rec.B.hermitize();
    // invariants: P projector, B rank k
    Mat p2 = rec.P * rec.P - rec.P;
    if (p2.max_abs() > 1e-10) fail(ErrorCode::Internal, "projector invariant violated");
    Svd bs = svd(rec.B);
    if (k < v.dim() && bs.sigma[k] > 1e-6 * bs.sigma[0])
        fail(ErrorCode::Internal, "residue rank exceeds kernel dimension");
    return rec;
}

Mat residue_via_contour(const MatrixPotential& v, double center, double radius,
                        const OdeConfig& ode, double tol) {
    int n = v.dim();
    auto sum_at = [&](int k_nodes) {
        std::vector<Mat> vals(k_nodes);
        parallel_for(k_nodes, [&](std::size_t i) {
            double th = 2 * PI * i / k_nodes;
            cplx lam = center + radius * std::exp(cplx(0, th));
            SolutionBundle b = solve_bundle(v, lam, ode, SolveWant{}, Pass::ChiOnly);
            if (cond_number(b.chi0) > 1e14)
                fail(ErrorCode::ZeroOnContour, "chi(0) nearly singular on residue contour");
            // dl = i * radius * e^{i th} d th; -(1/2 pi i) M dl accumulates to
            // -(radius / K) * sum M(lam) e^{i th}
            vals[i] = (b.dchi0 * inverse(b.chi0)) * std::exp(cplx(0, th));
        });
        Mat acc = Mat::zeros(n, n);
        for (const auto& m : vals) acc += m;
        return acc * (-radius / k_nodes);
    };
    int k_nodes = 64;
    Mat prev = sum_at(k_nodes);
    for (;;) {
        k_nodes *= 2;
        Mat cur = sum_at(k_nodes);
        double change = (cur - prev).max_abs();
        if (change < tol * std::max(1.0, cur.max_abs())) return cur;
        if (k_nodes >= 4096)
            fail(ErrorCode::ToleranceNotMet, "residue trapezoid sum did not converge");
        prev = cur;
    }
}

SpectralDataset assemble_dataset(const MatrixPotential& v, const std::vector<double>& v0,
                                 double lambda_max, const SpectrumConfig& cfg) {
    int nch = v.dim();
    if (static_cast<int>(v0.size()) != nch) fail(ErrorCode::Internal, "v0 size mismatch");
    std::vector<EigenLocation> locs = locate_all(v, lambda_max, cfg);

    SpectralDataset ds;
    ds.N = nch;
    ds.v0 = v0;
    ds.records.resize(locs.size());
    parallel_for(locs.size(), [&](std::size_t i) { ds.records[i] = build_record(v, locs[i], cfg); });

    // detect n_diamond: first shell from which every remaining shell carries
    // exactly N simple eigenvalues matched to pi^2 n^2 + v_j
    std::vector<int> mult(locs.size());
    for (size_t i = 0; i < locs.size(); ++i) mult[i] = ds.records[i].k;

    int total = 0;
    for (int m : mult) total += m;
    int full_shells = total / nch;  // shells fully inside lambda_max

    // walk candidate n_diamond values from below
    int alpha_d = static_cast<int>(locs.size());
    int n_d = full_shells + 1;
    for (int nd = 1; nd <= full_shells; ++nd) {
        int consumed = 0;
        size_t a = 0;
        while (a < locs.size() && consumed < nch * (nd - 1)) consumed += mult[a++];
        if (consumed != nch * (nd - 1)) continue;
        bool ok = true;
        size_t idx = a;
        for (int n = nd; n <= full_shells && ok; ++n) {
            for (int j = 0; j < nch && ok; ++j) {
                size_t pos = idx + static_cast<size_t>(n - nd) * nch + j;
                if (pos >= locs.size()) break;
                if (mult[pos] != 1) ok = false;
                // order-preserving match must stay inside the shell half-gap
                double target = PI2 * n * n + v0[j];
                double gap = PI2 * (2 * n + 1) / 2.0;
                if (std::abs(locs[pos].lambda - target) > 0.45 * gap) ok = false;
            }
        }
        if (ok) {
            alpha_d = static_cast<int>(a);
            n_d = nd;
            break;
        }
    }
    if (n_d > full_shells && full_shells > 0)
        fail(ErrorCode::IndexingAmbiguous, "no shell admits the (n,j) double-indexing");
    ds.alpha_diamond = alpha_d;
    ds.n_diamond = n_d;

    // assign (n, j) with the order-preserving (minimal total displacement) match;
    // flag ties against neighbouring shells
    size_t idx = alpha_d;
    for (int n = n_d; idx < locs.size(); ++n) {
        for (int j = 0; j < nch && idx < locs.size(); ++j, ++idx) {
            EigenRecord& r = ds.records[idx];
            double target = PI2 * n * n + v0[j];
            double here = std::abs(r.lambda - target);
            double other = std::min(std::abs(r.lambda - (PI2 * (n - 1) * (n - 1) + v0[nch - 1])),
                                    std::abs(r.lambda - (PI2 * (n + 1) * (n + 1) + v0[0])));
            if (other < here)
                fail(ErrorCode::IndexingAmbiguous,
                     "eigenvalue " + std::to_string(r.lambda) + " sits closer to a neighbouring shell");
            r.index = std::make_pair(n, j + 1);
            // sign convention <h_{n,j}, e_j> > 0 via phase normalization
            cplx hj = r.h(j, 0);
            if (std::abs(hj) > 1e-14) {
                cplx phase = std::conj(hj) / std::abs(hj);
                r.h = r.h * phase;
            }
        }
    }
    return ds;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double floor,
                    bool* all_tiny) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (y[i] < floor) continue;
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (all_tiny) *all_tiny = (m < 3);
    if (m < 3) return 0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {
double cauchy_tail_growth(const std::vector<double>& s) {
    // partial sums of squares; relative growth over the last half
    double total = 0;
    std::vector<double> partial(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        total += s[i] * s[i];
        partial[i] = total;
    }
    if (total == 0) return 0;
    double half = partial[s.size() / 2];
    return (total - half) / total;
}
}  // namespace

TailDiagnostics check_condition_B(const SpectralDataset& ds) {
    int nd = ds.n_diamond, nmax = ds.max_shell();
    if (nmax - nd + 1 < 20) fail(ErrorCode::InsufficientShells, "need at least 20 indexed shells");
    TailDiagnostics t;
    int nch = ds.N;
    for (int n = nd; n <= nmax; ++n) {
        double a = 0, b = 0, c = 0;
        Mat sum = Mat::zeros(nch, nch);
        bool complete = true;
        for (int j = 1; j <= nch; ++j) {
            const EigenRecord* r = nullptr;
            for (const auto& rec : ds.records)
                if (rec.index && rec.index->first == n && rec.index->second == j) r = &rec;
            if (!r) { complete = false; break; }
            a = std::max(a, std::abs(r->lambda - PI2 * n * n - ds.v0[j - 1]));
            double gj = r->g(0, 0).real();
            b = std::max(b, std::abs(PI * n * (2 * PI2 * n * n * gj - 1.0)));
            Mat pj = Mat::zeros(nch, nch);
            pj(j - 1, j - 1) = 1;
            c = std::max(c, op_norm(r->P - pj));
            sum += r->P;
        }
        if (!complete) break;
        t.shells.push_back(n);
        t.a_seq.push_back(a);
        t.b_seq.push_back(b);
        t.c_seq.push_back(c);
        t.d_seq.push_back(PI * n * op_norm(sum - Mat::identity(nch)));
    }
    // sequences at the refinement roundoff floor count as identically zero;
    // the floors scale with the eigenvalue (a) and the pi*n weight (b, d)
    std::vector<double> ns(t.shells.begin(), t.shells.end());
    auto clipped = [&](const std::vector<double>& s, auto floor_of) {
        std::vector<double> out(s.size());
        for (size_t i = 0; i < s.size(); ++i) out[i] = s[i] < floor_of(t.shells[i]) ? 0.0 : s[i];
        return out;
    };
    std::vector<double> a_sig = clipped(t.a_seq, [](int n) { return 1e-9 * PI2 * n * n; });
    std::vector<double> c_sig = clipped(t.c_seq, [](int) { return 1e-9; });
    std::vector<double> b_sig = clipped(t.b_seq, [](int n) { return 1e-7 * n; });
    std::vector<double> d_sig = clipped(t.d_seq, [](int n) { return 1e-7 * n; });
    bool tiny_a = false, tiny_c = false;
    t.a_slope = loglog_slope(ns, a_sig, 1e-300, &tiny_a);
    t.c_slope = loglog_slope(ns, c_sig, 1e-300, &tiny_c);
    t.a_pass = tiny_a || t.a_slope <= -0.7;
    t.c_pass = tiny_c || t.c_slope <= -0.7;
    t.b_cauchy = cauchy_tail_growth(b_sig);
    t.d_cauchy = cauchy_tail_growth(d_sig);
    t.b_pass = t.b_cauchy < 0.05;
    t.d_pass = t.d_cauchy < 0.05;
    return t;
}

EquivalenceReport projector_equivalence(const SpectralDataset& ds) {
    EquivalenceReport rep;
    int nch = ds.N;
    int nmax = ds.max_shell();
    for (int n = ds.n_diamond; n <= nmax; ++n) {
        Mat h(nch, nch), hg(nch, nch);
        bool complete = true;
        Mat sum = Mat::zeros(nch, nch);
        for (int j = 1; j <= nch && complete; ++j) {
            const EigenRecord* r = nullptr;
            for (const auto& rec : ds.records)
                if (rec.index && rec.index->first == n && rec.index->second == j) r = &rec;
            if (!r) { complete = false; break; }
            double gj = r->g(0, 0).real();
            for (int i = 0; i < nch; ++i) {
                h(i, j - 1) = r->h(i, 0);
                hg(i, j - 1) = r->h(i, 0) / std::sqrt(gj);
            }
            sum += r->P;
        }
        if (!complete) break;
        rep.shells.push_back(n);
        rep.sum_proj_err.push_back(op_norm(sum - Mat::identity(nch)));
        Mat cross = h.adjoint() * h;
        double mx = 0;
        for (int i = 0; i < nch; ++i)
            for (int j = 0; j < nch; ++j)
                if (i != j) mx = std::max(mx, std::abs(cross(i, j)));
        rep.cross_inner.push_back(mx);
        Mat bn = Mat::zeros(nch, nch);
        for (int j = 1; j <= nch; ++j) {
            const EigenRecord& r = ds.at(n, j);
            bn += r.B;
        }
        rep.bn_err.push_back(op_norm(bn - Mat::identity(nch) * (2 * PI2 * n * n)));
        rep.hn_gram_err.push_back(op_norm(hg.adjoint() * hg - Mat::identity(nch) * (2 * PI2 * n * n)));
    }
    double lo = 1e300, hi = 0;
    for (size_t i = 0; i < rep.shells.size(); ++i) {
        double num = rep.sum_proj_err[i], den = rep.cross_inner[i];
        if (num < 1e-13 || den < 1e-13) continue;  // both at roundoff: skip
        double ratio = num / den;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    if (hi == 0) { lo = 1; hi = 1; }
    rep.ratio_lo = lo;
    rep.ratio_hi = hi;
    rep.bounded = (hi <= 10.0 && lo >= 0.1);
    return rep;
}

BnAsymptoteReport check_Bn_asymptote(const MatrixPotential& v, const SpectralDataset& ds,
                                     const std::vector<int>& n_list) {
    BnAsymptoteReport rep;
    rep.n_list = n_list;
    for (int n : n_list) {
        Mat bn = Mat::zeros(ds.N, ds.N);
        for (int j = 1; j <= ds.N; ++j) bn += ds.at(n, j).B;
        Mat ws = v.fourier_coefficient(MatrixPotential::CoefKind::WeightedSin, n);
        Mat rem = bn * (1.0 / (2 * PI2 * n * n)) - Mat::identity(ds.N) + ws * (1.0 / (PI * n));
        rep.r.push_back(op_norm(rem));
    }
    std::vector<double> ns(n_list.begin(), n_list.end());
    bool tiny = false;
    rep.exponent = loglog_slope(ns, rep.r, 1e-13, &tiny);
    rep.pass = tiny || rep.exponent <= -1.8;
    return rep;
}

}  // namespace svspec
